//! Analytical inversion through the limiting-PMI relations.
//!
//! Given the limiting PMI `M̂_∞`, the degrees and the volume, the normalized
//! Laplacian is `L̄ = (D^{1/2}((M̂_∞ − J)/v_G)D^{1/2} + I)⁺` and the adjacency
//! is `A = D^{1/2}(I − L̄)D^{1/2}`. A finite-window, rank-`k` PPMI matrix is
//! mapped to an approximate `M̂_∞` with `T·(exp(M) − J)` first. When the
//! degrees are unknown, `(M̂_∞ − J)x = −1` gives `x = d / v_G`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{lstsq, pinv_symmetric, scale_rows_cols, symmetrize};

/// Residual (RMS per entry) above which the degree system counts as inconsistent.
pub const DEGREE_RESIDUAL_TOL: f64 = 1e-6;
/// Singular values below this fraction of the largest count as zero.
const DEGREE_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct AnalyticalInversionInput {
    pub m_tk: DMatrix<f64>,
    pub window_size: usize,
    pub degrees: DVector<f64>,
    pub volume: f64,
}

impl AnalyticalInversionInput {
    pub fn new(m_tk: DMatrix<f64>, window_size: usize, degrees: DVector<f64>, volume: f64) -> Result<Self> {
        if m_tk.nrows() != m_tk.ncols() || m_tk.nrows() != degrees.len() {
            return Err(Error::Shape(format!(
                "matrix {}x{} with {} degrees",
                m_tk.nrows(),
                m_tk.ncols(),
                degrees.len()
            )));
        }
        if window_size == 0 {
            return Err(Error::InvalidParameter("window size T must be at least 1".into()));
        }
        check_degrees(&degrees, volume)?;
        Ok(Self { m_tk, window_size, degrees, volume })
    }
}

fn check_positive(degrees: &DVector<f64>, volume: f64) -> Result<()> {
    if let Some(i) = degrees.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::ZeroDegree(i));
    }
    if !(volume > 0.0) {
        return Err(Error::InvalidParameter(format!("volume {volume} must be positive")));
    }
    Ok(())
}

fn check_degrees(degrees: &DVector<f64>, volume: f64) -> Result<()> {
    check_positive(degrees, volume)?;
    let sum = degrees.sum();
    if (sum - volume).abs() > 1e-6 * volume {
        return Err(Error::InvalidParameter(format!("degrees sum to {sum}, volume is {volume}")));
    }
    Ok(())
}

/// Solves `(m_inf − J)x = −1` by least squares and returns `v_G·x`.
///
/// Fails with [`Error::DegreeRecovery`] when the system is rank-deficient
/// (the adjacency matrix is singular) or its residual exceeds
/// [`DEGREE_RESIDUAL_TOL`].
pub fn recover_degrees(m_inf: &DMatrix<f64>, volume: f64) -> Result<DVector<f64>> {
    let n = m_inf.nrows();
    if m_inf.ncols() != n {
        return Err(Error::Shape(format!("matrix is {}x{}", n, m_inf.ncols())));
    }
    let mut system = m_inf.clone();
    system.add_scalar_mut(-1.0);
    let rhs = DVector::from_element(n, -1.0);
    let (x, rank) = lstsq(&system, &rhs, DEGREE_RANK_TOL);
    let residual = (&system * &x - &rhs).norm() / (n as f64).sqrt();
    let degrees = x * volume;
    if rank < n || !(residual <= DEGREE_RESIDUAL_TOL) {
        return Err(Error::DegreeRecovery { degrees: degrees.as_slice().to_vec(), residual, rank, n });
    }
    Ok(degrees)
}

fn clip_unit(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.map(|x| x.clamp(0.0, 1.0))
}

/// Unclipped `D^{1/2}(I − L̄)D^{1/2}` with `L̄` from the pseudoinverse relation.
fn adjacency_from_limiting(m_inf: &DMatrix<f64>, degrees: &DVector<f64>, volume: f64) -> DMatrix<f64> {
    let n = m_inf.nrows();
    let sqrt_d = degrees.map(f64::sqrt);
    let mut centered = m_inf.clone();
    centered.add_scalar_mut(-1.0);
    let lpinv = scale_rows_cols(&centered, &sqrt_d, &sqrt_d) / volume + DMatrix::identity(n, n);
    let laplacian = pinv_symmetric(&lpinv);
    let mut adj = scale_rows_cols(&(DMatrix::identity(n, n) - laplacian), &sqrt_d, &sqrt_d);
    symmetrize(&mut adj);
    adj
}

/// Recovers the adjacency matrix from a limiting PMI matrix, clipped to `[0, 1]`.
pub fn invert_limiting(m_inf: &DMatrix<f64>, degrees: &DVector<f64>, volume: f64) -> Result<DMatrix<f64>> {
    if m_inf.nrows() != m_inf.ncols() || m_inf.nrows() != degrees.len() {
        return Err(Error::Shape(format!(
            "matrix {}x{} with {} degrees",
            m_inf.nrows(),
            m_inf.ncols(),
            degrees.len()
        )));
    }
    check_positive(degrees, volume)?;
    if m_inf.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("limiting PMI"));
    }
    Ok(clip_unit(&adjacency_from_limiting(m_inf, degrees, volume)))
}

/// `T·(exp(M) − J)`, the approximate limiting PMI of a PPMI matrix.
pub fn approx_limiting_from_ppmi(m_tk: &DMatrix<f64>, window_size: usize) -> Result<DMatrix<f64>> {
    let t = window_size as f64;
    let out = m_tk.map(|x| t * (x.exp() - 1.0));
    if out.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("exp of PPMI (overflow)"));
    }
    Ok(out)
}

/// The full analytical pipeline on a (low-rank) PPMI matrix.
pub fn deepwalk_backwards_analytical(inp: &AnalyticalInversionInput) -> Result<DMatrix<f64>> {
    let m_inf = approx_limiting_from_ppmi(&inp.m_tk, inp.window_size)?;
    invert_limiting(&m_inf, &inp.degrees, inp.volume)
}
