//! Squared PPMI error and its gradient with respect to the adjacency entries.
//!
//! Forward, with `d = A·1`, `v = Σ A`, `P = D^{-1/2} A D^{-1/2}`:
//!
//! ```text
//! Q   = Σ_{r=1..T} P^r
//! Z   = (v / T) · D^{-1/2} Q D^{-1/2}
//! M̃   = log(max(1, Z))
//! L   = ‖M̃ − M‖²_F
//! ```
//!
//! The backward pass walks the same chain in reverse: the clamp passes the
//! gradient only where `Z > 1`, the power sum is unrolled as
//! `X_1 = P, X_r = P·X_{r−1}`, and the degree and volume dependence of the
//! scalings is folded back onto `A` through `d_i = Σ_j A_ij` and `v = Σ A`.
//! Partials treat every entry of `A` as independent and are evaluated at a
//! symmetric `A`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::scale_rows_cols;

/// Loss value and `∂L/∂A` (n×n).
pub fn ppmi_loss(adj: &DMatrix<f64>, m_tk: &DMatrix<f64>, window_size: usize) -> Result<(f64, DMatrix<f64>)> {
    let n = adj.nrows();
    if adj.ncols() != n || m_tk.nrows() != n || m_tk.ncols() != n {
        return Err(Error::Shape(format!(
            "adjacency {}x{} vs target {}x{}",
            adj.nrows(),
            adj.ncols(),
            m_tk.nrows(),
            m_tk.ncols()
        )));
    }
    if window_size == 0 {
        return Err(Error::InvalidParameter("window size T must be at least 1".into()));
    }
    let degrees: Vec<f64> = adj.row_iter().map(|r| r.sum()).collect();
    if let Some(i) = degrees.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::ZeroDegree(i));
    }
    let volume: f64 = degrees.iter().sum();
    let dinv = nalgebra::DVector::from_iterator(n, degrees.iter().map(|d| 1.0 / d.sqrt()));
    let scale = volume / window_size as f64;

    let p = scale_rows_cols(adj, &dinv, &dinv);
    let mut powers = Vec::with_capacity(window_size);
    powers.push(p.clone());
    for r in 1..window_size {
        let next = &p * &powers[r - 1];
        powers.push(next);
    }
    let mut q = p.clone();
    for x in &powers[1..] {
        q += x;
    }

    // Z, residual and ∂L/∂Z in one pass
    let mut loss = 0.0;
    let mut grad_z = DMatrix::zeros(n, n);
    let mut z_grad_z_rows = vec![0.0; n];
    let mut z_grad_z_cols = vec![0.0; n];
    let mut v_bar = 0.0;
    for j in 0..n {
        for i in 0..n {
            let z = scale * dinv[i] * q[(i, j)] * dinv[j];
            let (value, active) = if z > 1.0 { (z.ln(), true) } else { (0.0, false) };
            let resid = value - m_tk[(i, j)];
            loss += resid * resid;
            if active {
                let gz = 2.0 * resid / z;
                grad_z[(i, j)] = gz;
                let gzz = gz * z;
                z_grad_z_rows[i] += gzz;
                z_grad_z_cols[j] += gzz;
                v_bar += gzz;
            }
        }
    }
    if !loss.is_finite() {
        return Err(Error::NonFinite("PPMI loss"));
    }
    v_bar /= volume;

    // ∂Z/∂d through the outer D^{-1/2} scaling
    let mut d_bar: Vec<f64> = (0..n)
        .map(|k| -0.5 * (z_grad_z_rows[k] + z_grad_z_cols[k]) / degrees[k])
        .collect();

    let mut grad_q = scale_rows_cols(&grad_z, &dinv, &dinv);
    grad_q *= scale;

    // reverse through X_r = P·X_{r−1}; P and its powers are symmetric
    let mut x_bar = grad_q.clone();
    let mut p_bar = DMatrix::zeros(n, n);
    for r in (1..window_size).rev() {
        p_bar += &x_bar * &powers[r - 1];
        x_bar = &p * &x_bar + &grad_q;
    }
    p_bar += &x_bar;

    let mut grad = scale_rows_cols(&p_bar, &dinv, &dinv);
    for k in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            acc += p_bar[(k, j)] * p[(k, j)] + p_bar[(j, k)] * p[(j, k)];
        }
        d_bar[k] -= 0.5 * acc / degrees[k];
    }
    for j in 0..n {
        for i in 0..n {
            grad[(i, j)] += d_bar[i] + v_bar;
        }
    }
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmf::ppmi_of_adjacency;

    fn k3() -> DMatrix<f64> {
        DMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 1.0 })
    }

    #[test]
    fn zero_at_exact_target() {
        for t in [1, 3, 10] {
            let target = ppmi_of_adjacency(&k3(), t).unwrap().m;
            let (loss, grad) = ppmi_loss(&k3(), &target, t).unwrap();
            assert!(loss < 1e-28);
            assert!(grad.abs().max() < 1e-12);
        }
    }

    #[test]
    fn value_matches_forward_pipeline() {
        let adj = DMatrix::from_fn(5, 5, |i, j| if i == j { 0.0 } else { 0.1 + 0.05 * ((i + j) % 4) as f64 });
        let target = DMatrix::from_fn(5, 5, |i, j| 0.01 * (i * 5 + j) as f64);
        let m = ppmi_of_adjacency(&adj, 4).unwrap().m;
        let want: f64 = (m - &target).iter().map(|x| x * x).sum();
        let (loss, _) = ppmi_loss(&adj, &target, 4).unwrap();
        assert!((loss - want).abs() < 1e-12 * want.max(1.0));
    }

    #[test]
    fn clamp_scale_check() {
        // T=1, target 0: loss is ‖M̃_1‖², zero iff every argument ≤ 1
        let flat = DMatrix::from_fn(4, 4, |i, j| if i == j { 0.0 } else { 0.5 });
        let (loss, _) = ppmi_loss(&flat, &DMatrix::zeros(4, 4), 1).unwrap();
        let m = ppmi_of_adjacency(&flat, 1).unwrap().m;
        assert!((loss - m.iter().map(|x| x * x).sum::<f64>()).abs() < 1e-12);
        assert!(loss > 0.0);
    }

    #[test]
    fn rejects_zero_rows() {
        let adj = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(ppmi_loss(&adj, &DMatrix::zeros(3, 3), 2), Err(Error::ZeroDegree(2))));
    }
}
