//! Dense symmetric helpers shared by the forward and inverse pipelines.

use nalgebra::{DMatrix, DVector};

/// Relative cutoff below which eigenvalues count as zero in pseudoinverses.
pub const PINV_RELATIVE_TOL: f64 = 1e-10;

/// Replaces `m` by `(m + mᵀ) / 2`.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// `diag(left) · m · diag(right)`.
pub fn scale_rows_cols(m: &DMatrix<f64>, left: &DVector<f64>, right: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| left[i] * m[(i, j)] * right[j])
}

/// Full symmetric eigendecomposition, eigenpairs sorted by descending
/// magnitude with ties broken towards the larger signed value.
pub fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (la, lb) = (eig.eigenvalues[a], eig.eigenvalues[b]);
        lb.abs()
            .total_cmp(&la.abs())
            .then_with(|| lb.total_cmp(&la))
            .then_with(|| a.cmp(&b))
    });
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Moore–Penrose pseudoinverse of a symmetric matrix. Eigenvalues with
/// `|λ| < PINV_RELATIVE_TOL · max|λ|` are treated as zero.
pub fn pinv_symmetric(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut sym = m.clone();
    symmetrize(&mut sym);
    let eig = sym.symmetric_eigen();
    let max_abs = eig.eigenvalues.iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
    let cutoff = PINV_RELATIVE_TOL * max_abs;
    let inv = eig
        .eigenvalues
        .map(|l| if l.abs() > cutoff && l.abs() > 0.0 { 1.0 / l } else { 0.0 });
    let v = &eig.eigenvectors;
    let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * inv[j]);
    let mut out = scaled * v.transpose();
    symmetrize(&mut out);
    out
}

/// Minimum-norm least-squares solution of `m x = b` with the numerical rank
/// used for it (singular values below `rel_tol · σ_max` dropped).
pub fn lstsq(m: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> (DVector<f64>, usize) {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |acc, s| acc.max(*s));
    let cutoff = rel_tol * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff && s > 0.0).count();
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let utb = u.transpose() * b;
    let scaled = DVector::from_iterator(
        utb.len(),
        utb.iter()
            .zip(svd.singular_values.iter())
            .map(|(c, &s)| if s > cutoff && s > 0.0 { c / s } else { 0.0 }),
    );
    (v_t.transpose() * scaled, rank)
}

pub fn frobenius_sq(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinv_of_singular_projector_is_itself() {
        // I - J/3 is an orthogonal projector of rank 2.
        let p = DMatrix::from_fn(3, 3, |i, j| if i == j { 2.0 / 3.0 } else { -1.0 / 3.0 });
        let pi = pinv_symmetric(&p);
        assert!((pi - &p).abs().max() < 1e-12);
    }

    #[test]
    fn eigen_order_by_magnitude_then_sign() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -2.0, 2.0, 3.0]));
        let (vals, _) = sorted_symmetric_eigen(&m);
        assert_eq!(vals.as_slice(), &[3.0, 2.0, -2.0, 1.0]);
    }

    #[test]
    fn lstsq_reports_rank() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![2.0, 2.0]);
        let (x, rank) = lstsq(&m, &b, 1e-10);
        assert_eq!(rank, 1);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }
}
