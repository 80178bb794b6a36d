use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Symmetric edge logits. Only the `n(n−1)/2` strictly-upper entries are
/// free; the diagonal carries no logit and maps to a zero adjacency entry.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitMatrix {
    n: usize,
    upper: Vec<f64>,
}

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Upper-triangular pairs `(i, j)`, `i < j`, in row-major order.
pub fn upper_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
}

impl LogitMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, upper: vec![0.0; pair_count(n)] }
    }

    pub fn from_upper(n: usize, upper: Vec<f64>) -> Result<Self> {
        if upper.len() != pair_count(n) {
            return Err(Error::Shape(format!("{} logits for {n} nodes", upper.len())));
        }
        if upper.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("logits"));
        }
        Ok(Self { n, upper })
    }

    /// Reads the upper triangle of a dense matrix.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        Self::from_upper(n, upper_pairs(n).map(|(i, j)| m[(i, j)]).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }
}

#[derive(Debug, Clone)]
pub struct ShiftedLogistic {
    /// `σ(X + s)` off the diagonal, zero on it.
    pub adj: DMatrix<f64>,
    pub shift: f64,
}

pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Extra Newton steps allowed beyond the requested count while the sum has
/// not yet converged.
pub const MAX_EXTRA_ITERS: usize = 200;

/// Relative sum error below which iteration stops once the requested number
/// of steps has been taken.
const SUM_RTOL: f64 = 1e-12;

/// `σ(X + s)` with the scalar `s` chosen by Newton's method from `s = 0` so
/// that the off-diagonal entries sum to `target`.
///
/// At least `iters` steps are taken. Steps that would leave the interval
/// known to contain the root fall back to bisection (or to doubling while
/// one side is still open), and iteration continues past `iters`, up to
/// [`MAX_EXTRA_ITERS`] more, until the sum matches to a relative `1e-12`.
/// On well-scaled logits this is exactly the plain Newton recursion.
pub fn shifted_logistic(x: &LogitMatrix, target: f64, iters: usize) -> Result<ShiftedLogistic> {
    let n = x.n();
    let cells = (n * n.saturating_sub(1)) as f64;
    if !(target > 0.0 && target < cells) {
        return Err(Error::InvalidParameter(format!("target sum {target} outside (0, {cells})")));
    }
    if iters == 0 {
        return Err(Error::InvalidParameter("at least one Newton iteration is required".into()));
    }
    // each free logit fills two cells
    let sum_and_slope = |s: f64| {
        x.upper().iter().fold((0.0, 0.0), |(sum, slope), &xi| {
            let a = logistic(xi + s);
            (sum + 2.0 * a, slope + 2.0 * a * (1.0 - a))
        })
    };

    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut s = 0.0;
    for step in 0..iters + MAX_EXTRA_ITERS {
        let (sum, slope) = sum_and_slope(s);
        if step == 0 && !(slope > f64::MIN_POSITIVE) {
            return Err(Error::Saturated);
        }
        if step >= iters && (sum - target).abs() <= SUM_RTOL * target {
            break;
        }
        if sum < target {
            lo = s;
        } else {
            hi = s;
        }
        let newton = s + (target - sum) / slope;
        s = if newton.is_finite() && newton >= lo && newton <= hi {
            newton
        } else if lo.is_finite() && hi.is_finite() {
            0.5 * (lo + hi)
        } else if lo.is_finite() {
            lo + lo.abs().max(1.0)
        } else {
            hi - hi.abs().max(1.0)
        };
        if !s.is_finite() {
            return Err(Error::Saturated);
        }
    }
    let mut adj = DMatrix::zeros(n, n);
    for ((i, j), &xi) in upper_pairs(n).zip(x.upper()) {
        let a = logistic(xi + s);
        adj[(i, j)] = a;
        adj[(j, i)] = a;
    }
    Ok(ShiftedLogistic { adj, shift: s })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_logits_half_target() {
        let out = shifted_logistic(&LogitMatrix::zeros(3), 3.0, 10).unwrap();
        assert_eq!(out.shift, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(out.adj[(i, j)], if i == j { 0.0 } else { 0.5 });
            }
        }
    }

    #[test]
    fn zero_logits_ninety_percent() {
        let out = shifted_logistic(&LogitMatrix::zeros(3), 5.4, 10).unwrap();
        assert!((out.shift - 9.0f64.ln()).abs() < 1e-12);
        assert!((out.adj[(0, 1)] - 0.9).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_targets() {
        let x = LogitMatrix::zeros(3);
        assert!(shifted_logistic(&x, 0.0, 10).is_err());
        assert!(shifted_logistic(&x, 6.0, 10).is_err());
        assert!(shifted_logistic(&x, 3.0, 0).is_err());
    }

    #[test]
    fn saturated_logits_error() {
        let x = LogitMatrix::from_upper(3, vec![1e6, 1e6, 1e6]).unwrap();
        assert!(matches!(shifted_logistic(&x, 3.0, 10), Err(Error::Saturated)));
    }

    #[test]
    fn far_shift_still_converges() {
        // plain Newton from s = 0 stalls on the saturated side here
        let mut upper = vec![60.0; 40];
        upper.extend(vec![-60.0; 5]);
        let x = LogitMatrix::from_upper(10, upper).unwrap();
        let out = shifted_logistic(&x, 10.0, 10).unwrap();
        assert!((out.adj.sum() - 10.0).abs() <= 1e-9);
    }

    #[test]
    fn logistic_is_stable() {
        assert_eq!(logistic(-1000.0), 0.0);
        assert_eq!(logistic(1000.0), 1.0);
        assert!((logistic(0.0) - 0.5).abs() < 1e-16);
    }
}
