//! Gradient-based inversion: find edge logits whose shifted-logistic
//! adjacency has a PPMI matrix close to the given rank-`k` target.
//!
//! The adjacency is parameterized as `Ã = σ(X + s(X))` over the upper
//! triangle, where the shift `s` pins the total weight to `v_G`. Gradients
//! flow through the loss, the logistic, and the shift; the latter by
//! implicit differentiation of `Σσ(X + s) = v_G`, which gives
//! `∂s/∂X_ij = −σ′_ij / Σσ′` per cell.

pub mod lbfgs;
pub mod loss;
pub mod shifted_logistic;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use lbfgs::{LbfgsConfig, Termination};
pub use loss::ppmi_loss;
pub use shifted_logistic::{pair_count, shifted_logistic, upper_pairs, LogitMatrix, ShiftedLogistic};

/// Newton iterations used by the shifted logistic inside the optimizer.
pub const NEWTON_ITERS: usize = 10;

/// Largest fill fraction of the `n(n−1)` off-diagonal cells the shifted
/// logistic is asked to reach; a complete graph's volume is only attained
/// in the limit `s → ∞`.
pub const MAX_FILL: f64 = 1.0 - 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptConfig {
    pub lbfgs: LbfgsConfig,
    pub newton_iters: usize,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self { lbfgs: LbfgsConfig::default(), newton_iters: NEWTON_ITERS }
    }
}

impl OptConfig {
    pub fn with_max_iters(max_iters: usize) -> Self {
        let mut cfg = Self::default();
        cfg.lbfgs.max_iters = max_iters;
        cfg
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LossTracePoint {
    pub iteration: usize,
    pub loss: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone)]
pub struct OptimizationReport {
    /// `σ_{v_G}(X_final)`: symmetric, zero diagonal, entries in (0, 1).
    pub adj_weighted: DMatrix<f64>,
    pub logits: LogitMatrix,
    pub loss_trace: Vec<LossTracePoint>,
    pub iterations_used: usize,
    pub converged: bool,
    pub termination: Termination,
    pub final_loss: f64,
    pub final_gradient_norm: f64,
}

/// Loss and logit gradient at one point.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub loss: f64,
    pub grad: Vec<f64>,
    pub adj: DMatrix<f64>,
    pub shift: f64,
}

/// The composed objective `X ↦ ‖PPMI(σ_v(X)) − M_{T,k}‖²_F`.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    pub m_tk: &'a DMatrix<f64>,
    pub window_size: usize,
    pub volume: f64,
    pub newton_iters: usize,
}

impl Objective<'_> {
    pub fn evaluate(&self, x: &LogitMatrix) -> Result<Evaluation> {
        let n = x.n();
        let sl = shifted_logistic(x, self.volume, self.newton_iters)?;
        let (loss, grad_adj) = ppmi_loss(&sl.adj, self.m_tk, self.window_size)?;

        // per free logit: a = σ′, g = ∂L/∂Ã_ij + ∂L/∂Ã_ji
        let mut slopes = Vec::with_capacity(pair_count(n));
        let mut pair_grads = Vec::with_capacity(pair_count(n));
        let (mut weighted, mut total_slope) = (0.0, 0.0);
        for (i, j) in upper_pairs(n) {
            let a = sl.adj[(i, j)];
            let slope = a * (1.0 - a);
            let g = grad_adj[(i, j)] + grad_adj[(j, i)];
            weighted += slope * g;
            total_slope += slope;
            slopes.push(slope);
            pair_grads.push(g);
        }
        let mean = if total_slope > 0.0 { weighted / total_slope } else { 0.0 };
        let grad = slopes.iter().zip(&pair_grads).map(|(a, g)| a * (g - mean)).collect();
        Ok(Evaluation { loss, grad, adj: sl.adj, shift: sl.shift })
    }
}

fn validate(m_tk: &DMatrix<f64>, window_size: usize, volume: f64) -> Result<()> {
    let n = m_tk.nrows();
    if m_tk.ncols() != n {
        return Err(Error::Shape(format!("target is {}x{}", n, m_tk.ncols())));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two nodes".into()));
    }
    if window_size == 0 {
        return Err(Error::InvalidParameter("window size T must be at least 1".into()));
    }
    if m_tk.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("target PPMI"));
    }
    let cells = (n * (n - 1)) as f64;
    if !(volume > 0.0 && volume <= cells) {
        return Err(Error::InvalidParameter(format!("volume {volume} outside (0, {cells}]")));
    }
    Ok(())
}

/// Minimizes the squared PPMI error over edge logits with L-BFGS, starting
/// from `X = 0`. Volumes above [`MAX_FILL`] of the off-diagonal capacity are
/// capped there. A line-search failure ends the run early with
/// `converged = false`; it is not an error.
pub fn deepwalk_backwards_opt(
    m_tk: &DMatrix<f64>,
    window_size: usize,
    volume: f64,
    cfg: &OptConfig,
) -> Result<OptimizationReport> {
    validate(m_tk, window_size, volume)?;
    if cfg.lbfgs.max_iters == 0 {
        return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
    }
    let n = m_tk.nrows();
    let volume = volume.min(MAX_FILL * (n * (n - 1)) as f64);
    let objective = Objective { m_tk, window_size, volume, newton_iters: cfg.newton_iters };
    // fail loudly if the starting point itself cannot be evaluated
    objective.evaluate(&LogitMatrix::zeros(n))?;

    let result = lbfgs::minimize(
        |upper: &[f64]| {
            let x = match LogitMatrix::from_upper(n, upper.to_vec()) {
                Ok(x) => x,
                Err(_) => return (f64::INFINITY, vec![0.0; upper.len()]),
            };
            match objective.evaluate(&x) {
                Ok(ev) => (ev.loss, ev.grad),
                Err(_) => (f64::INFINITY, vec![0.0; upper.len()]),
            }
        },
        vec![0.0; pair_count(n)],
        &cfg.lbfgs,
    );

    let logits = LogitMatrix::from_upper(n, result.x.clone())?;
    let final_eval = objective.evaluate(&logits)?;
    let loss_trace = result
        .trace
        .iter()
        .enumerate()
        .map(|(iteration, p)| LossTracePoint { iteration, loss: p.f, grad_norm: p.grad_norm })
        .collect();
    Ok(OptimizationReport {
        adj_weighted: final_eval.adj,
        logits,
        loss_trace,
        iterations_used: result.iterations,
        converged: result.converged(),
        termination: result.termination,
        final_loss: result.f,
        final_gradient_norm: lbfgs::inf_norm(&result.grad),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::netmf::ppmi;

    #[test]
    fn k3_recovers_complete_graph() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let target = ppmi(&g, 1).unwrap().m;
        let report = deepwalk_backwards_opt(&target, 1, 6.0, &OptConfig::default()).unwrap();
        assert!(report.final_loss <= 1e-6, "loss {}", report.final_loss);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(report.adj_weighted[(i, j)] >= 0.99);
                }
            }
        }
    }

    #[test]
    fn single_iteration_cap() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)]).unwrap();
        let target = ppmi(&g, 3).unwrap().m;
        let report = deepwalk_backwards_opt(&target, 3, g.volume(), &OptConfig::with_max_iters(1)).unwrap();
        assert!(report.iterations_used <= 1);
        assert!(report.loss_trace.len() <= 2);
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = DMatrix::zeros(4, 4);
        assert!(deepwalk_backwards_opt(&m, 0, 4.0, &OptConfig::default()).is_err());
        assert!(deepwalk_backwards_opt(&m, 2, 12.5, &OptConfig::default()).is_err());
        assert!(deepwalk_backwards_opt(&m, 2, 4.0, &OptConfig::with_max_iters(0)).is_err());
    }
}
