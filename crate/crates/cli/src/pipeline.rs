use nalgebra::{DMatrix, DVector};
use netmf_inversion::graph::{binarize_sample, binarize_topk};
use netmf_inversion::invert_analytical::{
    approx_limiting_from_ppmi, deepwalk_backwards_analytical, invert_limiting, recover_degrees,
    AnalyticalInversionInput,
};
use netmf_inversion::invert_opt::{deepwalk_backwards_opt, OptConfig, OptimizationReport};
use netmf_inversion::metrics::rel_frobenius;
use netmf_inversion::netmf::{low_rank_approx, ppmi};
use netmf_inversion::{Error, Graph, LowRankPpmi};
use serde::{Deserialize, Serialize};

use crate::cli::DegreeSource;
use crate::error::{usage, CliError, CliResult};

pub const DEFAULT_WINDOW: usize = 10;
pub const DEFAULT_MAX_ITERS: usize = 500;
pub const DEFAULT_FRACTIONS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Powers of two from 16 to 2048, capped at `n`, without duplicates.
pub fn default_ranks(n: usize) -> Vec<usize> {
    let mut ranks: Vec<usize> = (4..=11).map(|p| (1usize << p).min(n)).collect();
    ranks.dedup();
    ranks
}

pub fn check_window(window: usize) -> CliResult<()> {
    if window == 0 {
        return Err(usage("--T must be at least 1"));
    }
    Ok(())
}

pub fn check_ranks(ranks: &[usize], n: usize) -> CliResult<()> {
    if ranks.is_empty() {
        return Err(usage("the rank list is empty"));
    }
    if let Some(&k) = ranks.iter().find(|&&k| k == 0 || k > n) {
        return Err(usage(format!("rank {k} is outside 1..={n} (n = nodes in the largest component)")));
    }
    Ok(())
}

pub fn check_fractions(fractions: &[f64]) -> CliResult<()> {
    if let Some(f) = fractions.iter().find(|&&f| !(f > 0.0 && f < 1.0)) {
        return Err(usage(format!("training fraction {f} is outside (0, 1)")));
    }
    Ok(())
}

/// Degrees for the analytical method. Recovered degrees fall back to the
/// least-squares solution when the system is not uniquely solvable but that
/// solution is still positive.
pub fn analytical_degrees(
    m_tk: &DMatrix<f64>,
    window: usize,
    volume: f64,
    true_degrees: Option<&DVector<f64>>,
    source: DegreeSource,
) -> CliResult<DVector<f64>> {
    match source {
        DegreeSource::True => true_degrees
            .cloned()
            .ok_or_else(|| usage("--degrees true needs the original graph or --degrees-file")),
        DegreeSource::Recovered => {
            let m_inf = approx_limiting_from_ppmi(m_tk, window)?;
            match recover_degrees(&m_inf, volume) {
                Ok(d) => Ok(d),
                Err(Error::DegreeRecovery { degrees, residual, rank, n }) if degrees.iter().all(|&d| d > 0.0) => {
                    log::warn!(
                        "degree system not uniquely solvable (rank {rank} of {n}, residual {residual:.3e}); \
                         using the least-squares degrees"
                    );
                    Ok(DVector::from_vec(degrees))
                }
                Err(Error::DegreeRecovery { rank, n, .. }) => Err(CliError::Compute(anyhow::anyhow!(
                    "degree recovery failed: system rank {rank} of {n} and the least-squares degrees are not all positive"
                ))),
                Err(e) => Err(e.into()),
            }
        }
    }
}

pub fn run_analytical(m_tk: &DMatrix<f64>, window: usize, degrees: &DVector<f64>, volume: f64) -> CliResult<DMatrix<f64>> {
    let weighted = match AnalyticalInversionInput::new(m_tk.clone(), window, degrees.clone(), volume) {
        Ok(input) => deepwalk_backwards_analytical(&input)?,
        // recovered degrees need not sum to the volume exactly
        Err(Error::InvalidParameter(_)) => invert_limiting(&approx_limiting_from_ppmi(m_tk, window)?, degrees, volume)?,
        Err(e) => return Err(e.into()),
    };
    Ok(weighted)
}

pub fn run_opt(m_tk: &DMatrix<f64>, window: usize, volume: f64, max_iters: usize) -> CliResult<OptimizationReport> {
    if max_iters == 0 {
        return Err(usage("--max-iters must be at least 1"));
    }
    Ok(deepwalk_backwards_opt(m_tk, window, volume, &OptConfig::with_max_iters(max_iters))?)
}

/// Leading `k` eigenpairs of a factorization, which equal its rank-`k` truncation.
pub fn truncate(lr: &LowRankPpmi, k: usize) -> LowRankPpmi {
    LowRankPpmi {
        eigvecs: lr.eigvecs.columns(0, k).into_owned(),
        eigvals: lr.eigvals.rows(0, k).into_owned(),
        window_size: lr.window_size,
    }
}

/// Nearest even integer volume, as needed for top-k binarization.
pub fn even_volume(volume: f64) -> usize {
    2 * (volume / 2.0).round().max(0.0) as usize
}

pub fn binarize_analytical(weighted: &DMatrix<f64>, volume: f64) -> CliResult<Graph> {
    let clean = Graph::from_weighted_lossy(weighted)?;
    Ok(binarize_topk(clean.adjacency(), even_volume(volume))?)
}

pub fn binarize_opt(weighted: &DMatrix<f64>, seed: u64) -> CliResult<Graph> {
    let clean = Graph::from_weighted_lossy(weighted)?;
    Ok(binarize_sample(clean.adjacency(), seed)?)
}

/// Summary numbers of one reconstruction, shared by `invert` and `sweep`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReconSummary {
    /// `‖A − Ã‖_F / ‖A‖_F` of the weighted reconstruction, diagonal dropped.
    pub rel_frob_weighted: Option<f64>,
    /// Relative Frobenius error between the rank-k PPMI input and the rank-k
    /// PPMI matrix of the weighted reconstruction.
    pub ppmi_rel_error: Option<f64>,
    pub volume_true: f64,
    pub volume_recon: f64,
    pub opt_iterations: Option<usize>,
    pub opt_converged: Option<bool>,
    pub opt_termination: Option<String>,
    pub opt_final_loss: Option<f64>,
}

pub fn summarize(
    true_adj: Option<&DMatrix<f64>>,
    m_tk: &DMatrix<f64>,
    weighted: &DMatrix<f64>,
    window: usize,
    rank: usize,
    volume: f64,
) -> CliResult<ReconSummary> {
    let clean = Graph::from_weighted_lossy(weighted)?;
    let ppmi_rel_error = ppmi(&clean, window)
        .and_then(|p| low_rank_approx(&p, rank))
        .and_then(|lr| rel_frobenius(m_tk, &lr.reconstruct()))
        .map_err(|e| log::warn!("rank-{rank} PPMI error of the reconstruction is undefined: {e}"))
        .ok();
    Ok(ReconSummary {
        rel_frob_weighted: true_adj.and_then(|a| rel_frobenius(a, clean.adjacency()).ok()),
        ppmi_rel_error,
        volume_true: volume,
        volume_recon: clean.volume(),
        ..ReconSummary::default()
    })
}

pub fn with_opt(mut s: ReconSummary, report: &OptimizationReport) -> ReconSummary {
    s.opt_iterations = Some(report.iterations_used);
    s.opt_converged = Some(report.converged);
    s.opt_termination = Some(format!("{:?}", report.termination));
    s.opt_final_loss = Some(report.final_loss);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_ranks_cap_and_dedup() {
        assert_eq!(default_ranks(5000), vec![16, 32, 64, 128, 256, 512, 1024, 2048]);
        assert_eq!(default_ranks(100), vec![16, 32, 64, 100]);
        assert_eq!(default_ranks(10), vec![10]);
    }

    #[test]
    fn rank_checks() {
        assert!(check_ranks(&[], 10).is_err());
        assert!(check_ranks(&[0], 10).is_err());
        assert!(check_ranks(&[11], 10).is_err());
        assert!(check_ranks(&[1, 10], 10).is_ok());
    }

    #[test]
    fn even_volume_rounds() {
        assert_eq!(even_volume(10.0), 10);
        assert_eq!(even_volume(10.9), 10);
        assert_eq!(even_volume(11.2), 12);
    }
}
