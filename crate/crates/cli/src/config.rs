use std::path::{Path, PathBuf};

use netmf_inversion::metrics::MetricSelection;
use netmf_inversion::SbmConfig;
use serde::{Deserialize, Serialize};

use crate::cli::{DegreeSource, MethodSel, SweepArgs};
use crate::commands::{read_sbm_config, selection};
use crate::error::{usage, CliError, CliResult};
use crate::io;

/// Sweep configuration file. Every field is optional and overridden by the
/// matching flag. Relative paths are taken from the file's directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: Option<PathBuf>,
    pub sbm: Option<SbmConfig>,
    pub labels: Option<PathBuf>,
    #[serde(rename = "T", alias = "window_size")]
    pub window_size: Option<usize>,
    pub ranks: Option<Vec<usize>>,
    pub method: Option<MethodSel>,
    pub degrees: Option<DegreeSource>,
    pub max_iters: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub fractions: Option<Vec<f64>>,
    pub repeats: Option<usize>,
    pub top_communities: Option<usize>,
    pub metrics: Option<MetricSelection>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = io::read_text(path).map_err(CliError::Usage)?;
        let mut cfg: Self = serde_json::from_str(&text)
            .map_err(|e| usage(format!("parsing config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.graph, &mut cfg.labels, &mut cfg.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn apply_flags(mut self, args: &SweepArgs) -> CliResult<Self> {
        if let Some(g) = &args.input.graph {
            self.graph = Some(g.clone());
            self.sbm = None;
        }
        if let Some(path) = &args.input.sbm {
            self.sbm = Some(read_sbm_config(path)?);
            self.graph = None;
        }
        macro_rules! set {
            ($($field:ident <- $flag:expr),* $(,)?) => {
                $(if let Some(v) = &$flag { self.$field = Some(v.clone()); })*
            };
        }
        set!(
            labels <- args.input.labels,
            window_size <- args.window,
            ranks <- args.ranks,
            method <- args.method,
            degrees <- args.degrees,
            max_iters <- args.max_iters,
            seed <- args.seed,
            out <- args.out,
            workers <- args.workers,
            fractions <- args.fractions,
            repeats <- args.repeats,
            top_communities <- args.switches.top_communities,
        );
        self.metrics = Some(selection(&args.switches, self.metrics.unwrap_or_default()));
        Ok(self)
    }
}

/// The settings a sweep's results depend on, stored in the output directory
/// to detect reruns with a different configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub graph: Option<PathBuf>,
    pub sbm: Option<SbmConfig>,
    pub labels: Option<PathBuf>,
    #[serde(rename = "T")]
    pub window_size: usize,
    pub ranks: Vec<usize>,
    pub method: MethodSel,
    pub degrees: DegreeSource,
    pub max_iters: usize,
    pub seed: u64,
    pub fractions: Vec<f64>,
    pub repeats: usize,
    pub top_communities: usize,
    pub metrics: MetricSelection,
}

pub fn absolute(path: &Path) -> CliResult<PathBuf> {
    std::fs::canonicalize(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}
