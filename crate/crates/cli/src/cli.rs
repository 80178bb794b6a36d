use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub const EMBED_FILES: &str = "\
Output files (in --out):
  nodes.txt             original node id of each embedding row, one per line
  graph.txt             largest connected component as an edge list `u v`
  labels.txt            labels of the component nodes (when labels are known)
  embedding_k{k}.csv    header dim_0,...,dim_{k-1}; one row per node in nodes.txt order
  signs_k{k}.txt        sign (+1/-1) of each eigenvalue, one per line
  eigenvalues_k{k}.txt  retained eigenvalues by descending magnitude, one per line
The rank-k PPMI matrix equals E·diag(signs)·Eᵀ.";

pub const INVERT_FILES: &str = "\
Output files (in --out), per method m in {analytical, opt}:
  {m}_weighted.txt      weighted edge list `u v w` of the reconstruction (diagonal dropped)
  {m}_binarized.txt     binary edge list `u v`; analytical keeps the v_G/2 heaviest pairs,
                        opt samples each pair as a Bernoulli trial with --seed
  opt_loss_trace.csv    iteration,loss,grad_norm (iteration 0 is the starting point)
  invert_summary.json   per method: volume, degree source, iterations, termination,
                        final loss and the rank-k PPMI relative error of the reconstruction";

pub const METRICS_FILES: &str = "\
Output files (in --out):
  metrics.csv   header method,rank,rel_frob_adj,triangles_true,triangles_recon,
                triangles_rel_error,apl_true,apl_recon,apl_rel_error, then for each
                community slot c: comm{c}_label,comm{c}_size,comm{c}_phi_true,
                comm{c}_phi_recon,comm{c}_phi_rel_error. Undefined values are empty.
  metrics.json  the same report as a JSON object
Relative errors are signed (recon − true) / true.";

pub const CLASSIFY_FILES: &str = "\
Output files (in --out):
  classification.csv          train_fraction,repeat,micro_f1 (one row per split)
  classification_summary.csv  train_fraction,repeats,mean_micro_f1";

pub const SBM_FILES: &str = "\
Output files (in --out):
  graph.txt   edge list `u v` over node ids 0..n-1 (isolated nodes do not appear)
  labels.txt  `node cluster` per line
  sbm.json    the generator configuration";

pub const SWEEP_FILES: &str = "\
Output files (in --out):
  config.json          resolved configuration; a rerun with a different one is refused
  graph.txt, labels.txt  the largest connected component that was swept
  sweep.csv            one row per (rank, method), ordered by rank then method
                       (analytical, opt, true). Columns: the metrics.csv columns, then
                       rel_frob_weighted,ppmi_rel_error,volume_true,volume_recon,
                       opt_iterations,opt_converged,opt_final_loss, then
                       micro_f1@{f} for each training fraction f
  classification.csv   rank,method,train_fraction,repeat,micro_f1
  cells/k{k}_{method}/ per-cell outputs (result.json written last marks completion,
                       weighted/binarized edge lists, opt loss_trace.csv)
Rows with method `true` hold the classification baseline on the original graph.
Completed cells are skipped on rerun; sweep.csv is rebuilt from cell files.";

#[derive(Debug, Parser)]
#[command(
    name = "netmf-invert",
    version,
    about = "Compute NetMF embeddings, invert them back to graphs and measure what survives"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Embed the largest connected component of a graph at one or more ranks
    #[command(after_long_help = EMBED_FILES)]
    Embed(EmbedArgs),
    /// Reconstruct a graph from a rank-k PPMI matrix or an embedding
    #[command(after_long_help = INVERT_FILES)]
    Invert(InvertArgs),
    /// Compare a binarized reconstruction with the original graph
    #[command(after_long_help = METRICS_FILES)]
    Metrics(MetricsArgs),
    /// Multi-label node classification on embedding vectors
    #[command(after_long_help = CLASSIFY_FILES)]
    Classify(ClassifyArgs),
    /// Sample a stochastic block model graph with its cluster labels
    #[command(name = "sbm-gen", after_long_help = SBM_FILES)]
    SbmGen(SbmGenArgs),
    /// Embed, invert and evaluate over a list of ranks
    #[command(after_long_help = SWEEP_FILES)]
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodSel {
    Analytical,
    #[value(alias = "optimization")]
    #[serde(alias = "optimization")]
    Opt,
    Both,
}

impl MethodSel {
    pub fn analytical(self) -> bool {
        matches!(self, MethodSel::Analytical | MethodSel::Both)
    }

    pub fn opt(self) -> bool {
        matches!(self, MethodSel::Opt | MethodSel::Both)
    }
}

/// Degrees fed to the analytical inversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum DegreeSource {
    /// Degrees of the original graph
    #[value(name = "true")]
    #[serde(rename = "true")]
    True,
    /// Degrees solved from the approximate limiting PMI matrix
    #[value(name = "recovered")]
    #[serde(rename = "recovered")]
    Recovered,
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// Edge list: `u v` or `u v w` per line, `#` comments
    #[arg(long, value_name = "PATH", conflicts_with = "sbm")]
    pub graph: Option<PathBuf>,
    /// JSON SBM config {n, num_clusters, p_in, p_out, seed}
    #[arg(long, value_name = "CFG.json")]
    pub sbm: Option<PathBuf>,
    /// Label file: `node label[,label...]` per line
    #[arg(long, value_name = "PATH")]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub input: GraphArgs,
    /// Window size
    #[arg(long = "T", short = 'T', value_name = "INT", default_value_t = 10)]
    pub window: usize,
    /// Ranks [default: 16,32,...,2048 capped at n]
    #[arg(long, value_name = "k1,k2,...", value_delimiter = ',')]
    pub ranks: Option<Vec<usize>>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    /// Original graph; supplies the PPMI target (with --rank), degrees and volume
    #[command(flatten)]
    pub input: GraphArgs,
    /// Embedding CSV written by `embed`; used instead of embedding the graph
    #[arg(long, value_name = "PATH", requires = "signs")]
    pub embedding: Option<PathBuf>,
    /// Eigenvalue sign file matching --embedding
    #[arg(long, value_name = "PATH")]
    pub signs: Option<PathBuf>,
    /// Node id file matching the embedding rows
    #[arg(long, value_name = "PATH")]
    pub nodes: Option<PathBuf>,
    /// Graph volume v_G (sum of degrees); defaults to the graph's
    #[arg(long, value_name = "FLOAT")]
    pub volume: Option<f64>,
    /// Node degrees in embedding row order, one per line
    #[arg(long, value_name = "PATH")]
    pub degrees_file: Option<PathBuf>,
    /// Rank used when embedding --graph/--sbm
    #[arg(long, value_name = "INT")]
    pub rank: Option<usize>,
    #[arg(long = "T", short = 'T', value_name = "INT", default_value_t = 10)]
    pub window: usize,
    #[arg(long, value_enum, default_value_t = MethodSel::Both)]
    pub method: MethodSel,
    /// Degree source for the analytical method
    #[arg(long, value_enum, default_value_t = DegreeSource::True)]
    pub degrees: DegreeSource,
    #[arg(long, value_name = "INT", default_value_t = 500)]
    pub max_iters: usize,
    /// Seed for Bernoulli binarization
    #[arg(long, value_name = "INT", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MetricSwitches {
    /// Number of most populous communities reported
    #[arg(long, value_name = "INT")]
    pub top_communities: Option<usize>,
    /// Skip triangle counts
    #[arg(long)]
    pub no_triangles: bool,
    /// Skip average path lengths
    #[arg(long)]
    pub no_path_length: bool,
    /// Skip community conductance
    #[arg(long)]
    pub no_conductance: bool,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Original graph and labels
    #[command(flatten)]
    pub input: GraphArgs,
    /// Binarized reconstruction edge list over the same node ids
    #[arg(long, value_name = "PATH")]
    pub recon: PathBuf,
    /// Method tag written to the report
    #[arg(long, default_value = "recon")]
    pub name: String,
    /// Rank tag written to the report
    #[arg(long, value_name = "INT")]
    pub rank: Option<usize>,
    #[command(flatten)]
    pub switches: MetricSwitches,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Graph to embed when no --embedding is given; --labels is required either way
    #[command(flatten)]
    pub input: GraphArgs,
    /// Embedding CSV written by `embed`
    #[arg(long, value_name = "PATH")]
    pub embedding: Option<PathBuf>,
    /// Node id file matching the embedding rows [default: 0..n-1]
    #[arg(long, value_name = "PATH")]
    pub nodes: Option<PathBuf>,
    /// Rank used when embedding --graph/--sbm
    #[arg(long, value_name = "INT")]
    pub rank: Option<usize>,
    #[arg(long = "T", short = 'T', value_name = "INT", default_value_t = 10)]
    pub window: usize,
    /// Training fractions [default: 0.1,0.2,...,0.9]
    #[arg(long, value_name = "f1,f2,...", value_delimiter = ',')]
    pub fractions: Option<Vec<f64>>,
    #[arg(long, value_name = "INT", default_value_t = 10)]
    pub repeats: usize,
    /// Seed for the train/test splits
    #[arg(long, value_name = "INT", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SbmGenArgs {
    /// Base JSON config; the flags below override its fields
    #[arg(long, value_name = "CFG.json")]
    pub sbm: Option<PathBuf>,
    #[arg(long, value_name = "INT")]
    pub n: Option<usize>,
    #[arg(long, value_name = "INT")]
    pub clusters: Option<usize>,
    #[arg(long, value_name = "FLOAT")]
    pub p_in: Option<f64>,
    #[arg(long, value_name = "FLOAT")]
    pub p_out: Option<f64>,
    #[arg(long, value_name = "INT")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSON experiment config; flags override its fields
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub input: GraphArgs,
    #[arg(long = "T", short = 'T', value_name = "INT")]
    pub window: Option<usize>,
    /// Ranks [default: 16,32,...,2048 capped at n]
    #[arg(long, value_name = "k1,k2,...", value_delimiter = ',')]
    pub ranks: Option<Vec<usize>>,
    /// [default: both]
    #[arg(long, value_enum)]
    pub method: Option<MethodSel>,
    /// [default: true]
    #[arg(long, value_enum)]
    pub degrees: Option<DegreeSource>,
    /// [default: 500]
    #[arg(long, value_name = "INT")]
    pub max_iters: Option<usize>,
    /// Seed for binarization and classification splits [default: 0]
    #[arg(long, value_name = "INT")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads [default: available parallelism]
    #[arg(long, value_name = "INT")]
    pub workers: Option<usize>,
    /// Training fractions; classification runs only when set and labels exist
    #[arg(long, value_name = "f1,f2,...", value_delimiter = ',')]
    pub fractions: Option<Vec<f64>>,
    /// [default: 10]
    #[arg(long, value_name = "INT")]
    pub repeats: Option<usize>,
    #[command(flatten)]
    pub switches: MetricSwitches,
}
