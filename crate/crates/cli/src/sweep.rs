use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use nalgebra::DMatrix;
use netmf_inversion::classify::{classification_experiment, ClassificationResult};
use netmf_inversion::metrics::{compare_selected, MetricsReport, DEFAULT_TOP_COMMUNITIES};
use netmf_inversion::netmf::{embedding_from_lowrank, low_rank_approx, netmf_embedding, ppmi};
use netmf_inversion::{Graph, LowRankPpmi, NodeLabels};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cli::SweepArgs;
use crate::commands::labels_or_empty;
use crate::config::{absolute, ExperimentConfig, ResolvedConfig};
use crate::error::{usage, CliError, CliResult};
use crate::io::{self, GraphSource, Input};
use crate::pipeline::{self, ReconSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CellKind {
    Analytical,
    Opt,
    /// Classification baseline on the original graph.
    True,
}

impl CellKind {
    fn name(self) -> &'static str {
        match self {
            CellKind::Analytical => "analytical",
            CellKind::Opt => "opt",
            CellKind::True => "true",
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    rank: usize,
    kind: CellKind,
}

impl Cell {
    fn dir(&self, out: &Path) -> PathBuf {
        out.join("cells").join(format!("k{}_{}", self.rank, self.kind.name()))
    }
}

/// Contents of a cell's `result.json`; its presence marks the cell complete.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CellResult {
    rank: usize,
    method: String,
    metrics: Option<MetricsReport>,
    summary: Option<ReconSummary>,
    classification: Vec<ClassificationResult>,
}

/// Immutable inputs shared by all cells.
struct Shared<'a> {
    cfg: &'a ResolvedConfig,
    out: &'a Path,
    graph: &'a Graph,
    labels: Option<&'a NodeLabels>,
    lowrank: &'a LowRankPpmi,
}

pub fn sweep(args: SweepArgs) -> CliResult<()> {
    let base = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    let cfg = base.apply_flags(&args)?;
    let out = cfg.out.clone().ok_or_else(|| usage("--out is required (flag or config)"))?;
    let window = cfg.window_size.unwrap_or(pipeline::DEFAULT_WINDOW);
    pipeline::check_window(window)?;
    if cfg.ranks.as_ref().is_some_and(Vec::is_empty) {
        return Err(usage("the rank list is empty"));
    }
    let fractions = cfg.fractions.clone().unwrap_or_default();
    pipeline::check_fractions(&fractions)?;
    let repeats = cfg.repeats.unwrap_or(netmf_inversion::classify::DEFAULT_REPEATS);
    if repeats == 0 {
        return Err(usage("repeats must be at least 1"));
    }
    let max_iters = cfg.max_iters.unwrap_or(pipeline::DEFAULT_MAX_ITERS);
    if max_iters == 0 {
        return Err(usage("max iterations must be at least 1"));
    }
    let workers = match cfg.workers {
        Some(0) => return Err(usage("workers must be at least 1")),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };

    let (source, graph_path) = match (&cfg.graph, &cfg.sbm) {
        (Some(path), None) => (GraphSource::File(path.clone()), Some(absolute(path)?)),
        (None, Some(sbm)) => {
            sbm.validate().map_err(usage)?;
            (GraphSource::Sbm(*sbm), None)
        }
        (None, None) => return Err(usage("an input graph is required: --graph, --sbm or the config")),
        (Some(_), Some(_)) => return Err(usage("the config names both a graph file and an SBM")),
    };
    let labels_path = cfg.labels.as_deref().map(absolute).transpose()?;
    let input = io::load_input(&source, labels_path.as_deref())?;
    let n = input.graph.n();

    let mut ranks = cfg.ranks.clone().unwrap_or_else(|| pipeline::default_ranks(n));
    ranks.sort_unstable();
    ranks.dedup();
    pipeline::check_ranks(&ranks, n)?;

    let resolved = ResolvedConfig {
        graph: graph_path,
        sbm: cfg.sbm,
        labels: labels_path,
        window_size: window,
        ranks,
        method: cfg.method.unwrap_or(crate::cli::MethodSel::Both),
        degrees: cfg.degrees.unwrap_or(crate::cli::DegreeSource::True),
        max_iters,
        seed: cfg.seed.unwrap_or(0),
        fractions,
        repeats,
        top_communities: cfg.top_communities.unwrap_or(DEFAULT_TOP_COMMUNITIES),
        metrics: cfg.metrics.unwrap_or_default(),
    };
    if !resolved.fractions.is_empty() && input.labels.is_none() {
        return Err(usage("classification fractions were given but the input has no labels"));
    }
    prepare_out(&out, &resolved, &input)?;

    let cells = cells(&resolved);
    let pending: Vec<Cell> = cells.iter().copied().filter(|c| !c.dir(&out).join("result.json").exists()).collect();
    log::info!("{} of {} cells to compute with {workers} workers", pending.len(), cells.len());
    if !pending.is_empty() {
        let kmax = *resolved.ranks.last().unwrap();
        log::info!("PPMI of {n} nodes, T = {window}, rank {kmax}");
        let lowrank = low_rank_approx(&ppmi(&input.graph, window)?, kmax)?;
        let ctx = Shared {
            cfg: &resolved,
            out: &out,
            graph: &input.graph,
            labels: input.labels.as_ref(),
            lowrank: &lowrank,
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .context("starting the worker pool")?;
        let results: Vec<CliResult<()>> = pool.install(|| pending.par_iter().map(|c| run_cell(&ctx, *c)).collect());
        results.into_iter().collect::<CliResult<Vec<()>>>()?;
    }
    aggregate(&out, &cells, &resolved)?;
    Ok(())
}

fn prepare_out(out: &Path, cfg: &ResolvedConfig, input: &Input) -> CliResult<()> {
    io::create_dir(&out.join("cells"))?;
    let config_path = out.join("config.json");
    if config_path.exists() {
        let text = io::read_text(&config_path)?;
        let previous: ResolvedConfig = serde_json::from_str(&text)
            .map_err(|e| usage(format!("{}: {e}", config_path.display())))?;
        if &previous != cfg {
            return Err(usage(format!(
                "{} holds a sweep with a different configuration; use a new --out",
                out.display()
            )));
        }
        log::info!("resuming the sweep in {}", out.display());
    } else {
        io::write_json(&config_path, cfg)?;
        io::write_graph(&out.join("graph.txt"), &input.graph)?;
        if let Some(labels) = &input.labels {
            io::write_labels(&out.join("labels.txt"), &input.graph, labels)?;
        }
    }
    Ok(())
}

fn cells(cfg: &ResolvedConfig) -> Vec<Cell> {
    let mut kinds = Vec::new();
    if cfg.method.analytical() {
        kinds.push(CellKind::Analytical);
    }
    if cfg.method.opt() {
        kinds.push(CellKind::Opt);
    }
    if !cfg.fractions.is_empty() {
        kinds.push(CellKind::True);
    }
    cfg.ranks.iter().flat_map(|&rank| kinds.iter().map(move |&kind| Cell { rank, kind })).collect()
}

fn with_ids(g: Graph, reference: &Graph) -> CliResult<Graph> {
    Ok(g.with_node_ids((0..reference.n()).map(|i| reference.node_id(i)).collect())?)
}

fn classify(ctx: &Shared, features: &DMatrix<f64>) -> CliResult<Vec<ClassificationResult>> {
    match ctx.labels {
        Some(labels) if !ctx.cfg.fractions.is_empty() => Ok(classification_experiment(
            features,
            labels,
            &ctx.cfg.fractions,
            ctx.cfg.repeats,
            ctx.cfg.seed,
        )?),
        _ => Ok(Vec::new()),
    }
}

fn run_cell(ctx: &Shared, cell: Cell) -> CliResult<()> {
    let start = Instant::now();
    let dir = cell.dir(ctx.out);
    io::create_dir(&dir)?;
    let cfg = ctx.cfg;
    let k = cell.rank;
    let g = ctx.graph;
    let volume = g.volume();
    let lr = pipeline::truncate(ctx.lowrank, k);
    log::info!("cell k={k} {}: started", cell.kind.name());

    let result = if cell.kind == CellKind::True {
        let features = embedding_from_lowrank(&lr).vectors;
        CellResult {
            rank: k,
            method: cell.kind.name().into(),
            metrics: None,
            summary: None,
            classification: classify(ctx, &features)?,
        }
    } else {
        let m_tk = lr.reconstruct();
        let (weighted, binary, summary) = match cell.kind {
            CellKind::Analytical => {
                let degrees = pipeline::analytical_degrees(&m_tk, cfg.window_size, volume, Some(&g.degrees()), cfg.degrees)?;
                let weighted = pipeline::run_analytical(&m_tk, cfg.window_size, &degrees, volume)?;
                let binary = pipeline::binarize_analytical(&weighted, volume)?;
                let summary = pipeline::summarize(Some(g.adjacency()), &m_tk, &weighted, cfg.window_size, k, volume)?;
                (weighted, binary, summary)
            }
            _ => {
                let report = pipeline::run_opt(&m_tk, cfg.window_size, volume, cfg.max_iters)?;
                io::write_loss_trace(&dir.join("loss_trace.csv"), &report.loss_trace)?;
                let binary = pipeline::binarize_opt(&report.adj_weighted, cfg.seed)?;
                let summary =
                    pipeline::summarize(Some(g.adjacency()), &m_tk, &report.adj_weighted, cfg.window_size, k, volume)?;
                (report.adj_weighted.clone(), binary, pipeline::with_opt(summary, &report))
            }
        };
        let weighted_graph = Graph::from_weighted_lossy(&weighted)?;
        io::write_graph(&dir.join("weighted.txt"), &with_ids(weighted_graph.clone(), g)?)?;
        io::write_graph(&dir.join("binarized.txt"), &with_ids(binary.clone(), g)?)?;
        let labels = labels_or_empty(ctx.labels, g.n());
        let metrics = compare_selected(g, &binary, &labels, cfg.top_communities, cfg.metrics)?
            .tagged(cell.kind.name(), Some(k));
        let classification = if cfg.fractions.is_empty() {
            Vec::new()
        } else {
            match netmf_embedding(&weighted_graph, cfg.window_size, k) {
                Ok((_, emb)) => classify(ctx, &emb.vectors)?,
                Err(e) => {
                    log::warn!("cell k={k} {}: reconstruction cannot be embedded ({e}); no classification", cell.kind.name());
                    Vec::new()
                }
            }
        };
        CellResult {
            rank: k,
            method: cell.kind.name().into(),
            metrics: Some(metrics),
            summary: Some(summary),
            classification,
        }
    };
    io::write_json(&dir.join("result.json"), &result)?;
    log::info!("cell k={k} {}: done in {:.1}s", cell.kind.name(), start.elapsed().as_secs_f64());
    Ok(())
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn aggregate(out: &Path, cells: &[Cell], cfg: &ResolvedConfig) -> CliResult<()> {
    let top_c = cfg.top_communities;
    let mut header = MetricsReport::csv_header(top_c);
    header.extend(
        [
            "rel_frob_weighted",
            "ppmi_rel_error",
            "volume_true",
            "volume_recon",
            "opt_iterations",
            "opt_converged",
            "opt_final_loss",
        ]
        .map(String::from),
    );
    header.extend(cfg.fractions.iter().map(|f| format!("micro_f1@{f}")));

    let mut rows = Vec::new();
    let mut class_rows = Vec::new();
    for cell in cells {
        let path = cell.dir(out).join("result.json");
        let text = io::read_text(&path)?;
        let r: CellResult =
            serde_json::from_str(&text).map_err(|e| CliError::Compute(anyhow::anyhow!("{}: {e}", path.display())))?;
        let mut row = match &r.metrics {
            Some(m) => m.csv_row(top_c),
            None => {
                let mut row = vec![String::new(); MetricsReport::csv_header(top_c).len()];
                row[0] = r.method.clone();
                row[1] = r.rank.to_string();
                row
            }
        };
        let s = r.summary.clone().unwrap_or_default();
        let has_summary = r.summary.is_some();
        row.extend([
            opt(s.rel_frob_weighted),
            opt(s.ppmi_rel_error),
            if has_summary { s.volume_true.to_string() } else { String::new() },
            if has_summary { s.volume_recon.to_string() } else { String::new() },
            opt(s.opt_iterations),
            opt(s.opt_converged),
            opt(s.opt_final_loss),
        ]);
        for f in &cfg.fractions {
            row.push(opt(r.classification.iter().find(|c| c.train_fraction == *f).map(|c| c.mean_micro_f1)));
        }
        rows.push(row);
        for c in &r.classification {
            for (i, score) in c.per_repeat_scores.iter().enumerate() {
                class_rows.push(vec![
                    r.rank.to_string(),
                    r.method.clone(),
                    c.train_fraction.to_string(),
                    i.to_string(),
                    score.to_string(),
                ]);
            }
        }
    }
    io::write_rows(&out.join("sweep.csv"), &header, &rows)?;
    if !cfg.fractions.is_empty() {
        let header = ["rank", "method", "train_fraction", "repeat", "micro_f1"].map(String::from);
        io::write_rows(&out.join("classification.csv"), &header, &class_rows)?;
    }
    log::info!("wrote {}", out.join("sweep.csv").display());
    Ok(())
}
