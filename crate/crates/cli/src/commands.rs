use std::path::Path;

use anyhow::Context;
use nalgebra::DVector;
use netmf_inversion::classify::classification_experiment;
use netmf_inversion::graph::{generate_sbm, load_labels};
use netmf_inversion::metrics::{compare_selected, MetricSelection, DEFAULT_TOP_COMMUNITIES};
use netmf_inversion::netmf::{embedding_from_lowrank, low_rank_approx, netmf_embedding, ppmi};
use netmf_inversion::{Graph, NodeLabels, SbmConfig};
use serde::Serialize;

use crate::cli::{
    ClassifyArgs, DegreeSource, EmbedArgs, GraphArgs, InvertArgs, MetricSwitches, MetricsArgs, SbmGenArgs,
};
use crate::error::{usage, CliError, CliResult};
use crate::io::{self, GraphSource, Input};
use crate::pipeline::{self, ReconSummary};

pub fn graph_source(args: &GraphArgs) -> CliResult<Option<GraphSource>> {
    match (&args.graph, &args.sbm) {
        (Some(path), None) => Ok(Some(GraphSource::File(path.clone()))),
        (None, Some(path)) => Ok(Some(GraphSource::Sbm(read_sbm_config(path)?))),
        (None, None) => Ok(None),
        (Some(_), Some(_)) => Err(usage("--graph and --sbm are mutually exclusive")),
    }
}

fn require_input(args: &GraphArgs) -> CliResult<Input> {
    let source = graph_source(args)?.ok_or_else(|| usage("an input graph is required: --graph PATH or --sbm CFG.json"))?;
    io::load_input(&source, args.labels.as_deref())
}

/// Malformed config files are usage errors.
pub fn read_sbm_config(path: &Path) -> CliResult<SbmConfig> {
    let cfg = io::read_sbm_config(path).map_err(CliError::Usage)?;
    cfg.validate().map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

/// Labels restricted to the graph, or an unlabeled placeholder.
pub fn labels_or_empty(labels: Option<&NodeLabels>, n: usize) -> NodeLabels {
    labels.cloned().unwrap_or(NodeLabels { labels: vec![Vec::new(); n], names: Vec::new() })
}

pub fn selection(switches: &MetricSwitches, base: MetricSelection) -> MetricSelection {
    MetricSelection {
        triangles: base.triangles && !switches.no_triangles,
        path_length: base.path_length && !switches.no_path_length,
        conductance: base.conductance && !switches.no_conductance,
    }
}

fn node_ids(g: &Graph) -> Vec<String> {
    (0..g.n()).map(|i| g.node_id(i)).collect()
}

fn index_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn write_component(out: &Path, input: &Input) -> anyhow::Result<()> {
    io::write_graph(&out.join("graph.txt"), &input.graph)?;
    if let Some(labels) = &input.labels {
        io::write_labels(&out.join("labels.txt"), &input.graph, labels)?;
    }
    Ok(())
}

pub fn embed(args: EmbedArgs) -> CliResult<()> {
    pipeline::check_window(args.window)?;
    if let Some(ranks) = &args.ranks {
        if ranks.is_empty() {
            return Err(usage("the rank list is empty"));
        }
    }
    let input = require_input(&args.input)?;
    let g = &input.graph;
    let ranks = args.ranks.clone().unwrap_or_else(|| pipeline::default_ranks(g.n()));
    pipeline::check_ranks(&ranks, g.n())?;

    io::create_dir(&args.out)?;
    io::write_lines(&args.out.join("nodes.txt"), node_ids(g))?;
    write_component(&args.out, &input)?;

    let kmax = *ranks.iter().max().unwrap();
    log::info!("PPMI of {} nodes, T = {}", g.n(), args.window);
    let lr = low_rank_approx(&ppmi(g, args.window)?, kmax)?;
    for &k in &ranks {
        let emb = embedding_from_lowrank(&pipeline::truncate(&lr, k));
        io::write_embedding(&args.out.join(format!("embedding_k{k}.csv")), &emb)?;
        io::write_lines(&args.out.join(format!("signs_k{k}.txt")), emb.signs.iter())?;
        io::write_lines(&args.out.join(format!("eigenvalues_k{k}.txt")), lr.eigvals.rows(0, k).iter())?;
        log::info!("wrote rank-{k} embedding");
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct InvertSummary {
    window_size: usize,
    rank: usize,
    volume: f64,
    degree_source: Option<DegreeSource>,
    analytical: Option<ReconSummary>,
    opt: Option<ReconSummary>,
}

pub fn invert(args: InvertArgs) -> CliResult<()> {
    pipeline::check_window(args.window)?;
    let source = graph_source(&args.input)?;
    let input = source.map(|s| io::load_input(&s, args.input.labels.as_deref())).transpose()?;

    let (m_tk, rank, ids) = match (&args.embedding, &input) {
        (Some(path), _) => {
            let signs = args.signs.as_deref().ok_or_else(|| usage("--embedding needs --signs"))?;
            let emb = io::read_embedding(path, signs)?;
            let n = emb.vectors.nrows();
            let ids = match (&args.nodes, &input) {
                (Some(p), _) => io::read_lines(p)?,
                (None, Some(inp)) => node_ids(&inp.graph),
                (None, None) => index_ids(n),
            };
            if ids.len() != n {
                return Err(usage(format!("{} node ids for {n} embedding rows", ids.len())));
            }
            if let Some(inp) = &input {
                if node_ids(&inp.graph) != ids {
                    return Err(usage("embedding rows do not match the graph's component nodes"));
                }
            }
            (emb.gram(), emb.vectors.ncols(), ids)
        }
        (None, Some(inp)) => {
            let k = args.rank.ok_or_else(|| usage("--rank is required to embed --graph/--sbm"))?;
            pipeline::check_ranks(&[k], inp.graph.n())?;
            let (lr, _) = netmf_embedding(&inp.graph, args.window, k)?;
            (lr.reconstruct(), k, node_ids(&inp.graph))
        }
        (None, None) => return Err(usage("give --embedding with --signs, or --graph/--sbm with --rank")),
    };
    let n = m_tk.nrows();

    let true_degrees = match &args.degrees_file {
        Some(path) => {
            let d = io::read_floats(path)?;
            if d.len() != n {
                return Err(usage(format!("{}: {} degrees for {n} nodes", path.display(), d.len())));
            }
            Some(DVector::from_vec(d))
        }
        None => input.as_ref().map(|inp| inp.graph.degrees()),
    };
    let volume = args
        .volume
        .or_else(|| true_degrees.as_ref().map(|d| d.sum()))
        .ok_or_else(|| usage("--volume is required without a graph or --degrees-file"))?;
    if !(volume > 0.0) {
        return Err(usage(format!("volume {volume} must be positive")));
    }
    let true_adj = input.as_ref().map(|inp| inp.graph.adjacency());

    io::create_dir(&args.out)?;
    let tag = |g: Graph| g.with_node_ids(ids.clone());
    let mut summary =
        InvertSummary { window_size: args.window, rank, volume, degree_source: None, analytical: None, opt: None };

    if args.method.analytical() {
        let degrees = pipeline::analytical_degrees(&m_tk, args.window, volume, true_degrees.as_ref(), args.degrees)?;
        let weighted = pipeline::run_analytical(&m_tk, args.window, &degrees, volume)?;
        let binary = pipeline::binarize_analytical(&weighted, volume)?;
        io::write_graph(&args.out.join("analytical_weighted.txt"), &tag(Graph::from_weighted_lossy(&weighted)?)?)?;
        io::write_graph(&args.out.join("analytical_binarized.txt"), &tag(binary)?)?;
        summary.degree_source = Some(args.degrees);
        summary.analytical = Some(pipeline::summarize(true_adj, &m_tk, &weighted, args.window, rank, volume)?);
        log::info!("analytical inversion done");
    }
    if args.method.opt() {
        let report = pipeline::run_opt(&m_tk, args.window, volume, args.max_iters)?;
        let binary = pipeline::binarize_opt(&report.adj_weighted, args.seed)?;
        io::write_graph(&args.out.join("opt_weighted.txt"), &tag(Graph::from_weighted_lossy(&report.adj_weighted)?)?)?;
        io::write_graph(&args.out.join("opt_binarized.txt"), &tag(binary)?)?;
        io::write_loss_trace(&args.out.join("opt_loss_trace.csv"), &report.loss_trace)?;
        let s = pipeline::summarize(true_adj, &m_tk, &report.adj_weighted, args.window, rank, volume)?;
        summary.opt = Some(pipeline::with_opt(s, &report));
        log::info!(
            "optimization inversion done: {} iterations, loss {:.3e} ({:?})",
            report.iterations_used,
            report.final_loss,
            report.termination
        );
    }
    io::write_json(&args.out.join("invert_summary.json"), &summary)?;
    Ok(())
}

pub fn metrics(args: MetricsArgs) -> CliResult<()> {
    let input = require_input(&args.input)?;
    let recon = io::read_graph_aligned(&args.recon, &input.graph)?;
    let top_c = args.switches.top_communities.unwrap_or(DEFAULT_TOP_COMMUNITIES);
    let labels = labels_or_empty(input.labels.as_ref(), input.graph.n());
    let report = compare_selected(&input.graph, &recon, &labels, top_c, selection(&args.switches, MetricSelection::default()))
        .with_context(|| format!("comparing {} with the original graph", args.recon.display()))?
        .tagged(args.name, args.rank);
    io::create_dir(&args.out)?;
    io::write_metrics(&args.out, &report, top_c)?;
    Ok(())
}

pub fn classify(args: ClassifyArgs) -> CliResult<()> {
    pipeline::check_window(args.window)?;
    let fractions = args.fractions.clone().unwrap_or_else(|| pipeline::DEFAULT_FRACTIONS.to_vec());
    if fractions.is_empty() {
        return Err(usage("the fraction list is empty"));
    }
    pipeline::check_fractions(&fractions)?;
    if args.repeats == 0 {
        return Err(usage("--repeats must be at least 1"));
    }

    let (features, labels) = match &args.embedding {
        Some(path) => {
            let labels_path = args.input.labels.as_deref().ok_or_else(|| usage("--embedding needs --labels"))?;
            let features = io::read_embedding_matrix(path)?;
            let ids = match &args.nodes {
                Some(p) => io::read_lines(p)?,
                None => index_ids(features.nrows()),
            };
            if ids.len() != features.nrows() {
                return Err(usage(format!("{} node ids for {} embedding rows", ids.len(), features.nrows())));
            }
            let g = io::id_graph(ids)?;
            let labels = load_labels(&io::read_text(labels_path)?, &g)
                .with_context(|| format!("parsing labels {}", labels_path.display()))?;
            (features, labels)
        }
        None => {
            let input = require_input(&args.input)?;
            let labels = input.labels.ok_or_else(|| usage("classification needs --labels (or an --sbm input)"))?;
            let k = args.rank.ok_or_else(|| usage("--rank is required to embed --graph/--sbm"))?;
            pipeline::check_ranks(&[k], input.graph.n())?;
            let (_, emb) = netmf_embedding(&input.graph, args.window, k)?;
            (emb.vectors, labels)
        }
    };
    if labels.labels.iter().all(Vec::is_empty) {
        return Err(usage("no embedding row has a label"));
    }
    let results = classification_experiment(&features, &labels, &fractions, args.repeats, args.seed)?;
    for r in &results {
        log::info!("train fraction {}: mean micro-F1 {:.4}", r.train_fraction, r.mean_micro_f1);
    }
    io::create_dir(&args.out)?;
    io::write_classification(&args.out, &results)?;
    Ok(())
}

pub fn sbm_gen(args: SbmGenArgs) -> CliResult<()> {
    let base = args.sbm.as_deref().map(io::read_sbm_config).transpose().map_err(CliError::Usage)?;
    let missing = |name: &str| usage(format!("--{name} is required without an --sbm config"));
    let cfg = SbmConfig {
        n: args.n.or(base.map(|b| b.n)).ok_or_else(|| missing("n"))?,
        num_clusters: args.clusters.or(base.map(|b| b.num_clusters)).ok_or_else(|| missing("clusters"))?,
        p_in: args.p_in.or(base.map(|b| b.p_in)).ok_or_else(|| missing("p-in"))?,
        p_out: args.p_out.or(base.map(|b| b.p_out)).ok_or_else(|| missing("p-out"))?,
        seed: args.seed.or(base.map(|b| b.seed)).unwrap_or(0),
    };
    cfg.validate().map_err(usage)?;
    let (g, labels) = generate_sbm(&cfg)?;
    io::create_dir(&args.out)?;
    io::write_graph(&args.out.join("graph.txt"), &g)?;
    io::write_labels(&args.out.join("labels.txt"), &g, &labels)?;
    io::write_json(&args.out.join("sbm.json"), &cfg)?;
    log::info!("sampled {} edges on {} nodes", g.edge_count(), g.n());
    Ok(())
}
