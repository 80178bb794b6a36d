use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use nalgebra::{DMatrix, DVector};
use netmf_inversion::classify::ClassificationResult;
use netmf_inversion::graph::{largest_connected_component, load_edge_list, load_labels, save_edge_list, save_labels};
use netmf_inversion::invert_opt::LossTracePoint;
use netmf_inversion::metrics::MetricsReport;
use netmf_inversion::{Embedding, Graph, NodeLabels, SbmConfig};
use serde::Serialize;

use crate::error::{usage, CliResult};

pub fn read_text(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Writes via a temporary sibling and a rename, so readers never see a partial file.
pub fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming {} to {}", tmp.display(), path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn create_dir(path: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

pub fn read_sbm_config(path: &Path) -> anyhow::Result<SbmConfig> {
    let text = read_text(path)?;
    serde_json::from_str(&text).with_context(|| format!("parsing SBM config {}", path.display()))
}

pub fn read_graph(path: &Path) -> anyhow::Result<Graph> {
    load_edge_list(&read_text(path)?).with_context(|| format!("parsing edge list {}", path.display()))
}

/// The graph all subcommands operate on: the largest connected component of
/// the input, with labels restricted to it.
pub struct Input {
    pub graph: Graph,
    pub labels: Option<NodeLabels>,
}

pub enum GraphSource {
    File(PathBuf),
    Sbm(SbmConfig),
}

pub fn load_input(source: &GraphSource, labels: Option<&Path>) -> CliResult<Input> {
    let (full, generated) = match source {
        GraphSource::File(path) => (read_graph(path)?, None),
        GraphSource::Sbm(cfg) => {
            cfg.validate().map_err(usage)?;
            let (g, l) = netmf_inversion::graph::generate_sbm(cfg)?;
            (g, Some(l))
        }
    };
    let full_labels = match labels {
        Some(path) => Some(
            load_labels(&read_text(path)?, &full).with_context(|| format!("parsing labels {}", path.display()))?,
        ),
        None => generated,
    };
    let (graph, labels, _) = largest_connected_component(&full, full_labels.as_ref());
    if graph.n() < full.n() {
        log::info!("using the largest connected component: {} of {} nodes", graph.n(), full.n());
    }
    if graph.n() < 2 {
        return Err(usage("the largest connected component has fewer than 2 nodes"));
    }
    Ok(Input { graph, labels })
}

pub fn write_graph(path: &Path, g: &Graph) -> anyhow::Result<()> {
    write_text(path, &save_edge_list(g))
}

pub fn write_labels(path: &Path, g: &Graph, labels: &NodeLabels) -> anyhow::Result<()> {
    write_text(path, &save_labels(g, labels))
}

/// Reads an edge list and places it on `reference`'s node indices by id.
pub fn read_graph_aligned(path: &Path, reference: &Graph) -> anyhow::Result<Graph> {
    let g = read_graph(path)?;
    let index: std::collections::HashMap<String, usize> =
        (0..reference.n()).map(|i| (reference.node_id(i), i)).collect();
    let n = reference.n();
    let mut adj = DMatrix::zeros(n, n);
    for i in 0..g.n() {
        for j in 0..g.n() {
            let w = g.adjacency()[(i, j)];
            if w == 0.0 {
                continue;
            }
            let (a, b) = (g.node_id(i), g.node_id(j));
            let (Some(&a), Some(&b)) = (index.get(&a), index.get(&b)) else {
                bail!("{}: edge {a} {b} names a node outside the reference graph", path.display());
            };
            adj[(a, b)] = w;
        }
    }
    Ok(Graph::from_adjacency(adj)?)
}

pub fn write_lines<T: ToString>(path: &Path, values: impl IntoIterator<Item = T>) -> anyhow::Result<()> {
    let mut text = String::new();
    for v in values {
        text.push_str(&v.to_string());
        text.push('\n');
    }
    write_text(path, &text)
}

pub fn read_lines(path: &Path) -> anyhow::Result<Vec<String>> {
    Ok(read_text(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

pub fn read_floats(path: &Path) -> anyhow::Result<Vec<f64>> {
    read_lines(path)?
        .iter()
        .enumerate()
        .map(|(i, l)| l.parse::<f64>().with_context(|| format!("{}: value {} is not a number", path.display(), i + 1)))
        .collect()
}

fn csv_writer(path: &Path) -> anyhow::Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))
}

pub fn write_embedding(path: &Path, e: &Embedding) -> anyhow::Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record((0..e.vectors.ncols()).map(|j| format!("dim_{j}")))?;
    for row in e.vectors.row_iter() {
        w.write_record(row.iter().map(f64::to_string))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_embedding_matrix(path: &Path) -> anyhow::Result<DMatrix<f64>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let k = r.headers()?.len();
    let mut data = Vec::new();
    let mut rows = 0;
    for (i, rec) in r.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: row {}", path.display(), i + 1))?;
        for field in rec.iter() {
            data.push(
                field
                    .trim()
                    .parse::<f64>()
                    .with_context(|| format!("{}: row {} has a non-numeric field", path.display(), i + 1))?,
            );
        }
        rows += 1;
    }
    if rows == 0 {
        bail!("{}: no embedding rows", path.display());
    }
    Ok(DMatrix::from_row_slice(rows, k, &data))
}

pub fn read_embedding(path: &Path, signs: &Path) -> anyhow::Result<Embedding> {
    let vectors = read_embedding_matrix(path)?;
    let signs = read_floats(signs)?;
    if signs.len() != vectors.ncols() {
        bail!("{} has {} signs for {} embedding columns", path.display(), signs.len(), vectors.ncols());
    }
    Ok(Embedding { vectors, signs: DVector::from_vec(signs) })
}

/// Graph with no edges carrying `ids`, used to resolve label files against embedding rows.
pub fn id_graph(ids: Vec<String>) -> anyhow::Result<Graph> {
    let n = ids.len();
    Ok(Graph::from_adjacency(DMatrix::zeros(n, n))?.with_node_ids(ids)?)
}

pub fn write_loss_trace(path: &Path, trace: &[LossTracePoint]) -> anyhow::Result<()> {
    let mut w = csv_writer(path)?;
    for p in trace {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rows(path: &Path, header: &[String], rows: &[Vec<String>]) -> anyhow::Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_metrics(dir: &Path, report: &MetricsReport, top_c: usize) -> anyhow::Result<()> {
    write_rows(&dir.join("metrics.csv"), &MetricsReport::csv_header(top_c), &[report.csv_row(top_c)])?;
    write_json(&dir.join("metrics.json"), report)
}

pub fn write_classification(dir: &Path, results: &[ClassificationResult]) -> anyhow::Result<()> {
    let header: Vec<String> = ["train_fraction", "repeat", "micro_f1"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = results
        .iter()
        .flat_map(|r| {
            r.per_repeat_scores
                .iter()
                .enumerate()
                .map(|(i, s)| vec![r.train_fraction.to_string(), i.to_string(), s.to_string()])
        })
        .collect();
    write_rows(&dir.join("classification.csv"), &header, &rows)?;
    let header: Vec<String> = ["train_fraction", "repeats", "mean_micro_f1"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| vec![r.train_fraction.to_string(), r.repeats.to_string(), r.mean_micro_f1.to_string()])
        .collect();
    write_rows(&dir.join("classification_summary.csv"), &header, &rows)
}
