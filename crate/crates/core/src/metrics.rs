//! Measures comparing a graph with its reconstruction.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeLabels};

/// Number of most populous communities evaluated by default.
pub const DEFAULT_TOP_COMMUNITIES: usize = 5;

/// `‖x − x̃‖_F / ‖x‖_F`.
pub fn rel_frobenius(x: &DMatrix<f64>, approx: &DMatrix<f64>) -> Result<f64> {
    if x.shape() != approx.shape() {
        return Err(Error::Shape(format!("{:?} vs {:?}", x.shape(), approx.shape())));
    }
    let norm = x.norm();
    if norm == 0.0 {
        return Err(Error::InvalidParameter("reference matrix has zero norm".into()));
    }
    Ok((x - approx).norm() / norm)
}

/// Signed `(x̃ − x) / x`.
pub fn relative_error(x: f64, approx: f64) -> Result<f64> {
    if x == 0.0 {
        return Err(Error::InvalidParameter("relative error against zero".into()));
    }
    Ok((approx - x) / x)
}

fn require_binary(g: &Graph) -> Result<()> {
    if g.is_binary() {
        Ok(())
    } else {
        Err(Error::NotBinary)
    }
}

/// Number of 3-cliques, `tr(A³)/6`, counted by merging sorted neighbor lists.
pub fn triangle_count(g: &Graph) -> Result<u64> {
    require_binary(g)?;
    let nbrs = g.neighbors();
    let mut count = 0u64;
    for u in 0..g.n() {
        for &v in nbrs[u].iter().filter(|&&v| v > u) {
            // common neighbors w > v
            let (a, b) = (&nbrs[u], &nbrs[v]);
            let (mut i, mut j) = (a.partition_point(|&w| w <= v), b.partition_point(|&w| w <= v));
            while i < a.len() && j < b.len() {
                match a[i].cmp(&b[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        count += 1;
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
    }
    Ok(count)
}

/// Mean shortest-path length over all unordered node pairs, by BFS from every node.
pub fn average_path_length(g: &Graph) -> Result<f64> {
    require_binary(g)?;
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidParameter("average path length needs two nodes".into()));
    }
    let nbrs = g.neighbors();
    let mut total: u64 = 0;
    let mut dist = vec![usize::MAX; n];
    for src in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &nbrs[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    total += dist[v] as u64;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        if reached < n {
            return Err(Error::Disconnected);
        }
    }
    // each unordered pair counted twice
    Ok(total as f64 / (n * (n - 1)) as f64)
}

/// `φ(S) = e(S:S̄) / min(vol(S), vol(S̄))` with degree volumes.
pub fn conductance(g: &Graph, subset: &[usize]) -> Result<f64> {
    let n = g.n();
    let mut inside = vec![false; n];
    for &i in subset {
        if i >= n {
            return Err(Error::InvalidParameter(format!("node {i} out of range")));
        }
        inside[i] = true;
    }
    let size = inside.iter().filter(|&&b| b).count();
    if size == 0 || size == n {
        return Err(Error::InvalidParameter("subset must be non-empty and proper".into()));
    }
    let adj = g.adjacency();
    let degrees = g.degrees();
    let (mut cut, mut vol_in, mut vol_out) = (0.0, 0.0, 0.0);
    for i in 0..n {
        if inside[i] {
            vol_in += degrees[i];
            for j in 0..n {
                if !inside[j] {
                    cut += adj[(i, j)];
                }
            }
        } else {
            vol_out += degrees[i];
        }
    }
    let denom = f64::min(vol_in, vol_out);
    if denom <= 0.0 {
        return Err(Error::InvalidParameter("smaller side has zero volume".into()));
    }
    Ok(cut / denom)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CommunityConductance {
    pub label: String,
    pub size: usize,
    pub phi_true: Option<f64>,
    pub phi_recon: Option<f64>,
    pub rel_error: Option<f64>,
}

/// All comparison measures for one reconstruction. Measures that could not
/// be computed (e.g. path length of a disconnected reconstruction) are `None`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MetricsReport {
    pub method: String,
    pub rank: Option<usize>,
    pub rel_frob_adj: Option<f64>,
    pub triangles_true: Option<u64>,
    pub triangles_recon: Option<u64>,
    pub triangles_rel_error: Option<f64>,
    pub apl_true: Option<f64>,
    pub apl_recon: Option<f64>,
    pub apl_rel_error: Option<f64>,
    pub conductances: Vec<CommunityConductance>,
}

impl MetricsReport {
    pub fn tagged(mut self, method: impl Into<String>, rank: Option<usize>) -> Self {
        self.method = method.into();
        self.rank = rank;
        self
    }

    /// Mean of `|rel_error|` over communities where it is defined.
    pub fn mean_abs_conductance_error(&self) -> Option<f64> {
        let errs: Vec<f64> = self.conductances.iter().filter_map(|c| c.rel_error).map(f64::abs).collect();
        (!errs.is_empty()).then(|| errs.iter().sum::<f64>() / errs.len() as f64)
    }

    /// Header for [`MetricsReport::csv_row`]; conductance columns repeat per community slot.
    pub fn csv_header(top_c: usize) -> Vec<String> {
        let mut h: Vec<String> = [
            "method",
            "rank",
            "rel_frob_adj",
            "triangles_true",
            "triangles_recon",
            "triangles_rel_error",
            "apl_true",
            "apl_recon",
            "apl_rel_error",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        for c in 0..top_c {
            for f in ["label", "size", "phi_true", "phi_recon", "phi_rel_error"] {
                h.push(format!("comm{c}_{f}"));
            }
        }
        h
    }

    /// Flat row; absent values are empty strings.
    pub fn csv_row(&self, top_c: usize) -> Vec<String> {
        fn opt<T: ToString>(x: Option<T>) -> String {
            x.map(|v| v.to_string()).unwrap_or_default()
        }
        let mut row = vec![
            self.method.clone(),
            opt(self.rank),
            opt(self.rel_frob_adj),
            opt(self.triangles_true),
            opt(self.triangles_recon),
            opt(self.triangles_rel_error),
            opt(self.apl_true),
            opt(self.apl_recon),
            opt(self.apl_rel_error),
        ];
        for c in 0..top_c {
            match self.conductances.get(c) {
                Some(cc) => row.extend([
                    cc.label.clone(),
                    cc.size.to_string(),
                    opt(cc.phi_true),
                    opt(cc.phi_recon),
                    opt(cc.rel_error),
                ]),
                None => row.extend(std::iter::repeat_n(String::new(), 5)),
            }
        }
        row
    }
}

/// Which of the structural measures to compute; the adjacency error is always reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricSelection {
    pub triangles: bool,
    pub path_length: bool,
    pub conductance: bool,
}

impl Default for MetricSelection {
    fn default() -> Self {
        Self { triangles: true, path_length: true, conductance: true }
    }
}

/// Compares `g` with its binarized reconstruction on the `top_c` most
/// populous communities (ties by label id).
pub fn compare(g: &Graph, recon: &Graph, labels: &NodeLabels, top_c: usize) -> Result<MetricsReport> {
    compare_selected(g, recon, labels, top_c, MetricSelection::default())
}

pub fn compare_selected(
    g: &Graph,
    recon: &Graph,
    labels: &NodeLabels,
    top_c: usize,
    selection: MetricSelection,
) -> Result<MetricsReport> {
    if g.n() != recon.n() {
        return Err(Error::Shape(format!("{} vs {} nodes", g.n(), recon.n())));
    }
    if labels.n() != g.n() {
        return Err(Error::Shape(format!("{} labeled nodes for {} graph nodes", labels.n(), g.n())));
    }
    require_binary(recon)?;

    let (triangles_true, triangles_recon) = if selection.triangles {
        (triangle_count(g).ok(), triangle_count(recon).ok())
    } else {
        (None, None)
    };
    let (apl_true, apl_recon) = if selection.path_length {
        (average_path_length(g).ok(), average_path_length(recon).ok())
    } else {
        (None, None)
    };
    let rel = |a: Option<f64>, b: Option<f64>| a.zip(b).and_then(|(a, b)| relative_error(a, b).ok());

    let mut communities: Vec<(usize, Vec<usize>)> = labels.communities().into_iter().enumerate().collect();
    communities.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(&b.0)));
    let conductances = communities
        .into_iter()
        .filter(|(_, members)| !members.is_empty())
        .take(if selection.conductance { top_c } else { 0 })
        .map(|(label, members)| {
            let phi_true = conductance(g, &members).ok();
            let phi_recon = conductance(recon, &members).ok();
            CommunityConductance {
                label: labels.names[label].clone(),
                size: members.len(),
                phi_true,
                phi_recon,
                rel_error: rel(phi_true, phi_recon),
            }
        })
        .collect();

    Ok(MetricsReport {
        method: String::new(),
        rank: None,
        rel_frob_adj: rel_frobenius(g.adjacency(), recon.adjacency()).ok(),
        triangles_true,
        triangles_recon,
        triangles_rel_error: rel(triangles_true.map(|t| t as f64), triangles_recon.map(|t| t as f64)),
        apl_true,
        apl_recon,
        apl_rel_error: rel(apl_true, apl_recon),
        conductances,
    })
}
