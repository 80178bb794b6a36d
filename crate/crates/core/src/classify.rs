//! One-vs-rest logistic regression on node embeddings, scored by micro-F1
//! over repeated random train/test splits.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NodeLabels;
use crate::invert_opt::lbfgs::{self, LbfgsConfig};

pub const DEFAULT_L2: f64 = 1.0;
pub const DEFAULT_REPEATS: usize = 10;

fn solver_config() -> LbfgsConfig {
    LbfgsConfig { max_iters: 200, gtol: 1e-6, ..LbfgsConfig::default() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    /// Per label: `k` weights followed by the bias, or `None` when the label
    /// had no positive training example (it then never scores above others).
    pub weights: Vec<Option<Vec<f64>>>,
    pub label_ids: Vec<usize>,
    pub feature_mean: Vec<f64>,
    pub feature_scale: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub train_fraction: f64,
    pub repeats: usize,
    pub mean_micro_f1: f64,
    pub per_repeat_scores: Vec<f64>,
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    crate::invert_opt::shifted_logistic::logistic(z)
}

/// Fits `Σ log(1 + exp(−y·(w·x + b))) + reg/2·‖w‖²` (bias unpenalized).
fn fit_binary(x: &[Vec<f64>], y: &[f64], reg: f64) -> Vec<f64> {
    let k = x.first().map_or(0, Vec::len);
    let objective = |w: &[f64]| {
        let (coef, bias) = (&w[..k], w[k]);
        let mut f = 0.5 * reg * coef.iter().map(|c| c * c).sum::<f64>();
        let mut g = vec![0.0; k + 1];
        for (c, gi) in coef.iter().zip(g.iter_mut()) {
            *gi = reg * c;
        }
        for (xi, &yi) in x.iter().zip(y) {
            let margin = yi * (coef.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>() + bias);
            f += softplus(-margin);
            let coeff = -yi * sigmoid(-margin);
            for (gj, xj) in g.iter_mut().zip(xi) {
                *gj += coeff * xj;
            }
            g[k] += coeff;
        }
        (f, g)
    };
    lbfgs::minimize(objective, vec![0.0; k + 1], &solver_config()).x
}

/// Trains one binary classifier per label on the rows in `train_idx`.
/// Features are standardized per dimension with training-split statistics.
pub fn train_ovr_logreg(
    features: &DMatrix<f64>,
    labels: &NodeLabels,
    train_idx: &[usize],
    reg: f64,
) -> Result<ClassifierModel> {
    let (n, k) = features.shape();
    if labels.n() != n {
        return Err(Error::Shape(format!("{} labeled nodes for {n} feature rows", labels.n())));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("features need at least one column".into()));
    }
    if train_idx.is_empty() {
        return Err(Error::InvalidParameter("empty training set".into()));
    }
    if let Some(&bad) = train_idx.iter().find(|&&i| i >= n || labels.labels[i].is_empty()) {
        return Err(Error::InvalidParameter(format!("training node {bad} is missing or unlabeled")));
    }
    if !(reg >= 0.0) {
        return Err(Error::InvalidParameter(format!("regularization {reg} must be non-negative")));
    }

    let m = train_idx.len() as f64;
    let mut mean = vec![0.0; k];
    let mut scale = vec![0.0; k];
    for c in 0..k {
        mean[c] = train_idx.iter().map(|&i| features[(i, c)]).sum::<f64>() / m;
        let var = train_idx.iter().map(|&i| (features[(i, c)] - mean[c]).powi(2)).sum::<f64>() / m;
        scale[c] = if var > 0.0 { var.sqrt() } else { 1.0 };
    }
    let x: Vec<Vec<f64>> = train_idx
        .iter()
        .map(|&i| (0..k).map(|c| (features[(i, c)] - mean[c]) / scale[c]).collect())
        .collect();

    let label_ids: Vec<usize> = (0..labels.num_distinct()).collect();
    let weights = label_ids
        .iter()
        .map(|&l| {
            let y: Vec<f64> = train_idx
                .iter()
                .map(|&i| if labels.labels[i].contains(&l) { 1.0 } else { -1.0 })
                .collect();
            y.iter().any(|&v| v > 0.0).then(|| fit_binary(&x, &y, reg))
        })
        .collect();
    Ok(ClassifierModel { weights, label_ids, feature_mean: mean, feature_scale: scale })
}

impl ClassifierModel {
    /// Decision values `w·x + b`, one column per label; untrained labels score `−∞`.
    pub fn scores(&self, features: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let k = self.feature_mean.len();
        if features.ncols() != k {
            return Err(Error::Shape(format!("model expects {k} features, got {}", features.ncols())));
        }
        Ok(DMatrix::from_fn(features.nrows(), self.label_ids.len(), |i, l| match &self.weights[l] {
            None => f64::NEG_INFINITY,
            Some(w) => {
                w[k] + (0..k)
                    .map(|c| w[c] * (features[(i, c)] - self.feature_mean[c]) / self.feature_scale[c])
                    .sum::<f64>()
            }
        }))
    }
}

/// Assigns each row its `l_per_node[i]` highest-scoring labels; ties go to
/// the lower label id.
pub fn predict_top_l(model: &ClassifierModel, features: &DMatrix<f64>, l_per_node: &[usize]) -> Result<Vec<Vec<usize>>> {
    if l_per_node.len() != features.nrows() {
        return Err(Error::Shape(format!("{} label counts for {} rows", l_per_node.len(), features.nrows())));
    }
    let scores = model.scores(features)?;
    Ok(l_per_node
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let mut order: Vec<usize> = (0..model.label_ids.len()).collect();
            order.sort_by(|&a, &b| scores[(i, b)].total_cmp(&scores[(i, a)]).then(a.cmp(&b)));
            let mut top: Vec<usize> = order.into_iter().take(l).map(|j| model.label_ids[j]).collect();
            top.sort_unstable();
            top
        })
        .collect())
}

/// `2·TP / (2·TP + FP + FN)` pooled over every (node, label) decision.
pub fn micro_f1(pred: &[Vec<usize>], truth: &[Vec<usize>]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::Shape(format!("{} predictions for {} nodes", pred.len(), truth.len())));
    }
    if truth.iter().all(Vec::is_empty) {
        return Err(Error::InvalidParameter("ground truth has no labels".into()));
    }
    let (mut tp, mut fp, mut fnn) = (0usize, 0usize, 0usize);
    for (p, t) in pred.iter().zip(truth) {
        let hits = p.iter().filter(|l| t.contains(l)).count();
        tp += hits;
        fp += p.len() - hits;
        fnn += t.iter().filter(|l| !p.contains(l)).count();
    }
    Ok(2.0 * tp as f64 / (2 * tp + fp + fnn) as f64)
}

/// For each training fraction, draws `repeats` seeded uniform splits of the
/// labeled nodes, trains on one side and scores micro-F1 on the other.
pub fn classification_experiment(
    features: &DMatrix<f64>,
    labels: &NodeLabels,
    fractions: &[f64],
    repeats: usize,
    seed: u64,
) -> Result<Vec<ClassificationResult>> {
    if features.nrows() != labels.n() {
        return Err(Error::Shape(format!("{} labeled nodes for {} feature rows", labels.n(), features.nrows())));
    }
    if repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be at least 1".into()));
    }
    if let Some(f) = fractions.iter().find(|&&f| !(f > 0.0 && f < 1.0)) {
        return Err(Error::InvalidParameter(format!("train fraction {f} outside (0, 1)")));
    }
    let labeled: Vec<usize> = (0..labels.n()).filter(|&i| !labels.labels[i].is_empty()).collect();
    if labeled.len() < 2 {
        return Err(Error::InvalidParameter("need at least two labeled nodes".into()));
    }

    fractions
        .iter()
        .enumerate()
        .map(|(fi, &fraction)| {
            let n_train = ((fraction * labeled.len() as f64).round() as usize).clamp(1, labeled.len() - 1);
            let scores = (0..repeats)
                .map(|r| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(((fi as u64) << 32) | r as u64);
                    let mut nodes = labeled.clone();
                    nodes.shuffle(&mut rng);
                    let (train, test) = nodes.split_at(n_train);
                    let model = train_ovr_logreg(features, labels, train, DEFAULT_L2)?;
                    let test_features = DMatrix::from_fn(test.len(), features.ncols(), |i, c| features[(test[i], c)]);
                    let truth: Vec<Vec<usize>> = test.iter().map(|&i| labels.labels[i].clone()).collect();
                    let counts: Vec<usize> = truth.iter().map(Vec::len).collect();
                    let pred = predict_top_l(&model, &test_features, &counts)?;
                    micro_f1(&pred, &truth)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(ClassificationResult {
                train_fraction: fraction,
                repeats,
                mean_micro_f1: scores.iter().sum::<f64>() / scores.len() as f64,
                per_repeat_scores: scores,
            })
        })
        .collect()
}
