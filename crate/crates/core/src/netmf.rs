//! Forward NetMF: PPMI, PMI and limiting-PMI matrices, truncated
//! eigendecomposition and embeddings.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{frobenius_sq, pinv_symmetric, scale_rows_cols, sorted_symmetric_eigen, symmetrize};

/// Positive PMI matrix `M_T` of a graph for window size `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct PpmiMatrix {
    pub m: DMatrix<f64>,
    pub window_size: usize,
}

/// Rank-`k` eigen-factorization `V·diag(W)·Vᵀ` of a PPMI matrix, eigenpairs
/// ordered by descending `|λ|`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankPpmi {
    pub eigvecs: DMatrix<f64>,
    pub eigvals: DVector<f64>,
    pub window_size: usize,
}

impl LowRankPpmi {
    pub fn rank(&self) -> usize {
        self.eigvals.len()
    }

    pub fn n(&self) -> usize {
        self.eigvecs.nrows()
    }

    /// `M_{T,k} = V·diag(W)·Vᵀ`, exactly symmetric.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let v = &self.eigvecs;
        let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * self.eigvals[j]);
        let mut m = scaled * v.transpose();
        symmetrize(&mut m);
        m
    }
}

/// Node embedding `E = V·√|W|` with the eigenvalue signs kept alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub vectors: DMatrix<f64>,
    pub signs: DVector<f64>,
}

impl Embedding {
    /// `E·diag(signs)·Eᵀ`, which equals the rank-`k` PPMI matrix.
    pub fn gram(&self) -> DMatrix<f64> {
        let e = &self.vectors;
        let signed = DMatrix::from_fn(e.nrows(), e.ncols(), |i, j| e[(i, j)] * self.signs[j]);
        let mut m = signed * e.transpose();
        symmetrize(&mut m);
        m
    }

    /// Recovers the low-rank factorization: `W = signs·‖E_j‖²`, `V_j = E_j / ‖E_j‖`.
    /// Zero columns keep a zero eigenvector.
    pub fn to_lowrank(&self, window_size: usize) -> LowRankPpmi {
        let e = &self.vectors;
        let norms: Vec<f64> = e.column_iter().map(|c| c.norm()).collect();
        let eigvecs = DMatrix::from_fn(e.nrows(), e.ncols(), |i, j| {
            if norms[j] > 0.0 {
                e[(i, j)] / norms[j]
            } else {
                0.0
            }
        });
        let eigvals = DVector::from_iterator(norms.len(), norms.iter().zip(self.signs.iter()).map(|(r, s)| s * r * r));
        LowRankPpmi { eigvecs, eigvals, window_size }
    }
}

fn check_window(window_size: usize) -> Result<()> {
    if window_size == 0 {
        return Err(Error::InvalidParameter("window size T must be at least 1".into()));
    }
    Ok(())
}

fn inv_sqrt_degrees(adj: &DMatrix<f64>) -> Result<DVector<f64>> {
    let mut out = DVector::zeros(adj.nrows());
    for (i, row) in adj.row_iter().enumerate() {
        let d = row.sum();
        if d <= 0.0 {
            return Err(Error::ZeroDegree(i));
        }
        out[i] = 1.0 / d.sqrt();
    }
    Ok(out)
}

/// `(v_G / T)·Σ_{r=1..T} (D⁻¹A)^r D⁻¹`, evaluated in the conjugated form
/// `D^{-1/2} (D^{-1/2} A D^{-1/2})^r D^{-1/2}` and symmetrized.
pub fn cooccurrence(adj: &DMatrix<f64>, window_size: usize) -> Result<DMatrix<f64>> {
    check_window(window_size)?;
    let dinv = inv_sqrt_degrees(adj)?;
    let volume = adj.sum();
    let p = scale_rows_cols(adj, &dinv, &dinv);
    let mut power = p.clone();
    let mut total = p.clone();
    for _ in 1..window_size {
        power = &p * &power;
        total += &power;
    }
    let scale = volume / window_size as f64;
    let mut s = scale_rows_cols(&total, &dinv, &dinv) * scale;
    symmetrize(&mut s);
    Ok(s)
}

/// `M_T = log(max(1, cooccurrence))` entrywise.
pub fn ppmi_of_adjacency(adj: &DMatrix<f64>, window_size: usize) -> Result<PpmiMatrix> {
    let s = cooccurrence(adj, window_size)?;
    Ok(PpmiMatrix { m: s.map(|x| x.max(1.0).ln()), window_size })
}

pub fn ppmi(g: &Graph, window_size: usize) -> Result<PpmiMatrix> {
    ppmi_of_adjacency(g.adjacency(), window_size)
}

/// Unclamped PMI `log(cooccurrence)`; fails on the first zero co-occurrence.
pub fn pmi(g: &Graph, window_size: usize) -> Result<DMatrix<f64>> {
    let s = cooccurrence(g.adjacency(), window_size)?;
    let n = s.nrows();
    for i in 0..n {
        for j in 0..n {
            if s[(i, j)] <= 0.0 {
                return Err(Error::PmiUndefined { row: i, col: j });
            }
        }
    }
    Ok(s.map(f64::ln))
}

/// Limiting PMI `M̂_∞ = v_G·D^{-1/2}(L̄⁺ − I)D^{-1/2} + J` of a connected,
/// non-bipartite graph.
pub fn limiting_pmi(g: &Graph) -> Result<DMatrix<f64>> {
    let adj = g.adjacency();
    let dinv = inv_sqrt_degrees(adj)?;
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if g.is_bipartite() {
        return Err(Error::Bipartite);
    }
    let n = g.n();
    let volume = g.volume();
    let laplacian = DMatrix::identity(n, n) - scale_rows_cols(adj, &dinv, &dinv);
    let lpinv = pinv_symmetric(&laplacian);
    let inner = lpinv - DMatrix::identity(n, n);
    let mut m = scale_rows_cols(&inner, &dinv, &dinv) * volume;
    m.add_scalar_mut(1.0);
    symmetrize(&mut m);
    Ok(m)
}

/// Best rank-`k` approximation of a symmetric matrix in Frobenius norm.
pub fn low_rank_symmetric(m: &DMatrix<f64>, k: usize, window_size: usize) -> Result<LowRankPpmi> {
    let n = m.nrows();
    if k == 0 || k > n {
        return Err(Error::RankOutOfRange { k, n });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("matrix to factorize"));
    }
    let (vals, vecs) = sorted_symmetric_eigen(m);
    Ok(LowRankPpmi {
        eigvecs: vecs.columns(0, k).into_owned(),
        eigvals: vals.rows(0, k).into_owned(),
        window_size,
    })
}

pub fn low_rank_approx(p: &PpmiMatrix, k: usize) -> Result<LowRankPpmi> {
    low_rank_symmetric(&p.m, k, p.window_size)
}

pub fn embedding_from_lowrank(lr: &LowRankPpmi) -> Embedding {
    let v = &lr.eigvecs;
    let roots = lr.eigvals.map(|l| l.abs().sqrt());
    Embedding {
        vectors: DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * roots[j]),
        signs: lr.eigvals.map(|l| if l > 0.0 { 1.0 } else if l < 0.0 { -1.0 } else { 0.0 }),
    }
}

/// `‖M − M_k‖²_F`.
pub fn truncation_error_sq(m: &DMatrix<f64>, lr: &LowRankPpmi) -> f64 {
    frobenius_sq(&(m - lr.reconstruct()))
}

/// PPMI → rank `k` → embedding, for a graph.
pub fn netmf_embedding(g: &Graph, window_size: usize, k: usize) -> Result<(LowRankPpmi, Embedding)> {
    let lr = low_rank_approx(&ppmi(g, window_size)?, k)?;
    let emb = embedding_from_lowrank(&lr);
    Ok((lr, emb))
}
