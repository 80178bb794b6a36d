//! NetMF node embeddings and their inversion.
//!
//! The forward direction builds the T-window PPMI matrix of an undirected
//! graph, truncates its eigendecomposition to rank `k` and scales the
//! eigenvectors into node embeddings. The backward direction recovers a
//! weighted adjacency matrix from a rank-`k` PPMI matrix, either
//! analytically through the limiting-PMI relations or by minimizing the
//! squared PPMI error over edge logits. [`metrics`] and [`classify`] measure
//! how much of the original graph survives the round trip.
//!
//! All matrices are dense `nalgebra::DMatrix<f64>`.

pub mod classify;
pub mod error;
pub mod graph;
pub mod invert_analytical;
pub mod invert_opt;
pub mod linalg;
pub mod metrics;
pub mod netmf;

pub use error::{Error, Result};
pub use graph::{Graph, NodeLabels, SbmConfig};
pub use netmf::{Embedding, LowRankPpmi, PpmiMatrix};
