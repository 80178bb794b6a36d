use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("input contains no edges")]
    EmptyInput,

    #[error("invalid adjacency matrix: {0}")]
    InvalidAdjacency(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("node {0} has zero degree")]
    ZeroDegree(usize),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("graph is bipartite")]
    Bipartite,

    #[error("graph is not binary")]
    NotBinary,

    #[error("PMI undefined at ({row}, {col}): zero co-occurrence, diameter exceeds T")]
    PmiUndefined { row: usize, col: usize },

    #[error("rank {k} out of range 1..={n}")]
    RankOutOfRange { k: usize, n: usize },

    /// The degree system `(M - J) x = -1` has no unique solution. Carries the
    /// least-squares degrees so callers can still inspect them.
    #[error("degree recovery is not unique: numerical rank {rank} of {n}, residual {residual:.3e}")]
    DegreeRecovery {
        degrees: Vec<f64>,
        residual: f64,
        rank: usize,
        n: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("shifted logistic saturated: Newton denominator underflowed")]
    Saturated,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
