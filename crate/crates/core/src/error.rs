use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vector length {got} does not match vertex count {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("edge ({p}, {q}) has non-positive or non-finite weight {w}")]
    BadWeight { p: usize, q: usize, w: f64 },

    #[error("negative or non-finite self weight {w} at vertex {vertex}")]
    BadSelfWeight { vertex: usize, w: f64 },

    #[error("graph is disconnected: {components} components")]
    Disconnected { components: usize },

    #[error("graph must have at least 2 vertices, got {0}")]
    TooSmall(usize),

    #[error("grid dimensions must be at least 2x2, got {rows}x{cols}")]
    GridTooSmall { rows: usize, cols: usize },

    #[error("tree does not span the graph: {0}")]
    NotSpanning(String),

    #[error("edge ({p}, {q}) is not in the graph")]
    MissingEdge { p: usize, q: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-positive pivot {pivot:e} at vertex {vertex}")]
    NonPositivePivot { vertex: usize, pivot: f64 },

    #[error("conjugate gradient breakdown at iteration {0}: zero curvature")]
    Breakdown(usize),

    #[error("inner solve stalled at relative residual {residual:e} after {iterations} iterations")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("dense oracle limited to {limit} vertices, got {n}")]
    SizeGuard { n: usize, limit: usize },

    #[error("matrix market: {0}")]
    MatrixMarket(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
