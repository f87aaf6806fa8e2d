use thiserror::Error;

/// Errors produced by graph construction, the dynamics and the clustering pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its valid range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A vertex index does not exist in the graph.
    #[error("vertex {vertex} out of range for graph with {vertex_count} vertices")]
    Index { vertex: usize, vertex_count: usize },

    /// The graph cannot be simulated (e.g. it has isolated vertices).
    #[error("simulation error: {0}")]
    Simulation(String),

    /// Every class lost all of its mass, or some other numerically degenerate state.
    #[error("degenerate state: {0}")]
    Degenerate(String),

    /// Malformed input file.
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
