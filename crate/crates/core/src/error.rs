use thiserror::Error;

use crate::graph::Vertex;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: Vertex },

    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: Vertex, n: usize },

    #[error("path index {index} out of range for {len} paths")]
    PathOutOfRange { index: usize, len: usize },

    #[error("pair ({s}, {t}) is infeasible: {t} is not reachable from {s}")]
    Infeasible { s: Vertex, t: Vertex },

    #[error("input graph must be acyclic")]
    NotADag,

    #[error("no edge ({0}, {1})")]
    MissingEdge(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
