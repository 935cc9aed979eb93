use crate::graph::NodeId;
use crate::solver::SolverError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("invalid link {from}->{to}: {reason}")]
    InvalidLink {
        from: NodeId,
        to: NodeId,
        reason: String,
    },

    #[error("duplicate link {0}->{1}")]
    ParallelLink(NodeId, NodeId),

    #[error("invalid path {path}: {reason}")]
    InvalidPath { path: String, reason: String },

    #[error("instance too large for enumeration: more than {limit} paths")]
    TooManyPaths { limit: usize },

    #[error("destination {dest} is unreachable from {origin}")]
    Unreachable { origin: NodeId, dest: NodeId },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid segment data: {0}")]
    InvalidSegments(String),

    #[error("{file}:{line}: {reason}")]
    Parse {
        file: String,
        line: usize,
        reason: String,
    },

    #[error(transparent)]
    Solver(#[from] SolverError),

    #[error("solver stopped without an optimal solution: {0:?}")]
    SolverStatus(crate::solver::Status),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True when the error means "no feasible route" rather than bad input.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Unreachable { .. })
    }
}
