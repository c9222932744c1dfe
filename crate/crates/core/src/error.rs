use thiserror::Error;

use crate::elliptic::LinearSolveStats;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    /// One entry per problem found, so a caller can report all of them at once.
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("screened coefficient is negative ({value}) at node {node}")]
    NegativeCoefficient { node: usize, value: f64 },

    #[error("linear solver did not converge: {stats}")]
    LinearSolve { stats: LinearSolveStats },

    #[error("fixed-point iteration stopped after {sweeps} sweeps with sandwich gap {gap:e}")]
    NotConverged { sweeps: usize, gap: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
