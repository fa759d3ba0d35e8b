use thiserror::Error;

use crate::feyngraph::{CanonicalGraph, Violation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenormError {
    #[error("invalid graph: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidGraph(Vec<Violation>),
    #[error("subgraph is not admissible: {0}")]
    Inadmissible(String),
    #[error("character has no value on generator {0}")]
    MissingValue(CanonicalGraph),
    #[error("log forms live on different spaces ({0} and {1})")]
    SpaceMismatch(u32, u32),
    #[error("invalid log form: {0}")]
    InvalidForm(String),
    #[error("divisor set for n = {n}, k = {k} cannot hold graph {graph}")]
    DivisorSetTooSmall { n: u32, k: u32, graph: CanonicalGraph },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = RenormError> = std::result::Result<T, E>;
