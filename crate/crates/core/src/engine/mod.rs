//! Query execution, extraction and query synthesis over a [`UiGraph`](crate::relations::UiGraph).

mod exec;
mod synth;

pub use exec::{execute, extract, verify_unique, Extracted, MatchSet};
pub use synth::{rank, synthesize, CandidateQuery, LocatorFamily, Score, SynthesisConfig};

use crate::query::AstError;
use crate::snapshot::NodeId;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("operator '{0}' is not supported by the executor")]
    UnsupportedOperator(&'static str),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("invalid synthesis config: {0}")]
    InvalidConfig(String),
    #[error("invalid query: {0}")]
    InvalidQuery(#[from] AstError),
}
