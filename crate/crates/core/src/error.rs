use thiserror::Error;

use crate::network::AgentId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("agent `{0}` is not present")]
    MissingAgent(AgentId),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("empty instance: {0}")]
    EmptyInstance(&'static str),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("sweep run n={n} trial={trial} (sub-seed {sub_seed:#018x}) failed: {source}")]
    SweepRun { n: usize, trial: usize, sub_seed: u64, source: Box<Error> },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
