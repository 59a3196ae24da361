//! Genetic search over replacement schemes for a defective level.

mod context;
mod evolve;
mod ops;
mod params;
mod selection;

use thiserror::Error;

pub use context::{fitness, Evaluation, Individual, RepairContext, ReplacementScheme};
pub use evolve::{evolve, init_population, GenerationRecord, RepairResult};
pub use ops::{crossover, mutate, repair_op};
pub use params::{CandidateSource, FitnessWeights, GAParams};
pub use selection::{parent_probs, round_robin_select};

#[derive(Debug, Error, PartialEq)]
pub enum RepairError {
    #[error("search space is empty, the level is already clean")]
    EmptySearchSpace,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("config: {0}")]
    Config(String),
}

#[cfg(test)]
mod tests;
