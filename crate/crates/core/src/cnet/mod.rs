//! The constraint network and everything built directly on its output:
//! wrong-tile inspection, candidate recommendation and the unstable value.

mod encode;
mod gradcheck;
mod inspect;
mod model_io;
mod network;

use thiserror::Error;

pub use encode::{encode_input, encode_input_with, HeightEncoding, InputVector, INPUT_DIM};
pub use gradcheck::{gradient_check, gradient_check_with, FD_STEP, RELATIVE_GUARD};
pub use inspect::{
    candidate_types, candidates_from, inspect_cell, inspect_level, unstable_value, CandidateMap, CellInspection,
};
pub use model_io::{load_model, load_model_file, save_model, save_model_file, FORMAT_VERSION, MAGIC};
pub use network::{
    CNet, CNetConfig, Dense, EpochStats, Gradients, TrainOptions, TrainingReport, HIDDEN1, HIDDEN2, OUTPUT_DIM,
};

use crate::level::{SurroundingInfo, NUM_TILE_TYPES};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("training needs at least one epoch")]
    InvalidEpochs,
    #[error("learning rate must be positive and finite, got {0}")]
    InvalidLearningRate(f64),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("loss became non-finite during epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("model file version {found}, this build reads version {expected}")]
    FormatVersionMismatch { found: u8, expected: u8 },
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Anything that predicts a tile-type distribution from a surrounding.
pub trait ConstraintModel: Sync {
    fn probabilities(&self, s: &SurroundingInfo, level_height: usize) -> [f64; NUM_TILE_TYPES];
}

impl<T: Scalar> ConstraintModel for CNet<T> {
    fn probabilities(&self, s: &SurroundingInfo, level_height: usize) -> [f64; NUM_TILE_TYPES] {
        self.forward(&self.encode(s, level_height)).map(Scalar::to_f64_lossy)
    }
}

impl<M: ConstraintModel + ?Sized> ConstraintModel for &M {
    fn probabilities(&self, s: &SurroundingInfo, level_height: usize) -> [f64; NUM_TILE_TYPES] {
        (**self).probabilities(s, level_height)
    }
}

/// Truncation threshold θ, strictly between 0 and 1.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Threshold(f64);

#[derive(Debug, Error, PartialEq)]
#[error("threshold must lie strictly between 0 and 1, got {0}")]
pub struct InvalidThreshold(pub f64);

impl Threshold {
    pub const DEFAULT: Threshold = Threshold(0.05);

    pub fn new(value: f64) -> Result<Self, InvalidThreshold> {
        if value > 0.0 && value < 1.0 {
            Ok(Threshold(value))
        } else {
            Err(InvalidThreshold(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold::DEFAULT
    }
}
