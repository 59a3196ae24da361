//! Detecting and repairing defective tiles in tile-based game levels.
//!
//! A small network learns which tile types may sit at a cell given its 3×3
//! neighborhood and height. Cells whose current type the network finds
//! unlikely are flagged as wrong; a genetic search then picks replacements
//! that remove wrong cells while changing as little as possible.
//!
//! The network is generic over its scalar type; [`CNet32`] and [`CNet64`]
//! are the usual choices.

pub mod audit;
pub mod cnet;
pub mod corpus;
pub mod experiments;
pub mod level;
pub mod lookup;
pub mod repair;
pub mod scalar;
pub mod synthetic;

pub use cnet::{CNet, ConstraintModel, ModelError, Threshold};
pub use corpus::{extract_training_set, CorpusError, TrainingSet};
pub use level::{Combination, Level, LevelError, Position, SurroundingInfo, TileSet, TileType};
pub use repair::{evolve, GAParams, RepairContext, RepairError, RepairResult};
pub use scalar::Scalar;

pub type CNet32 = CNet<f32>;
pub type CNet64 = CNet<f64>;
