//! A constraint model that looks combinations up instead of learning them.
//!
//! Known surroundings predict a uniform distribution over the centers seen
//! with them in training. Unknown surroundings fall back to a configurable
//! rule. Handy as an exact reference when checking the repairer, since its
//! candidate sets are known in advance.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use crate::cnet::ConstraintModel;
use crate::corpus::TrainingSet;
use crate::level::{SurroundingInfo, TileSet, NUM_TILE_TYPES};

#[derive(Clone, Debug, PartialEq)]
pub enum Fallback {
    /// Every concrete type equally likely.
    Uniform,
    /// No type is likely; every tile with an unknown surrounding is wrong.
    Nothing,
    /// A pseudo-random non-empty subset of `alphabet`, fixed per surrounding.
    Hashed { alphabet: TileSet, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct LookupModel {
    known: HashMap<SurroundingInfo, TileSet>,
    fallback: Fallback,
}

impl LookupModel {
    pub fn from_training_set(ts: &TrainingSet, fallback: Fallback) -> Self {
        LookupModel {
            known: ts.index().iter().map(|(s, c)| (*s, *c)).collect(),
            fallback,
        }
    }

    /// The set this model spreads its probability over for `s`.
    pub fn support(&self, s: &SurroundingInfo) -> TileSet {
        if let Some(&c) = self.known.get(s) {
            return c;
        }
        match &self.fallback {
            Fallback::Uniform => TileSet::ALL,
            Fallback::Nothing => TileSet::EMPTY,
            Fallback::Hashed { alphabet, seed } => {
                let mut h = std::collections::hash_map::DefaultHasher::new();
                seed.hash(&mut h);
                s.hash(&mut h);
                let bits = h.finish();
                let members: Vec<_> = alphabet.iter().collect();
                let subset: TileSet = members
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| bits >> i & 1 == 1)
                    .map(|(_, &t)| t)
                    .collect();
                if subset.is_empty() {
                    members
                        .get((bits >> 32) as usize % members.len().max(1))
                        .map(|&t| TileSet::single(t))
                        .unwrap_or_default()
                } else {
                    subset
                }
            }
        }
    }
}

impl ConstraintModel for LookupModel {
    fn probabilities(&self, s: &SurroundingInfo, _level_height: usize) -> [f64; NUM_TILE_TYPES] {
        let support = self.support(s);
        let mut p = [0.0; NUM_TILE_TYPES];
        if !support.is_empty() {
            let share = 1.0 / support.len() as f64;
            for t in support.iter() {
                p[t.index()] = share;
            }
        }
        p
    }
}
