use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::params::{CandidateSource, FitnessWeights, GAParams};
use crate::cnet::{inspect_cell, inspect_level, CandidateMap, ConstraintModel, Threshold};
use crate::level::{Level, Position, TileType};

/// Frozen inspection of the level being repaired.
pub struct RepairContext<'m, M: ?Sized> {
    original: Level,
    model: &'m M,
    theta: Threshold,
    weights: FitnessWeights,
    candidate_source: CandidateSource,
    initial_map: CandidateMap,
    search_space: Vec<Position>,
    slot_of: BTreeMap<Position, usize>,
}

impl<'m, M: ConstraintModel + ?Sized> RepairContext<'m, M> {
    pub fn new(original: Level, model: &'m M, theta: Threshold, params: &GAParams) -> Self {
        let initial_map = inspect_level(model, &original, theta);
        let search_space: Vec<Position> = initial_map
            .cells()
            .filter(|(_, c)| c.is_wrong() || c.is_unstable())
            .map(|(p, _)| p)
            .collect();
        let slot_of = search_space.iter().enumerate().map(|(k, &p)| (p, k)).collect();
        RepairContext {
            original,
            model,
            theta,
            weights: params.weights,
            candidate_source: params.candidate_source,
            initial_map,
            search_space,
            slot_of,
        }
    }

    pub fn original(&self) -> &Level {
        &self.original
    }

    pub fn model(&self) -> &'m M {
        self.model
    }

    pub fn theta(&self) -> Threshold {
        self.theta
    }

    pub fn weights(&self) -> FitnessWeights {
        self.weights
    }

    pub fn candidate_source(&self) -> CandidateSource {
        self.candidate_source
    }

    pub fn initial_map(&self) -> &CandidateMap {
        &self.initial_map
    }

    /// Wrong and unstable cells of the original level, in row-major order.
    pub fn search_space(&self) -> &[Position] {
        &self.search_space
    }

    /// Index of `pos` in the search space.
    pub fn slot(&self, pos: Position) -> Option<usize> {
        self.slot_of.get(&pos).copied()
    }

    /// Fitness-relevant counts of `scheme`.
    ///
    /// Only cells whose 3×3 window touches a replaced position can differ
    /// from the original inspection, so only those are re-inspected.
    pub fn evaluate(&self, scheme: &ReplacementScheme) -> Evaluation {
        let level = scheme.materialize(self);
        let changed: Vec<Position> = scheme.changed_positions(self).collect();
        let mut affected = BTreeSet::new();
        for &p in &changed {
            affected.extend(level.window(p));
        }
        let mut wrong = self.initial_map.wrong_count() as isize;
        let mut uv = self.initial_map.unstable_value() as isize;
        for &p in &affected {
            let before = self.initial_map.get(p);
            let after = inspect_cell(self.model, &level, p, self.theta);
            wrong += after.is_wrong() as isize - before.is_wrong() as isize;
            uv += after.unstable_contribution() as isize - before.unstable_contribution() as isize;
        }
        Evaluation::new(wrong as usize, changed.len(), uv as usize, self.weights)
    }

    /// Same as [`evaluate`](Self::evaluate) but re-inspects the whole level.
    pub fn evaluate_full(&self, scheme: &ReplacementScheme) -> Evaluation {
        let level = scheme.materialize(self);
        let map = inspect_level(self.model, &level, self.theta);
        let replaced = self.original.diff(&level).expect("same size").len();
        Evaluation::new(map.wrong_count(), replaced, map.unstable_value(), self.weights)
    }
}

/// Replacement values for every search-space position, aligned with
/// [`RepairContext::search_space`]. A slot holding the original tile means
/// "not replaced".
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ReplacementScheme {
    values: Vec<TileType>,
}

impl ReplacementScheme {
    /// The scheme that replaces nothing.
    pub fn identity<M: ConstraintModel + ?Sized>(ctx: &RepairContext<'_, M>) -> Self {
        ReplacementScheme {
            values: ctx.search_space.iter().map(|&p| ctx.original.get(p)).collect(),
        }
    }

    pub fn values(&self) -> &[TileType] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, slot: usize) -> TileType {
        self.values[slot]
    }

    pub fn set(&mut self, slot: usize, t: TileType) {
        assert!(!t.is_outer(), "OUTER is not a replacement");
        self.values[slot] = t;
    }

    pub(crate) fn swap_with(&mut self, other: &mut ReplacementScheme, slot: usize) {
        std::mem::swap(&mut self.values[slot], &mut other.values[slot]);
    }

    pub fn changed_positions<'a, M: ConstraintModel + ?Sized>(
        &'a self,
        ctx: &'a RepairContext<'_, M>,
    ) -> impl Iterator<Item = Position> + 'a {
        ctx.search_space
            .iter()
            .zip(&self.values)
            .filter(|(&p, &t)| ctx.original.get(p) != t)
            .map(|(&p, _)| p)
    }

    /// The position → replacement dictionary, without no-op entries.
    pub fn assignments<M: ConstraintModel + ?Sized>(&self, ctx: &RepairContext<'_, M>) -> BTreeMap<Position, TileType> {
        self.changed_positions(ctx)
            .map(|p| (p, self.values[ctx.slot(p).expect("in search space")]))
            .collect()
    }

    pub fn replaced_count<M: ConstraintModel + ?Sized>(&self, ctx: &RepairContext<'_, M>) -> usize {
        self.changed_positions(ctx).count()
    }

    /// The original level with this scheme applied.
    pub fn materialize<M: ConstraintModel + ?Sized>(&self, ctx: &RepairContext<'_, M>) -> Level {
        let mut level = ctx.original.clone();
        for (&p, &t) in ctx.search_space.iter().zip(&self.values) {
            level.set(p, t);
        }
        level
    }
}

/// Counts behind the weighted fitness; lower fitness is better.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub wrong: usize,
    pub replaced: usize,
    pub unstable_value: usize,
    pub fitness: f64,
}

impl Evaluation {
    pub fn new(wrong: usize, replaced: usize, unstable_value: usize, w: FitnessWeights) -> Self {
        Evaluation {
            wrong,
            replaced,
            unstable_value,
            fitness: w.combine(wrong, replaced, unstable_value),
        }
    }
}

/// Weighted fitness of `scheme`.
pub fn fitness<M: ConstraintModel + ?Sized>(scheme: &ReplacementScheme, ctx: &RepairContext<'_, M>) -> f64 {
    ctx.evaluate(scheme).fitness
}

/// A scheme together with its evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub scheme: ReplacementScheme,
    pub eval: Evaluation,
}

impl Individual {
    pub fn evaluated<M: ConstraintModel + ?Sized>(scheme: ReplacementScheme, ctx: &RepairContext<'_, M>) -> Self {
        let eval = ctx.evaluate(&scheme);
        Individual { scheme, eval }
    }

    pub fn fitness(&self) -> f64 {
        self.eval.fitness
    }
}
