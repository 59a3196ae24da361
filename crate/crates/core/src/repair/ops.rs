//! Variation operators. All of them only ever touch search-space slots.

use rand::Rng;

use super::context::{RepairContext, ReplacementScheme};
use super::params::CandidateSource;
use crate::cnet::{inspect_cell, ConstraintModel};

/// Uniform crossover: each slot is swapped between the children with
/// probability 1/2.
pub fn crossover<R: Rng + ?Sized>(
    x1: &ReplacementScheme,
    x2: &ReplacementScheme,
    rng: &mut R,
) -> (ReplacementScheme, ReplacementScheme) {
    assert_eq!(x1.len(), x2.len(), "schemes of different contexts");
    let mut a = x1.clone();
    let mut b = x2.clone();
    for slot in 0..a.len() {
        if rng.gen_bool(0.5) {
            a.swap_with(&mut b, slot);
        }
    }
    (a, b)
}

#[derive(Clone, Copy)]
enum Guard {
    Unstable,
    Wrong,
}

fn reassign<M, R>(x: &mut ReplacementScheme, p: f64, ctx: &RepairContext<'_, M>, rng: &mut R, guard: Guard)
where
    M: ConstraintModel + ?Sized,
    R: Rng + ?Sized,
{
    if x.is_empty() || p <= 0.0 {
        return;
    }
    // Cells are judged on the level as modified so far within this sweep.
    let mut level = x.materialize(ctx);
    for (slot, &pos) in ctx.search_space().iter().enumerate() {
        if !rng.gen_bool(p) {
            continue;
        }
        let cell = inspect_cell(ctx.model(), &level, pos, ctx.theta());
        let eligible = match guard {
            Guard::Unstable => cell.is_unstable(),
            Guard::Wrong => cell.is_wrong(),
        };
        if !eligible {
            continue;
        }
        let candidates = match ctx.candidate_source() {
            CandidateSource::Current => cell.candidates,
            CandidateSource::Original => ctx.initial_map().get(pos).candidates,
        };
        if candidates.is_empty() {
            continue;
        }
        let t = candidates
            .nth(rng.gen_range(0..candidates.len()))
            .expect("index below set size");
        x.set(slot, t);
        level.set(pos, t);
    }
}

/// With probability `p_m1` per slot, re-draws an unstable cell uniformly
/// from its candidate set.
pub fn mutate<M, R>(x: &mut ReplacementScheme, p_m1: f64, ctx: &RepairContext<'_, M>, rng: &mut R)
where
    M: ConstraintModel + ?Sized,
    R: Rng + ?Sized,
{
    reassign(x, p_m1, ctx, rng, Guard::Unstable);
}

/// With probability `p_r` per slot, replaces a wrong cell by a uniform
/// candidate. Wrong cells without candidates stay as they are.
pub fn repair_op<M, R>(x: &mut ReplacementScheme, p_r: f64, ctx: &RepairContext<'_, M>, rng: &mut R)
where
    M: ConstraintModel + ?Sized,
    R: Rng + ?Sized,
{
    reassign(x, p_r, ctx, rng, Guard::Wrong);
}
