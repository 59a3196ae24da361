//! The generational loop.
//!
//! Randomness: one seed drives several ChaCha8 streams of the same key.
//! Stream 0 makes the population-level draws (parent choice, crossover,
//! survivor tournament). Initial individual `k` uses stream `k + 1`, and
//! offspring `k` of generation `g` uses stream `(g << 32) | (k + 1)`, so
//! per-offspring work can run in parallel without changing results.

use std::time::Instant;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::context::{Individual, RepairContext, ReplacementScheme};
use super::ops::{crossover, mutate, repair_op};
use super::params::GAParams;
use super::selection::{parent_probs, round_robin_select};
use super::RepairError;
use crate::cnet::ConstraintModel;
use crate::level::Level;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn offspring_stream(seed: u64, generation: usize, k: usize) -> ChaCha8Rng {
    stream(seed, ((generation as u64) << 32) | (k as u64 + 1))
}

/// Random initial population: every unstable slot gets a uniform member of
/// its original candidate set, then one repair sweep runs.
pub fn init_population<M: ConstraintModel + ?Sized>(
    ctx: &RepairContext<'_, M>,
    params: &GAParams,
) -> Result<Vec<Individual>, RepairError> {
    if ctx.search_space().is_empty() {
        return Err(RepairError::EmptySearchSpace);
    }
    params.validate()?;
    Ok((0..params.population)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(params.seed, k as u64 + 1);
            let mut x = ReplacementScheme::identity(ctx);
            for (slot, &pos) in ctx.search_space().iter().enumerate() {
                let cell = ctx.initial_map().get(pos);
                if cell.is_unstable() {
                    let c = cell.candidates;
                    x.set(slot, c.nth(rng.gen_range(0..c.len())).expect("non-empty"));
                }
            }
            repair_op(&mut x, params.p_r, ctx, &mut rng);
            Individual::evaluated(x, ctx)
        })
        .collect())
}

/// One row of the evolution log.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    /// Best fitness found so far.
    #[serde(rename = "best_F")]
    pub best_fitness: f64,
    /// Mean fitness of the population after selection.
    #[serde(rename = "mean_F")]
    pub mean_fitness: f64,
    pub wrong: usize,
    pub replaced: usize,
    #[serde(rename = "UV")]
    pub unstable_value: usize,
}

#[derive(Clone, Debug)]
pub struct RepairResult {
    pub best: Individual,
    pub log: Vec<GenerationRecord>,
    /// The level had nothing to repair; `best` is the identity.
    pub already_clean: bool,
    /// Every individual evaluated, per generation, as fitness values.
    pub population_fitness: Vec<Vec<f64>>,
}

impl RepairResult {
    pub fn repaired_level<M: ConstraintModel + ?Sized>(&self, ctx: &RepairContext<'_, M>) -> Level {
        self.best.scheme.materialize(ctx)
    }

    /// Evolution log as CSV: `generation,best_F,mean_F,wrong,replaced,UV`.
    pub fn write_log_csv<W: std::io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.log {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_log_csv<R: std::io::Read>(reader: R) -> Result<Vec<GenerationRecord>, csv::Error> {
        csv::Reader::from_reader(reader).deserialize().collect()
    }
}

fn record(generation: usize, best: &Individual, population: &[Individual]) -> GenerationRecord {
    let mean = population.iter().map(Individual::fitness).sum::<f64>() / population.len().max(1) as f64;
    GenerationRecord {
        generation,
        best_fitness: best.fitness(),
        mean_fitness: mean,
        wrong: best.eval.wrong,
        replaced: best.eval.replaced,
        unstable_value: best.eval.unstable_value,
    }
}

fn draw_parents<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> (usize, usize) {
    let first = WeightedIndex::new(probs).expect("positive weights").sample(rng);
    let mut rest = probs.to_vec();
    rest[first] = 0.0;
    let second = WeightedIndex::new(&rest).expect("two or more parents").sample(rng);
    (first, second)
}

/// Runs the genetic algorithm until the generation cap or time limit.
pub fn evolve<M: ConstraintModel + ?Sized>(
    ctx: &RepairContext<'_, M>,
    params: &GAParams,
) -> Result<RepairResult, RepairError> {
    params.validate()?;
    let started = Instant::now();
    let mut population = match init_population(ctx, params) {
        Ok(p) => p,
        Err(RepairError::EmptySearchSpace) => {
            let best = Individual::evaluated(ReplacementScheme::identity(ctx), ctx);
            return Ok(RepairResult {
                log: vec![record(0, &best, std::slice::from_ref(&best))],
                population_fitness: vec![vec![best.fitness()]],
                best,
                already_clean: true,
            });
        }
        Err(e) => return Err(e),
    };

    let n = params.population;
    let p_m1 = params.mutation_rate(ctx.search_space().len());
    let mut rng = stream(params.seed, 0);
    let mut best = best_of(&population).clone();
    let mut log = vec![record(0, &best, &population)];
    let mut population_fitness = vec![population.iter().map(Individual::fitness).collect()];

    for generation in 1..=params.generations {
        if params.time_limit.is_some_and(|limit| started.elapsed() >= limit) {
            break;
        }
        let fitness: Vec<f64> = population.iter().map(Individual::fitness).collect();
        let probs = parent_probs(&fitness);

        let mut children = Vec::with_capacity(n + 1);
        while children.len() < n {
            let (i, j) = draw_parents(&probs, &mut rng);
            let (a, b) = crossover(&population[i].scheme, &population[j].scheme, &mut rng);
            children.push(a);
            children.push(b);
        }
        children.truncate(n);

        let offspring: Vec<Individual> = children
            .into_par_iter()
            .enumerate()
            .map(|(k, mut x)| {
                let mut local = offspring_stream(params.seed, generation, k);
                if local.gen_bool(params.p_m0) {
                    mutate(&mut x, p_m1, ctx, &mut local);
                }
                repair_op(&mut x, params.p_r, ctx, &mut local);
                Individual::evaluated(x, ctx)
            })
            .collect();

        let mut pool = population;
        pool.extend(offspring);
        let pool_fitness: Vec<f64> = pool.iter().map(Individual::fitness).collect();
        population_fitness.push(pool_fitness.clone());
        let candidate = best_of(&pool);
        if candidate.fitness() < best.fitness() {
            best = candidate.clone();
        }
        let keep = round_robin_select(&pool_fitness, n, params.rrt_m, &mut rng);
        let mut slots: Vec<Option<Individual>> = pool.into_iter().map(Some).collect();
        population = keep
            .into_iter()
            .map(|i| slots[i].take().expect("survivor chosen once"))
            .collect();

        log.push(record(generation, &best, &population));
    }

    Ok(RepairResult {
        best,
        log,
        already_clean: false,
        population_fitness,
    })
}

fn best_of(population: &[Individual]) -> &Individual {
    population
        .iter()
        .reduce(|a, b| if b.fitness() < a.fitness() { b } else { a })
        .expect("non-empty population")
}
