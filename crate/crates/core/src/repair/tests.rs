use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::cnet::{inspect_level, Threshold};
use crate::corpus::extract_training_set;
use crate::level::{parse_level, Level, Position, TileSet, TileType};
use crate::lookup::{Fallback, LookupModel};

const CLEAN: &str = "\
----------
---<>-----
---[]--E--
XXXXXXXXXX";

fn alphabet() -> TileSet {
    [TileType::GROUND, TileType::EMPTY, TileType::ENEMY]
        .into_iter()
        .collect()
}

fn model(seed: u64) -> LookupModel {
    let ts = extract_training_set(&[parse_level(CLEAN).unwrap()]).unwrap();
    LookupModel::from_training_set(
        &ts,
        Fallback::Hashed {
            alphabet: alphabet(),
            seed,
        },
    )
}

fn broken() -> Level {
    let mut l = parse_level(CLEAN).unwrap();
    l.set(Position { row: 3, col: 6 }, TileType::EMPTY);
    l.set(Position { row: 0, col: 8 }, TileType::GROUND);
    l
}

fn ctx<'m>(level: Level, m: &'m LookupModel, params: &GAParams) -> RepairContext<'m, LookupModel> {
    RepairContext::new(level, m, Threshold::DEFAULT, params)
}

#[test]
fn identity_fitness_counts_only_original_defects() {
    let m = model(1);
    let params = GAParams::default();
    let c = ctx(broken(), &m, &params);
    let map = inspect_level(&m, c.original(), Threshold::DEFAULT);
    let e = c.evaluate(&ReplacementScheme::identity(&c));
    assert_eq!(e.replaced, 0);
    assert_eq!(e.wrong, map.wrong_count());
    assert_eq!(e.fitness, 5.0 * map.wrong_count() as f64 + map.unstable_value() as f64);
    assert!(e.wrong > 0);
}

#[test]
fn crossover_of_equal_parents_is_identity() {
    let m = model(1);
    let params = GAParams::default();
    let c = ctx(broken(), &m, &params);
    let x = ReplacementScheme::identity(&c);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (a, b) = crossover(&x, &x, &mut rng);
    assert_eq!(a, x);
    assert_eq!(b, x);
}

#[test]
fn crossover_keeps_slot_multisets_and_swaps_half() {
    let m = model(1);
    let params = GAParams::default();
    let c = ctx(broken(), &m, &params);
    let k = c.search_space().len();
    assert!(k >= 2);
    let x1 = ReplacementScheme::identity(&c);
    let mut x2 = x1.clone();
    for slot in 0..k {
        let t = if x1.get(slot) == TileType::COIN {
            TileType::ENEMY
        } else {
            TileType::COIN
        };
        x2.set(slot, t);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let trials = 4000;
    let mut swapped = 0usize;
    for _ in 0..trials {
        let (a, b) = crossover(&x1, &x2, &mut rng);
        for slot in 0..k {
            let mut got = [a.get(slot), b.get(slot)];
            let mut want = [x1.get(slot), x2.get(slot)];
            got.sort();
            want.sort();
            assert_eq!(got, want);
            swapped += (a.get(slot) != x1.get(slot)) as usize;
        }
    }
    let mean = swapped as f64 / trials as f64;
    let expected = k as f64 / 2.0;
    assert!(
        (mean - expected).abs() <= 0.05 * expected,
        "mean swaps {mean}, expected {expected}"
    );
}

#[test]
fn zero_probabilities_change_nothing() {
    let m = model(1);
    let params = GAParams::default();
    let c = ctx(broken(), &m, &params);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut x = ReplacementScheme::identity(&c);
    mutate(&mut x, 0.0, &c, &mut rng);
    repair_op(&mut x, 0.0, &c, &mut rng);
    assert_eq!(x, ReplacementScheme::identity(&c));
}

/// Candidates depend on height only, so replacing one cell never changes
/// another cell's verdict.
struct ByRow;

impl crate::cnet::ConstraintModel for ByRow {
    fn probabilities(&self, s: &crate::level::SurroundingInfo, h: usize) -> [f64; 11] {
        let mut p = [0.0; 11];
        match s.center_height {
            r if r + 1 == h => p[TileType::GROUND.index()] = 1.0,
            1 => {
                p[TileType::EMPTY.index()] = 0.5;
                p[TileType::COIN.index()] = 0.5;
            }
            _ => p[TileType::EMPTY.index()] = 1.0,
        }
        p
    }
}

const ROWS: &str = "------\n------\n------\nXX-XXX";

#[test]
fn repair_with_certainty_fixes_the_wrong_cell_only() {
    let params = GAParams::default();
    let c = RepairContext::new(parse_level(ROWS).unwrap(), &ByRow, Threshold::DEFAULT, &params);
    assert_eq!(c.search_space().len(), 7);
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = ReplacementScheme::identity(&c);
        repair_op(&mut x, 1.0, &c, &mut rng);
        let a = x.assignments(&c);
        assert_eq!(a.len(), 1);
        assert_eq!(a.get(&Position { row: 3, col: 2 }), Some(&TileType::GROUND));
    }
}

#[test]
fn mutation_draws_from_candidates_and_leaves_stable_cells() {
    let params = GAParams::default();
    let c = RepairContext::new(parse_level(ROWS).unwrap(), &ByRow, Threshold::DEFAULT, &params);
    let mut coins = 0;
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = ReplacementScheme::identity(&c);
        mutate(&mut x, 1.0, &c, &mut rng);
        for (p, t) in x.assignments(&c) {
            assert_eq!(p.row, 1);
            assert_eq!(t, TileType::COIN);
            coins += 1;
        }
    }
    // 50 sweeps over 6 unstable cells, each a fair coin between two types.
    assert!((100..200).contains(&coins), "{coins}");
}

#[test]
fn clean_level_short_circuits() {
    let params = GAParams::default();
    let c = RepairContext::new(
        parse_level("------\nXXXXXX").unwrap(),
        &ByRow,
        Threshold::DEFAULT,
        &params,
    );
    assert!(c.search_space().is_empty());
    assert_eq!(init_population(&c, &params), Err(RepairError::EmptySearchSpace));
    let r = evolve(&c, &params).unwrap();
    assert!(r.already_clean);
    assert_eq!(r.best.eval.replaced, 0);
    assert_eq!(r.repaired_level(&c), *c.original());
}

#[test]
fn initial_population_respects_candidates() {
    let m = model(2);
    let params = GAParams {
        p_r: 0.0,
        ..Default::default()
    };
    let c = ctx(broken(), &m, &params);
    let pop = init_population(&c, &params).unwrap();
    assert_eq!(pop.len(), params.population);
    for ind in &pop {
        for (slot, &pos) in c.search_space().iter().enumerate() {
            let cell = c.initial_map().get(pos);
            if cell.is_unstable() {
                assert!(cell.candidates.contains(ind.scheme.get(slot)));
            } else {
                assert_eq!(ind.scheme.get(slot), c.original().get(pos));
            }
        }
    }
}

#[test]
fn best_so_far_never_worsens() {
    let m = model(5);
    let params = GAParams {
        generations: 15,
        seed: 11,
        ..Default::default()
    };
    let c = ctx(broken(), &m, &params);
    let r = evolve(&c, &params).unwrap();
    assert_eq!(r.log.len(), 16);
    for w in r.log.windows(2) {
        assert!(w[1].best_fitness <= w[0].best_fitness);
    }
    assert_eq!(r.best.fitness(), r.log.last().unwrap().best_fitness);
    assert_eq!(r.best.eval, c.evaluate_full(&r.best.scheme));
}

#[test]
fn same_seed_same_result() {
    let m = model(6);
    let params = GAParams {
        seed: 42,
        ..Default::default()
    };
    let c = ctx(broken(), &m, &params);
    let a = evolve(&c, &params).unwrap();
    let b = evolve(&c, &params).unwrap();
    assert_eq!(a.best, b.best);
    assert_eq!(a.log, b.log);
    assert_eq!(a.population_fitness, b.population_fitness);
}

#[test]
fn changes_stay_inside_search_space() {
    let m = model(7);
    let params = GAParams {
        seed: 3,
        ..Default::default()
    };
    let c = ctx(broken(), &m, &params);
    let r = evolve(&c, &params).unwrap();
    let repaired = r.repaired_level(&c);
    for p in c.original().diff(&repaired).unwrap() {
        assert!(c.slot(p).is_some());
    }
    assert_eq!(r.best.scheme.assignments(&c).len(), r.best.eval.replaced);
}

#[test]
fn log_csv_round_trip() {
    let m = model(8);
    let params = GAParams {
        generations: 3,
        ..Default::default()
    };
    let c = ctx(broken(), &m, &params);
    let r = evolve(&c, &params).unwrap();
    let mut buf = Vec::new();
    r.write_log_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("generation,best_F,mean_F,wrong,replaced,UV"));
    assert_eq!(RepairResult::read_log_csv(&buf[..]).unwrap(), r.log);
}

#[test]
fn invalid_params_rejected() {
    let m = model(1);
    let params = GAParams {
        p_m0: -0.1,
        ..Default::default()
    };
    let c = ctx(broken(), &m, &params);
    assert!(matches!(evolve(&c, &params), Err(RepairError::InvalidParams(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn incremental_matches_full(seed in 0u64..1000, picks in proptest::collection::vec(0usize..3, 0..40)) {
        let m = model(seed);
        let params = GAParams::default();
        let c = ctx(broken(), &m, &params);
        let symbols: Vec<_> = alphabet().iter().collect();
        let mut x = ReplacementScheme::identity(&c);
        for (slot, pick) in picks.iter().enumerate().take(x.len()) {
            x.set(slot, symbols[*pick]);
        }
        prop_assert_eq!(c.evaluate(&x), c.evaluate_full(&x));
    }
}
