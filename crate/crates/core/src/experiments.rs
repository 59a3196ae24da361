//! The classification experiments: legal-tile elimination, illegal-tile
//! detection and unstable-tile statistics, each with true and faked
//! surroundings.

use std::fs::File;
use std::io;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cnet::{candidates_from, ConstraintModel, Threshold};
use crate::corpus::{fake_surroundings_with, illegal_test_set, legal_test_set, LabeledExample, TrainingSet};
use crate::level::{SurroundingInfo, TileSet, NUM_TILE_TYPES};

/// The four columns of every table: true surroundings, then 1 to 3 faked tiles.
pub const COLUMNS: [&str; 4] = ["True", "Fake1", "Fake2", "Fake3"];

/// Number of independently faked repetitions in the unstable experiment.
pub const UNSTABLE_SETS: usize = 3;

#[derive(Clone, Copy)]
enum Kind {
    Legal = 0,
    Illegal = 1,
    Unstable = 2,
}

fn faked(s: &SurroundingInfo, k: usize, seed: u64, kind: Kind, set: usize, index: usize) -> SurroundingInfo {
    if k == 0 {
        return *s;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((kind as u64) << 56) | ((set as u64) << 48) | ((k as u64) << 40) | index as u64);
    fake_surroundings_with(s, k, &mut rng).expect("k is at most 3")
}

fn candidates<M: ConstraintModel + ?Sized>(model: &M, s: &SurroundingInfo, h: usize, theta: Threshold) -> TileSet {
    candidates_from(&model.probabilities(s, h), theta)
}

/// Legal-elimination row: how often a legal center drops out of the candidates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LegalRow {
    pub tile: u8,
    pub total: usize,
    pub true_elm: usize,
    pub true_rate: f64,
    pub fake1_elm: usize,
    pub fake1_rate: f64,
    pub fake2_elm: usize,
    pub fake2_rate: f64,
    pub fake3_elm: usize,
    pub fake3_rate: f64,
}

/// Illegal-detection row: how often an illegal center is kept out of the candidates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IllegalRow {
    pub tile: u8,
    pub total: usize,
    pub true_det: usize,
    pub true_rate: f64,
    pub fake1_det: usize,
    pub fake1_rate: f64,
    pub fake2_det: usize,
    pub fake2_rate: f64,
    pub fake3_det: usize,
    pub fake3_rate: f64,
}

/// Unstable tiles (`U`) and unstable value (`UV`) over all distinct true
/// surroundings. Only the first set carries the original and true columns.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnstableRow {
    pub set: usize,
    pub tiles: usize,
    pub original_u: Option<usize>,
    pub original_uv: Option<usize>,
    pub true_u: Option<usize>,
    pub true_uv: Option<usize>,
    pub fake1_u: usize,
    pub fake1_uv: usize,
    pub fake2_u: usize,
    pub fake2_uv: usize,
    pub fake3_u: usize,
    pub fake3_uv: usize,
}

/// Aggregates per column; unstable figures are means over the sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub column: String,
    pub legal_elimination_rate: f64,
    pub illegal_detection_rate: f64,
    pub unstable_tiles: f64,
    pub unstable_value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub legal: Vec<LegalRow>,
    pub illegal: Vec<IllegalRow>,
    pub unstable: Vec<UnstableRow>,
    pub summary: Vec<SummaryRow>,
}

fn rate(n: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        n as f64 / total as f64
    }
}

/// Per tile type and column, how many examples satisfy `hit`.
fn tally<M, F>(
    model: &M,
    examples: &[LabeledExample],
    h: usize,
    theta: Threshold,
    seed: u64,
    kind: Kind,
    hit: F,
) -> ([usize; NUM_TILE_TYPES], [[usize; NUM_TILE_TYPES]; 4])
where
    M: ConstraintModel + ?Sized,
    F: Fn(bool) -> bool + Sync,
{
    let per_example: Vec<[bool; 4]> = examples
        .par_iter()
        .enumerate()
        .map(|(i, e)| {
            let mut out = [false; 4];
            for (k, o) in out.iter_mut().enumerate() {
                let s = faked(&e.surrounding, k, seed, kind, 0, i);
                *o = hit(candidates(model, &s, h, theta).contains(e.center));
            }
            out
        })
        .collect();
    let mut totals = [0; NUM_TILE_TYPES];
    let mut counts = [[0; NUM_TILE_TYPES]; 4];
    for (e, hits) in examples.iter().zip(per_example) {
        totals[e.center.index()] += 1;
        for k in 0..4 {
            counts[k][e.center.index()] += hits[k] as usize;
        }
    }
    (totals, counts)
}

pub fn legal_table<M: ConstraintModel + ?Sized>(
    model: &M,
    ts: &TrainingSet,
    theta: Threshold,
    seed: u64,
) -> Vec<LegalRow> {
    let examples = legal_test_set(ts);
    let (totals, c) = tally(model, &examples, ts.level_height(), theta, seed, Kind::Legal, |kept| {
        !kept
    });
    (0..NUM_TILE_TYPES)
        .filter(|&t| totals[t] > 0)
        .map(|t| LegalRow {
            tile: t as u8,
            total: totals[t],
            true_elm: c[0][t],
            true_rate: rate(c[0][t], totals[t]),
            fake1_elm: c[1][t],
            fake1_rate: rate(c[1][t], totals[t]),
            fake2_elm: c[2][t],
            fake2_rate: rate(c[2][t], totals[t]),
            fake3_elm: c[3][t],
            fake3_rate: rate(c[3][t], totals[t]),
        })
        .collect()
}

pub fn illegal_table<M: ConstraintModel + ?Sized>(
    model: &M,
    ts: &TrainingSet,
    theta: Threshold,
    seed: u64,
) -> Vec<IllegalRow> {
    let examples = illegal_test_set(ts);
    let (totals, c) = tally(
        model,
        &examples,
        ts.level_height(),
        theta,
        seed,
        Kind::Illegal,
        |kept| !kept,
    );
    (0..NUM_TILE_TYPES)
        .filter(|&t| totals[t] > 0)
        .map(|t| IllegalRow {
            tile: t as u8,
            total: totals[t],
            true_det: c[0][t],
            true_rate: rate(c[0][t], totals[t]),
            fake1_det: c[1][t],
            fake1_rate: rate(c[1][t], totals[t]),
            fake2_det: c[2][t],
            fake2_rate: rate(c[2][t], totals[t]),
            fake3_det: c[3][t],
            fake3_rate: rate(c[3][t], totals[t]),
        })
        .collect()
}

fn unstable_stats(sets: impl Iterator<Item = TileSet>) -> (usize, usize) {
    sets.filter(|c| c.len() >= 2)
        .fold((0, 0), |(u, uv), c| (u + 1, uv + c.len()))
}

pub fn unstable_table<M: ConstraintModel + ?Sized>(
    model: &M,
    ts: &TrainingSet,
    theta: Threshold,
    seed: u64,
) -> Vec<UnstableRow> {
    let h = ts.level_height();
    let surroundings: Vec<SurroundingInfo> = ts.surroundings().copied().collect();
    let column = |set: usize, k: usize| -> (usize, usize) {
        let sets: Vec<TileSet> = surroundings
            .par_iter()
            .enumerate()
            .map(|(i, s)| candidates(model, &faked(s, k, seed, Kind::Unstable, set, i), h, theta))
            .collect();
        unstable_stats(sets.into_iter())
    };
    let (orig_u, orig_uv) = unstable_stats(ts.index().values().copied());
    let (true_u, true_uv) = column(0, 0);
    (0..UNSTABLE_SETS)
        .map(|set| {
            let f: Vec<(usize, usize)> = (1..=3).map(|k| column(set, k)).collect();
            let first = set == 0;
            UnstableRow {
                set: set + 1,
                tiles: surroundings.len(),
                original_u: first.then_some(orig_u),
                original_uv: first.then_some(orig_uv),
                true_u: first.then_some(true_u),
                true_uv: first.then_some(true_uv),
                fake1_u: f[0].0,
                fake1_uv: f[0].1,
                fake2_u: f[1].0,
                fake2_uv: f[1].1,
                fake3_u: f[2].0,
                fake3_uv: f[2].1,
            }
        })
        .collect()
}

fn summarize(legal: &[LegalRow], illegal: &[IllegalRow], unstable: &[UnstableRow]) -> Vec<SummaryRow> {
    let legal_total: usize = legal.iter().map(|r| r.total).sum();
    let illegal_total: usize = illegal.iter().map(|r| r.total).sum();
    let legal_counts = |k: usize| -> usize {
        legal
            .iter()
            .map(|r| [r.true_elm, r.fake1_elm, r.fake2_elm, r.fake3_elm][k])
            .sum()
    };
    let illegal_counts = |k: usize| -> usize {
        illegal
            .iter()
            .map(|r| [r.true_det, r.fake1_det, r.fake2_det, r.fake3_det][k])
            .sum()
    };
    let unstable_mean = |k: usize| -> (f64, f64) {
        let rows: Vec<(usize, usize)> = unstable
            .iter()
            .filter_map(|r| match k {
                0 => r.true_u.zip(r.true_uv),
                1 => Some((r.fake1_u, r.fake1_uv)),
                2 => Some((r.fake2_u, r.fake2_uv)),
                _ => Some((r.fake3_u, r.fake3_uv)),
            })
            .collect();
        let n = rows.len().max(1) as f64;
        (
            rows.iter().map(|r| r.0 as f64).sum::<f64>() / n,
            rows.iter().map(|r| r.1 as f64).sum::<f64>() / n,
        )
    };
    COLUMNS
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let (u, uv) = unstable_mean(k);
            SummaryRow {
                column: name.to_string(),
                legal_elimination_rate: rate(legal_counts(k), legal_total),
                illegal_detection_rate: rate(illegal_counts(k), illegal_total),
                unstable_tiles: u,
                unstable_value: uv,
            }
        })
        .collect()
}

/// Runs all three experiments. Fakes are reproducible per example under `seed`.
pub fn run_experiments<M: ConstraintModel + ?Sized>(
    model: &M,
    ts: &TrainingSet,
    theta: Threshold,
    seed: u64,
) -> ExperimentReport {
    let legal = legal_table(model, ts, theta, seed);
    let illegal = illegal_table(model, ts, theta, seed);
    let unstable = unstable_table(model, ts, theta, seed);
    let summary = summarize(&legal, &illegal, &unstable);
    ExperimentReport {
        legal,
        illegal,
        unstable,
        summary,
    }
}

fn write_rows<T: Serialize, W: io::Write>(rows: &[T], writer: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<T: for<'de> Deserialize<'de>, R: io::Read>(reader: R) -> Result<Vec<T>, csv::Error> {
    csv::Reader::from_reader(reader).deserialize().collect()
}

impl ExperimentReport {
    pub fn write_legal_csv<W: io::Write>(&self, w: W) -> Result<(), csv::Error> {
        write_rows(&self.legal, w)
    }

    pub fn write_illegal_csv<W: io::Write>(&self, w: W) -> Result<(), csv::Error> {
        write_rows(&self.illegal, w)
    }

    pub fn write_unstable_csv<W: io::Write>(&self, w: W) -> Result<(), csv::Error> {
        write_rows(&self.unstable, w)
    }

    pub fn write_summary_csv<W: io::Write>(&self, w: W) -> Result<(), csv::Error> {
        write_rows(&self.summary, w)
    }

    /// Writes `legal.csv`, `illegal.csv`, `unstable.csv` and `summary.csv` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<(), csv::Error> {
        std::fs::create_dir_all(dir)?;
        self.write_legal_csv(File::create(dir.join("legal.csv"))?)?;
        self.write_illegal_csv(File::create(dir.join("illegal.csv"))?)?;
        self.write_unstable_csv(File::create(dir.join("unstable.csv"))?)?;
        self.write_summary_csv(File::create(dir.join("summary.csv"))?)?;
        Ok(())
    }
}
