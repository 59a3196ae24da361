//! Training sets built from real levels, the labeled test sets used to
//! evaluate a trained network, and random corruption of levels and
//! surroundings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::level::{
    parse_level, Combination, Level, LevelError, Position, SurroundingInfo, TileSet, TileType, NUM_TILE_TYPES,
};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus contains no levels")]
    EmptyCorpus,
    #[error("cannot replace {k} of 8 neighbors")]
    KTooLarge { k: usize },
    #[error("cannot destroy {count} cells of a level with {cells} cells")]
    CountTooLarge { count: usize, cells: usize },
    #[error("destruction count must be at least 1")]
    ZeroCount,
    #[error("no alternative tile type for cell ({}, {})", .0.row, .0.col)]
    NoAlternative(Position),
    #[error("{path}: {source}")]
    Level {
        path: PathBuf,
        #[source]
        source: LevelError,
    },
    #[error("malformed training set dump at line {line}: {reason}")]
    MalformedDump { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// De-duplicated combinations of a corpus plus the surrounding → centers index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainingSet {
    samples: Vec<Combination>,
    index: BTreeMap<SurroundingInfo, TileSet>,
    level_height: usize,
}

impl TrainingSet {
    /// Builds the set from explicit combinations. `level_height` is the row
    /// count used to normalize heights when the set is fed to a network.
    pub fn from_combinations<I>(combinations: I, level_height: usize) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = Combination>,
    {
        let samples: BTreeSet<Combination> = combinations.into_iter().collect();
        if samples.is_empty() {
            return Err(CorpusError::EmptyCorpus);
        }
        let mut index: BTreeMap<SurroundingInfo, TileSet> = BTreeMap::new();
        for c in &samples {
            index.entry(c.surrounding()).or_default().insert(c.center());
        }
        Ok(TrainingSet {
            samples: samples.into_iter().collect(),
            index,
            level_height: level_height.max(1),
        })
    }

    /// Sorted, unique combinations.
    pub fn samples(&self) -> &[Combination] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn index(&self) -> &BTreeMap<SurroundingInfo, TileSet> {
        &self.index
    }

    /// Largest level height in the corpus.
    pub fn level_height(&self) -> usize {
        self.level_height
    }

    /// Centers observed with `s`; empty for a fake surrounding.
    pub fn centers(&self, s: &SurroundingInfo) -> TileSet {
        self.index.get(s).copied().unwrap_or_default()
    }

    pub fn contains(&self, c: &Combination) -> bool {
        self.centers(&c.surrounding()).contains(c.center())
    }

    pub fn surroundings(&self) -> impl Iterator<Item = &SurroundingInfo> {
        self.index.keys()
    }

    /// One combination per line: `height,t0,...,t8`.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# level_height={}", self.level_height);
        for c in &self.samples {
            let _ = write!(out, "{}", c.center_height);
            for t in &c.types {
                let _ = write!(out, ",{}", t.code());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Self, CorpusError> {
        let mut level_height = None;
        let mut combos = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(h) = rest.trim().strip_prefix("level_height=") {
                    level_height = h.parse::<usize>().ok();
                }
                continue;
            }
            let bad = |reason: &str| CorpusError::MalformedDump {
                line: i + 1,
                reason: reason.to_string(),
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 10 {
                return Err(bad("expected 10 comma-separated fields"));
            }
            let center_height = fields[0].parse().map_err(|_| bad("bad height"))?;
            let mut types = [TileType::OUTER; 9];
            for (slot, f) in types.iter_mut().zip(&fields[1..]) {
                let code: u8 = f.parse().map_err(|_| bad("bad tile code"))?;
                *slot = match code {
                    11 => TileType::OUTER,
                    c => TileType::concrete(c).ok_or_else(|| bad("tile code out of range"))?,
                };
            }
            if types[4].is_outer() {
                return Err(bad("center tile cannot be OUTER"));
            }
            combos.push(Combination { center_height, types });
        }
        let h = level_height.unwrap_or_else(|| combos.iter().map(|c| c.center_height + 1).max().unwrap_or(1));
        Self::from_combinations(combos, h)
    }
}

/// Every 3×3 window of every level, de-duplicated.
pub fn extract_training_set(levels: &[Level]) -> Result<TrainingSet, CorpusError> {
    if levels.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let combos = levels.iter().flat_map(|l| {
        l.positions()
            .map(move |p| l.combination_at(p.row, p.col).expect("position in bounds"))
    });
    let height = levels.iter().map(Level::height).max().unwrap_or(1);
    TrainingSet::from_combinations(combos, height)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Legal,
    Illegal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LabeledExample {
    pub surrounding: SurroundingInfo,
    pub center: TileType,
    pub label: Label,
}

/// One legal example per training combination.
pub fn legal_test_set(ts: &TrainingSet) -> Vec<LabeledExample> {
    ts.samples
        .iter()
        .map(|c| LabeledExample {
            surrounding: c.surrounding(),
            center: c.center(),
            label: Label::Legal,
        })
        .collect()
}

/// Every (true surrounding, center) pair that never occurs in training.
pub fn illegal_test_set(ts: &TrainingSet) -> Vec<LabeledExample> {
    ts.index
        .iter()
        .flat_map(|(s, legal)| {
            legal.complement().iter().map(move |t| LabeledExample {
                surrounding: *s,
                center: t,
                label: Label::Illegal,
            })
        })
        .collect()
}

/// Replaces exactly `k` distinct neighbor slots of `s` with a different
/// concrete type each. Height is kept.
pub fn fake_surroundings(s: &SurroundingInfo, k: usize, seed: u64) -> Result<SurroundingInfo, CorpusError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    fake_surroundings_with(s, k, &mut rng)
}

pub fn fake_surroundings_with<R: Rng + ?Sized>(
    s: &SurroundingInfo,
    k: usize,
    rng: &mut R,
) -> Result<SurroundingInfo, CorpusError> {
    if k > 8 {
        return Err(CorpusError::KTooLarge { k });
    }
    let mut out = *s;
    let slots = (0..8).choose_multiple(rng, k);
    for slot in slots {
        out.neighbors[slot] =
            random_other_type(out.neighbors[slot], TileSet::ALL, rng).expect("ten alternatives always exist");
    }
    Ok(out)
}

fn random_other_type<R: Rng + ?Sized>(current: TileType, alphabet: TileSet, rng: &mut R) -> Option<TileType> {
    let mut options = alphabet;
    options.remove(current);
    if options.is_empty() {
        return None;
    }
    options.nth(rng.gen_range(0..options.len()))
}

/// Copy of `level` with `count` distinct random cells changed to a different
/// random concrete type.
pub fn destroy_level(level: &Level, count: usize, seed: u64) -> Result<Level, CorpusError> {
    let cells: Vec<Position> = level.positions().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    destroy_cells(level, &cells, count, TileSet::ALL, &mut rng)
}

/// Destroys `count` cells drawn from `cells`, replacing each one by a member
/// of `alphabet` other than its current tile.
pub fn destroy_cells<R: Rng + ?Sized>(
    level: &Level,
    cells: &[Position],
    count: usize,
    alphabet: TileSet,
    rng: &mut R,
) -> Result<Level, CorpusError> {
    if count == 0 {
        return Err(CorpusError::ZeroCount);
    }
    let unique: BTreeSet<Position> = cells.iter().copied().filter(|&p| level.contains(p)).collect();
    if count > unique.len() {
        return Err(CorpusError::CountTooLarge {
            count,
            cells: unique.len(),
        });
    }
    let pool: Vec<Position> = unique.into_iter().collect();
    let chosen: Vec<Position> = pool.choose_multiple(rng, count).copied().collect();
    let mut out = level.clone();
    for p in chosen {
        let t = random_other_type(level.get(p), alphabet, rng).ok_or(CorpusError::NoAlternative(p))?;
        out.set(p, t);
    }
    Ok(out)
}

/// Cells whose surrounding 8 neighbors contain a pipe tile.
pub fn pipe_adjacent_cells(level: &Level) -> Vec<Position> {
    level
        .positions()
        .filter(|&p| level.surrounding_at(p).map(|s| s.has_pipe()).unwrap_or(false))
        .collect()
}

/// The corpus level that shows every pipe type, preferring the one with the
/// most pipe tiles; earlier levels win ties.
pub fn pipe_showcase(levels: &[Level]) -> Option<Level> {
    let pipe_types = [
        TileType::PIPE_TOP_LEFT,
        TileType::PIPE_TOP_RIGHT,
        TileType::PIPE_LEFT,
        TileType::PIPE_RIGHT,
    ];
    levels
        .iter()
        .filter(|l| pipe_types.iter().all(|&t| l.positions().any(|p| l.get(p) == t)))
        .map(|l| (l, l.positions().filter(|&p| l.get(p).is_pipe()).count()))
        .reduce(|a, b| if b.1 > a.1 { b } else { a })
        .map(|(l, _)| l.clone())
}

/// Reads every `.txt` file of `dir` (sorted by file name) as a level.
pub fn load_corpus_dir(dir: &Path) -> Result<Vec<(PathBuf, Level)>, CorpusError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "txt"))
        .collect();
    paths.sort();
    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        let text = fs::read_to_string(&path)?;
        let level = parse_level(&text).map_err(|source| CorpusError::Level {
            path: path.clone(),
            source,
        })?;
        out.push((path, level));
    }
    if out.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    Ok(out)
}

/// Per-center-type tallies of a labeled test set.
pub fn count_by_center(examples: &[LabeledExample]) -> [usize; NUM_TILE_TYPES] {
    let mut counts = [0; NUM_TILE_TYPES];
    for e in examples {
        counts[e.center.index()] += 1;
    }
    counts
}
