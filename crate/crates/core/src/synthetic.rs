//! Procedurally generated platformer levels in the 11-tile alphabet.
//!
//! Used when no real level corpus is at hand: the generator lays down ground
//! with gaps, block platforms with coins, enemies and pipes of several
//! heights, so the constraint network has pipe structure to learn.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::level::{Level, Position, TileType};

/// Row count of generated levels.
pub const LEVEL_HEIGHT: usize = 14;

const GROUND_ROWS: [usize; 2] = [12, 13];

struct Canvas {
    rows: Vec<Vec<u8>>,
}

impl Canvas {
    fn new(width: usize) -> Self {
        let mut rows = vec![vec![TileType::EMPTY.code(); width]; LEVEL_HEIGHT];
        for r in GROUND_ROWS {
            rows[r].fill(TileType::GROUND.code());
        }
        Canvas { rows }
    }

    fn put(&mut self, row: usize, col: usize, t: TileType) {
        self.rows[row][col] = t.code();
    }

    fn gap(&mut self, col: usize, len: usize) {
        for c in col..col + len {
            for r in GROUND_ROWS {
                self.put(r, c, TileType::EMPTY);
            }
        }
    }

    /// Pipe standing on the ground, `height` tiles tall including the top.
    fn pipe(&mut self, col: usize, height: usize) {
        let top = GROUND_ROWS[0] - height;
        self.put(top, col, TileType::PIPE_TOP_LEFT);
        self.put(top, col + 1, TileType::PIPE_TOP_RIGHT);
        for r in top + 1..GROUND_ROWS[0] {
            self.put(r, col, TileType::PIPE_LEFT);
            self.put(r, col + 1, TileType::PIPE_RIGHT);
        }
    }

    fn into_level(self) -> Level {
        Level::from_codes(&self.rows).expect("generated rows are rectangular")
    }
}

/// One generated level of the given width, deterministic under `seed`.
///
/// Features are placed so that almost every 3×3 window pins down its center:
/// block runs are of one type and always carry a coin row, and enemies only
/// ever stand on pipes. The remaining ambiguity is an enemy or nothing on
/// top of a pipe.
pub fn generate_level(width: usize, seed: u64) -> Level {
    let width = width.max(8);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut canvas = Canvas::new(width);

    // Plain run-up and run-out so level edges look alike across the corpus.
    let mut col = 4;
    let end = width.saturating_sub(4);
    while col + 6 < end {
        let used = match rng.gen_range(0..3) {
            0 => {
                let h = rng.gen_range(2..=4);
                canvas.pipe(col, h);
                if rng.gen_bool(0.5) {
                    canvas.put(GROUND_ROWS[0] - h - 1, col, TileType::ENEMY);
                }
                2
            }
            1 => {
                let len = rng.gen_range(2..=3);
                canvas.gap(col, len);
                len
            }
            _ => {
                let len = rng.gen_range(3..=5);
                let block = match rng.gen_range(0..3) {
                    0 => TileType::QUESTION_FULL,
                    1 => TileType::QUESTION_EMPTY,
                    _ => TileType::BREAKABLE,
                };
                for c in col..col + len {
                    canvas.put(8, c, block);
                    canvas.put(7, c, TileType::COIN);
                }
                len
            }
        };
        col += used + rng.gen_range(2..=4);
    }
    canvas.into_level()
}

/// A small corpus of generated levels.
pub fn generate_corpus(count: usize, width: usize, seed: u64) -> Vec<Level> {
    (0..count as u64)
        .map(|i| generate_level(width, seed.wrapping_mul(1_000_003).wrapping_add(i)))
        .collect()
}

/// A segment with the kind of broken pipes an image generator produces:
/// doubled halves, missing halves, a pipe body without a top and a top
/// without a body. The background is plain ground and sky.
pub fn broken_pipes_level() -> Level {
    let rows = [
        "------------------------------------",
        "------------------------------------",
        "------------------------------------",
        "------------------------------------",
        "------------------------------------",
        "------------------------------------",
        "------------------------------------",
        "------------------------------------",
        "------------------------------------",
        "------<<-------------------<>-------",
        "------[]--------<>---------[[-------",
        "------[]-----[]-[]----<]---[]-------",
        "XXXXXXXXXXXXXXXXXXXXXXXXXXXXXXXXXXXX",
        "XXXXXXXXXXXXXXXXXXXXXXXXXXXXXXXXXXXX",
    ];
    crate::level::parse_level(&rows.join("\n")).expect("fixture is well formed")
}

/// Cells that a person would mark as broken in [`broken_pipes_level`].
pub fn broken_pipes_defects() -> Vec<Position> {
    vec![
        Position::new(9, 7),
        Position::new(11, 13),
        Position::new(11, 14),
        Position::new(11, 22),
        Position::new(11, 23),
        Position::new(10, 28),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::extract_training_set;

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(generate_level(60, 5), generate_level(60, 5));
        assert_ne!(generate_level(60, 5), generate_level(60, 6));
    }

    #[test]
    fn pipes_are_well_formed() {
        for seed in 0..10 {
            let l = generate_level(80, seed);
            assert_eq!(l.height(), LEVEL_HEIGHT);
            for p in l.positions() {
                let t = l.get(p);
                if t == TileType::PIPE_TOP_LEFT || t == TileType::PIPE_LEFT {
                    let right = l.get(Position::new(p.row, p.col + 1));
                    assert_eq!(right.code(), t.code() + 1);
                }
            }
        }
    }

    #[test]
    fn corpus_has_pipes_and_moderate_size() {
        let corpus = generate_corpus(6, 100, 1);
        let ts = extract_training_set(&corpus).unwrap();
        assert!(ts.samples().iter().any(|c| c.center() == TileType::PIPE_TOP_LEFT));
        assert!(ts.len() < 1500, "{} samples", ts.len());
    }

    #[test]
    fn fixture_defects_are_not_in_a_clean_corpus() {
        let ts = extract_training_set(&generate_corpus(6, 100, 1)).unwrap();
        let l = broken_pipes_level();
        for p in broken_pipes_defects() {
            let c = l.combination_at(p.row, p.col).unwrap();
            assert!(!ts.contains(&c), "{p:?}");
        }
    }
}
