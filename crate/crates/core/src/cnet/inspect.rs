use rayon::prelude::*;

use super::{ConstraintModel, Threshold};
use crate::level::{Level, Position, SurroundingInfo, TileSet, TileType, NUM_TILE_TYPES};

/// Types whose predicted probability reaches the threshold.
pub fn candidate_types<M: ConstraintModel + ?Sized>(
    model: &M,
    s: &SurroundingInfo,
    level_height: usize,
    theta: Threshold,
) -> TileSet {
    candidates_from(&model.probabilities(s, level_height), theta)
}

pub fn candidates_from(probs: &[f64; NUM_TILE_TYPES], theta: Threshold) -> TileSet {
    TileType::all().filter(|t| probs[t.index()] >= theta.value()).collect()
}

/// Model verdict for one cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellInspection {
    pub tile: TileType,
    pub probs: [f64; NUM_TILE_TYPES],
    pub candidates: TileSet,
}

impl CellInspection {
    /// The current tile is not a candidate.
    pub fn is_wrong(&self) -> bool {
        !self.candidates.contains(self.tile)
    }

    /// Two or more candidates.
    pub fn is_unstable(&self) -> bool {
        self.candidates.len() >= 2
    }

    /// This cell's term of the unstable value.
    pub fn unstable_contribution(&self) -> usize {
        if self.is_unstable() {
            self.candidates.len()
        } else {
            0
        }
    }
}

pub fn inspect_cell<M: ConstraintModel + ?Sized>(
    model: &M,
    level: &Level,
    pos: Position,
    theta: Threshold,
) -> CellInspection {
    let s = level.surrounding_at(pos).expect("position inside level");
    let probs = model.probabilities(&s, level.height());
    CellInspection {
        tile: level.get(pos),
        probs,
        candidates: candidates_from(&probs, theta),
    }
}

/// Per-cell inspection of a whole level.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateMap {
    height: usize,
    width: usize,
    theta: Threshold,
    cells: Vec<CellInspection>,
}

impl CandidateMap {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn theta(&self) -> Threshold {
        self.theta
    }

    pub fn get(&self, pos: Position) -> &CellInspection {
        &self.cells[pos.row * self.width + pos.col]
    }

    pub fn cells(&self) -> impl Iterator<Item = (Position, &CellInspection)> {
        let w = self.width;
        self.cells
            .iter()
            .enumerate()
            .map(move |(i, c)| (Position::new(i / w, i % w), c))
    }

    pub fn wrong_positions(&self) -> Vec<Position> {
        self.cells().filter(|(_, c)| c.is_wrong()).map(|(p, _)| p).collect()
    }

    pub fn unstable_positions(&self) -> Vec<Position> {
        self.cells().filter(|(_, c)| c.is_unstable()).map(|(p, _)| p).collect()
    }

    pub fn wrong_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_wrong()).count()
    }

    pub fn unstable_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_unstable()).count()
    }

    pub fn unstable_value(&self) -> usize {
        self.cells.iter().map(CellInspection::unstable_contribution).sum()
    }
}

/// Runs the model over every cell. Cells are evaluated in parallel; the
/// result does not depend on scheduling.
pub fn inspect_level<M: ConstraintModel + ?Sized>(model: &M, level: &Level, theta: Threshold) -> CandidateMap {
    let positions: Vec<Position> = level.positions().collect();
    let cells = positions
        .par_iter()
        .map(|&p| inspect_cell(model, level, p, theta))
        .collect();
    CandidateMap {
        height: level.height(),
        width: level.width(),
        theta,
        cells,
    }
}

/// Sum of candidate-set sizes over unstable cells.
pub fn unstable_value(map: &CandidateMap) -> usize {
    map.unstable_value()
}
