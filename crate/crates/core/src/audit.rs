//! Before/after classification of a repair.
//!
//! Each audited cell is labelled right or wrong before and after the repair,
//! and lands in one of eight buckets: changed (`->`) or unchanged (`=`),
//! crossed with both labels.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnet::CandidateMap;
use crate::corpus::TrainingSet;
use crate::level::{Level, LevelError, Position, TileType};

#[derive(Debug, Error, PartialEq)]
pub enum AuditError {
    #[error(transparent)]
    DimensionMismatch(#[from] LevelError),
    #[error("labels are {found:?}, the level is {expected:?}")]
    LabelShape {
        found: (usize, usize),
        expected: (usize, usize),
    },
}

/// What has to appear in training data for a tile to count as right.
/// Height is ignored either way.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RightCriterion {
    /// The full 3×3 window, center included.
    #[default]
    Window,
    /// Only the eight neighbors.
    Surrounding,
}

/// Labels cells by membership of their neighborhood in the training data.
#[derive(Clone, Debug)]
pub struct TrainingLabeler {
    criterion: RightCriterion,
    windows: HashSet<[TileType; 9]>,
    surroundings: HashSet<[TileType; 8]>,
}

impl TrainingLabeler {
    pub fn new(ts: &TrainingSet, criterion: RightCriterion) -> Self {
        TrainingLabeler {
            criterion,
            windows: ts.samples().iter().map(|c| c.types).collect(),
            surroundings: ts.samples().iter().map(|c| c.surrounding().neighbors).collect(),
        }
    }

    pub fn criterion(&self) -> RightCriterion {
        self.criterion
    }

    pub fn is_right(&self, level: &Level, pos: Position) -> bool {
        let c = level.combination_at(pos.row, pos.col).expect("position inside level");
        match self.criterion {
            RightCriterion::Window => self.windows.contains(&c.types),
            RightCriterion::Surrounding => self.surroundings.contains(&c.surrounding().neighbors),
        }
    }

    pub fn label(&self, level: &Level) -> CellLabels {
        CellLabels {
            height: level.height(),
            width: level.width(),
            wrong: level.positions().map(|p| !self.is_right(level, p)).collect(),
        }
    }
}

/// A right/wrong verdict per cell, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellLabels {
    height: usize,
    width: usize,
    wrong: Vec<bool>,
}

impl CellLabels {
    /// Wrong in the model's sense: the current tile is not a candidate.
    pub fn from_candidate_map(map: &CandidateMap) -> Self {
        CellLabels {
            height: map.height(),
            width: map.width(),
            wrong: map.cells().map(|(_, c)| c.is_wrong()).collect(),
        }
    }

    pub fn is_wrong(&self, pos: Position) -> bool {
        self.wrong[pos.row * self.width + pos.col]
    }

    pub fn wrong_count(&self) -> usize {
        self.wrong.iter().filter(|&&w| w).count()
    }

    pub fn wrong_positions(&self) -> Vec<Position> {
        (0..self.wrong.len())
            .filter(|&i| self.wrong[i])
            .map(|i| Position::new(i / self.width, i % self.width))
            .collect()
    }

    fn check(&self, level: &Level) -> Result<(), AuditError> {
        let expected = (level.height(), level.width());
        if (self.height, self.width) == expected {
            Ok(())
        } else {
            Err(AuditError::LabelShape {
                found: (self.height, self.width),
                expected,
            })
        }
    }
}

/// Which cells enter the audit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AuditScope {
    /// Cells with a pipe among their eight neighbors, before or after.
    #[default]
    PipeNeighborhood,
    AllCells,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RepairAudit {
    #[serde(rename = "W->W")]
    pub changed_wrong_wrong: usize,
    #[serde(rename = "W->R")]
    pub changed_wrong_right: usize,
    #[serde(rename = "R->W")]
    pub changed_right_wrong: usize,
    #[serde(rename = "R->R")]
    pub changed_right_right: usize,
    #[serde(rename = "W=W")]
    pub kept_wrong_wrong: usize,
    #[serde(rename = "W=R")]
    pub kept_wrong_right: usize,
    #[serde(rename = "R=W")]
    pub kept_right_wrong: usize,
    #[serde(rename = "R=R")]
    pub kept_right_right: usize,
    pub audited: usize,
    pub wrong_before: usize,
    pub wrong_after: usize,
    /// Wrong after over wrong before; 0 when nothing was wrong before.
    pub ratio: f64,
}

impl RepairAudit {
    pub fn changed(&self) -> usize {
        self.changed_wrong_wrong + self.changed_wrong_right + self.changed_right_wrong + self.changed_right_right
    }

    pub fn total(&self) -> usize {
        self.changed() + self.kept_wrong_wrong + self.kept_wrong_right + self.kept_right_wrong + self.kept_right_right
    }
}

fn in_scope(level: &Level, pos: Position) -> bool {
    level.surrounding_at(pos).map(|s| s.has_pipe()).unwrap_or(false)
}

pub fn audit_repair(
    before: &Level,
    after: &Level,
    labels_before: &CellLabels,
    labels_after: &CellLabels,
    scope: AuditScope,
) -> Result<RepairAudit, AuditError> {
    before.check_same_size(after)?;
    labels_before.check(before)?;
    labels_after.check(after)?;
    let mut a = RepairAudit::default();
    for pos in before.positions() {
        if scope == AuditScope::PipeNeighborhood && !in_scope(before, pos) && !in_scope(after, pos) {
            continue;
        }
        let wb = labels_before.is_wrong(pos);
        let wa = labels_after.is_wrong(pos);
        let bucket = match (before.get(pos) != after.get(pos), wb, wa) {
            (true, true, true) => &mut a.changed_wrong_wrong,
            (true, true, false) => &mut a.changed_wrong_right,
            (true, false, true) => &mut a.changed_right_wrong,
            (true, false, false) => &mut a.changed_right_right,
            (false, true, true) => &mut a.kept_wrong_wrong,
            (false, true, false) => &mut a.kept_wrong_right,
            (false, false, true) => &mut a.kept_right_wrong,
            (false, false, false) => &mut a.kept_right_right,
        };
        *bucket += 1;
        a.audited += 1;
        a.wrong_before += wb as usize;
        a.wrong_after += wa as usize;
    }
    a.ratio = if a.wrong_before == 0 {
        0.0
    } else {
        a.wrong_after as f64 / a.wrong_before as f64
    };
    Ok(a)
}
