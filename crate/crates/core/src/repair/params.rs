use std::time::Duration;

use super::RepairError;

/// Coefficients of the fitness `w1·|W| + w2·|R| + w3·UV`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitnessWeights {
    pub wrong: f64,
    pub replaced: f64,
    pub unstable: f64,
}

impl Default for FitnessWeights {
    fn default() -> Self {
        FitnessWeights {
            wrong: 5.0,
            replaced: 3.0,
            unstable: 1.0,
        }
    }
}

impl FitnessWeights {
    pub fn combine(&self, wrong: usize, replaced: usize, unstable_value: usize) -> f64 {
        self.wrong * wrong as f64 + self.replaced * replaced as f64 + self.unstable * unstable_value as f64
    }

    /// Parses `"5,3,1"`.
    pub fn parse(text: &str) -> Result<Self, RepairError> {
        let parts: Vec<f64> = text
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| RepairError::Config(format!("bad weights {text:?}")))?;
        match parts[..] {
            [wrong, replaced, unstable] => Ok(FitnessWeights {
                wrong,
                replaced,
                unstable,
            }),
            _ => Err(RepairError::Config(format!("expected three weights, got {text:?}"))),
        }
    }
}

/// Where mutation and repair draw replacement types from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CandidateSource {
    /// Candidates of the scheme's own materialized level at the time of the move.
    #[default]
    Current,
    /// Candidates of the original defective level.
    Original,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GAParams {
    pub population: usize,
    /// Probability that an offspring goes through mutation at all.
    pub p_m0: f64,
    /// Per-position mutation probability; `None` means `1 / |S_l|`.
    pub p_m1: Option<f64>,
    pub p_r: f64,
    /// Opponents per candidate in the round-robin tournament.
    pub rrt_m: usize,
    pub weights: FitnessWeights,
    pub generations: usize,
    pub time_limit: Option<Duration>,
    pub seed: u64,
    pub candidate_source: CandidateSource,
}

impl Default for GAParams {
    fn default() -> Self {
        GAParams {
            population: 20,
            p_m0: 0.8,
            p_m1: None,
            p_r: 0.3,
            rrt_m: 4,
            weights: FitnessWeights::default(),
            generations: 25,
            time_limit: None,
            seed: 0,
            candidate_source: CandidateSource::Current,
        }
    }
}

impl GAParams {
    pub fn mutation_rate(&self, search_space: usize) -> f64 {
        self.p_m1.unwrap_or(1.0 / search_space.max(1) as f64)
    }

    pub fn validate(&self) -> Result<(), RepairError> {
        let prob = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(RepairError::InvalidParams(format!("{name} = {v} is not a probability")))
            }
        };
        prob("p_m0", self.p_m0)?;
        prob("p_r", self.p_r)?;
        if let Some(p) = self.p_m1 {
            prob("p_m1", p)?;
        }
        if self.population < 2 {
            return Err(RepairError::InvalidParams("population must be at least 2".into()));
        }
        if self.rrt_m == 0 {
            return Err(RepairError::InvalidParams("rrt_m must be at least 1".into()));
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn apply_config(&mut self, text: &str) -> Result<(), RepairError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| RepairError::Config(format!("line {}: expected key=value", i + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || RepairError::Config(format!("line {}: bad value for {key}: {value:?}", i + 1));
            let float = || value.parse::<f64>().map_err(|_| bad());
            let int = || value.parse::<usize>().map_err(|_| bad());
            match key {
                "n" | "population" => self.population = int()?,
                "p_m0" => self.p_m0 = float()?,
                "p_m1" => {
                    self.p_m1 = match value {
                        "auto" => None,
                        _ => Some(float()?),
                    }
                }
                "p_r" => self.p_r = float()?,
                "rrt_m" => self.rrt_m = int()?,
                "w1" => self.weights.wrong = float()?,
                "w2" => self.weights.replaced = float()?,
                "w3" => self.weights.unstable = float()?,
                "weights" => self.weights = FitnessWeights::parse(value)?,
                "generations" => self.generations = int()?,
                "time_limit_secs" => self.time_limit = Some(Duration::from_secs_f64(float()?)),
                "seed" => self.seed = value.parse().map_err(|_| bad())?,
                "candidate_source" => {
                    self.candidate_source = match value {
                        "current" => CandidateSource::Current,
                        "original" => CandidateSource::Original,
                        _ => return Err(bad()),
                    }
                }
                _ => return Err(RepairError::Config(format!("line {}: unknown key {key:?}", i + 1))),
            }
        }
        Ok(())
    }

    pub fn from_config(text: &str) -> Result<Self, RepairError> {
        let mut p = GAParams::default();
        p.apply_config(text)?;
        Ok(p)
    }
}
