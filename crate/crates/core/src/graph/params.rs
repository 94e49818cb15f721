use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default hard cap on the number of vertices a construction may allocate.
pub const DEFAULT_VERTEX_CAP: u64 = 20_000_000;

/// Complete `arity`-ary tree of depth `depth` (a depth-0 tree is one vertex).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub arity: usize,
    pub depth: usize,
}

impl TreeSpec {
    pub fn new(arity: usize, depth: usize) -> Self {
        TreeSpec { arity, depth }
    }

    /// `(b^(D+1) - 1) / (b - 1)`, or `None` on overflow.
    pub fn vertex_count(&self) -> Option<u128> {
        let b = self.arity as u128;
        let mut total: u128 = 0;
        let mut level: u128 = 1;
        for j in 0..=self.depth {
            total = total.checked_add(level)?;
            if j < self.depth {
                level = level.checked_mul(b)?;
            }
        }
        Some(total)
    }

    /// Size of level `j` (`b^j`).
    pub fn level_size(&self, j: usize) -> Option<u128> {
        (self.arity as u128).checked_pow(j as u32)
    }
}

/// One decoration round: `trees` copies of `tree` hung from every vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecorationLevel {
    /// Level index `j >= 1`; rounds are applied from the highest level down.
    pub level: usize,
    pub trees: usize,
    pub tree: TreeSpec,
}

/// The ordered list of decoration levels `1..=r` (stored ascending).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecorationSchedule {
    pub levels: Vec<DecorationLevel>,
}

impl DecorationSchedule {
    pub fn empty() -> Self {
        DecorationSchedule { levels: Vec::new() }
    }

    /// Builds a schedule from `(trees, arity, depth)` per level, level 1 first.
    pub fn from_levels(levels: &[(usize, usize, usize)]) -> Self {
        DecorationSchedule {
            levels: levels
                .iter()
                .enumerate()
                .map(|(i, &(trees, arity, depth))| DecorationLevel {
                    level: i + 1,
                    trees,
                    tree: TreeSpec::new(arity, depth),
                })
                .collect(),
        }
    }

    pub fn rounds(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Levels in application order (level r first, level 1 last).
    pub fn application_order(&self) -> impl Iterator<Item = &DecorationLevel> {
        self.levels.iter().rev()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, lvl) in self.levels.iter().enumerate() {
            if lvl.level != i + 1 {
                return Err(Error::invalid(format!(
                    "decoration levels must be numbered 1..=r, found {} at position {i}",
                    lvl.level
                )));
            }
            if lvl.tree.arity == 0 {
                return Err(Error::invalid(format!(
                    "level-{} tree arity must be positive",
                    lvl.level
                )));
            }
        }
        Ok(())
    }
}

fn default_delta() -> f64 {
    0.5
}

fn default_true() -> bool {
    true
}

fn default_attempts() -> usize {
    1000
}

fn default_cap() -> u64 {
    DEFAULT_VERTEX_CAP
}

/// Everything that determines an instance, seed included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildParams {
    /// Branching scale `m`.
    pub m: usize,
    /// Funnel depth `k`.
    pub k: usize,
    /// Path length (odd).
    pub ell: usize,
    /// Decoration exponent in `(0, 1)`.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Number of decoration rounds; defaults to `round(m^delta)`.
    #[serde(default)]
    pub rounds: Option<usize>,
    /// Trees per vertex per round; defaults to `round(m^(1-delta))`.
    #[serde(default)]
    pub trees_per_round: Option<usize>,
    /// Tree depth per level (index 0 is level 1).
    #[serde(default)]
    pub depth_override: Option<Vec<usize>>,
    /// Tree arity per level (index 0 is level 1).
    #[serde(default)]
    pub arity_override: Option<Vec<usize>>,
    /// Rejection threshold on the expander second eigenvalue; defaults to `m`.
    #[serde(default)]
    pub expander_threshold: Option<f64>,
    /// When false, cluster expanders are plain `H_{n,2m}` samples.
    #[serde(default = "default_true")]
    pub condition_expanders: bool,
    #[serde(default = "default_attempts")]
    pub expander_max_attempts: usize,
    #[serde(default = "default_cap")]
    pub vertex_cap: u64,
    #[serde(default)]
    pub seed: u64,
}

impl BuildParams {
    pub fn new(m: usize, k: usize, ell: usize, seed: u64) -> Self {
        BuildParams {
            m,
            k,
            ell,
            delta: default_delta(),
            rounds: None,
            trees_per_round: None,
            depth_override: None,
            arity_override: None,
            expander_threshold: None,
            condition_expanders: true,
            expander_max_attempts: default_attempts(),
            vertex_cap: DEFAULT_VERTEX_CAP,
            seed,
        }
    }

    /// Undecorated instance (`r = 0`).
    pub fn undecorated(mut self) -> Self {
        self.rounds = Some(0);
        self
    }

    pub fn with_rounds(mut self, rounds: usize) -> Self {
        self.rounds = Some(rounds);
        self
    }

    pub fn with_trees_per_round(mut self, h: usize) -> Self {
        self.trees_per_round = Some(h);
        self
    }

    pub fn with_depths(mut self, depths: Vec<usize>) -> Self {
        self.depth_override = Some(depths);
        self
    }

    pub fn with_arities(mut self, arities: Vec<usize>) -> Self {
        self.arity_override = Some(arities);
        self
    }

    pub fn unconditioned(mut self) -> Self {
        self.condition_expanders = false;
        self
    }

    pub fn with_expander_threshold(mut self, threshold: f64) -> Self {
        self.expander_threshold = Some(threshold);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::invalid("m must be at least 2"));
        }
        if self.k < 1 {
            return Err(Error::invalid("funnel depth k must be positive"));
        }
        if self.ell.is_multiple_of(2) {
            return Err(Error::invalid(format!("ell = {} must be odd", self.ell)));
        }
        if self.ell < 2 * self.k + 1 {
            return Err(Error::invalid(format!(
                "ell = {} must be at least 2k + 1 = {}",
                self.ell,
                2 * self.k + 1
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid("delta must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Effective expander acceptance threshold (`+inf` when unconditioned).
    pub fn threshold(&self) -> f64 {
        if self.condition_expanders {
            self.expander_threshold.unwrap_or(self.m as f64)
        } else {
            f64::INFINITY
        }
    }

    /// `m^delta` rounded to the nearest integer `>= 1`.
    pub fn default_rounds(&self) -> usize {
        ((self.m as f64).powf(self.delta).round() as usize).max(1)
    }

    /// `m^(1-delta)` rounded to the nearest integer `>= 1`.
    pub fn default_trees(&self) -> usize {
        ((self.m as f64).powf(1.0 - self.delta).round() as usize).max(1)
    }

    /// Resolves defaults and overrides into an explicit schedule.
    ///
    /// Level `j` uses arity `5m - (j-1)h - 1` and depth `ceil(j * m^(3 delta))`
    /// unless overridden.
    pub fn schedule(&self) -> Result<DecorationSchedule> {
        let r = self.rounds.unwrap_or_else(|| self.default_rounds());
        let h = self.trees_per_round.unwrap_or_else(|| self.default_trees());
        let depth_unit = (self.m as f64).powf(3.0 * self.delta);
        let mut levels = Vec::with_capacity(r);
        for j in 1..=r {
            let arity = match &self.arity_override {
                Some(a) => *a.get(j - 1).ok_or_else(|| {
                    Error::invalid(format!("arity_override has no entry for level {j}"))
                })?,
                None => {
                    let reduce = (j - 1) * h + 1;
                    if 5 * self.m <= reduce {
                        return Err(Error::invalid(format!(
                            "level-{j} arity 5m - (j-1)h - 1 is not positive"
                        )));
                    }
                    5 * self.m - reduce
                }
            };
            let depth = match &self.depth_override {
                Some(d) => *d.get(j - 1).ok_or_else(|| {
                    Error::invalid(format!("depth_override has no entry for level {j}"))
                })?,
                None => (j as f64 * depth_unit).ceil() as usize,
            };
            levels.push(DecorationLevel {
                level: j,
                trees: h,
                tree: TreeSpec::new(arity, depth),
            });
        }
        let schedule = DecorationSchedule { levels };
        schedule.validate()?;
        Ok(schedule)
    }

    /// Size of cluster `c` (0-based): `1`, `m^(2d)` for funnel distance `d <= k`,
    /// `m^(2k)` in the tunnel.
    pub fn cluster_size(&self, c: usize) -> Option<u128> {
        let d = c.min(self.ell - 1 - c).min(self.k);
        (self.m as u128).checked_pow(2 * d as u32)
    }
}
