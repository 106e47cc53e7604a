//! Experiment configuration: defaults, JSON files and command-line
//! overrides, resolved with precedence flags > file > defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::WeightName;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    QuadraticBm,
    QuadraticFbm,
    WeightedQv,
    BoundsProp36,
    WeightedBounds,
    Lemma61,
    Combinatorics,
    Constants,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::QuadraticBm,
        ExperimentKind::QuadraticFbm,
        ExperimentKind::WeightedQv,
        ExperimentKind::BoundsProp36,
        ExperimentKind::WeightedBounds,
        ExperimentKind::Lemma61,
        ExperimentKind::Combinatorics,
        ExperimentKind::Constants,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::QuadraticBm => "quadratic_bm",
            ExperimentKind::QuadraticFbm => "quadratic_fbm",
            ExperimentKind::WeightedQv => "weighted_qv",
            ExperimentKind::BoundsProp36 => "bounds_prop36",
            ExperimentKind::WeightedBounds => "weighted_bounds",
            ExperimentKind::Lemma61 => "lemma61",
            ExperimentKind::Combinatorics => "combinatorics",
            ExperimentKind::Constants => "constants",
        }
    }

    /// Accepts both `snake_case` and the `kebab-case` subcommand spelling.
    pub fn parse(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.as_str() == norm)
            .ok_or_else(|| Error::Config(format!("experiment: unknown experiment '{s}'")))
    }

    fn default_hurst(self) -> f64 {
        match self {
            ExperimentKind::QuadraticFbm => 0.75,
            ExperimentKind::WeightedQv | ExperimentKind::WeightedBounds | ExperimentKind::Lemma61 => 0.4,
            _ => 0.5,
        }
    }

    fn default_ladder(self) -> Vec<usize> {
        match self {
            ExperimentKind::QuadraticBm | ExperimentKind::QuadraticFbm => vec![8, 16, 32, 64, 128, 256, 512],
            ExperimentKind::BoundsProp36 => vec![4, 16, 64, 256],
            ExperimentKind::WeightedQv | ExperimentKind::WeightedBounds => vec![64, 128, 256, 512, 1024],
            ExperimentKind::Lemma61 => (5..=12).map(|e| 1usize << e).collect(),
            ExperimentKind::Combinatorics => vec![1, 2, 3, 4],
            ExperimentKind::Constants => vec![1],
        }
    }

    fn uses_hurst(self) -> bool {
        !matches!(self, ExperimentKind::Combinatorics | ExperimentKind::Constants)
    }

    fn uses_replicas(self) -> bool {
        !matches!(self, ExperimentKind::Lemma61 | ExperimentKind::Combinatorics | ExperimentKind::Constants)
    }
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub hurst: f64,
    pub n_ladder: Vec<usize>,
    pub replicas: usize,
    /// Itô experiments: grid intervals shared by all levels. Quadratic fBm:
    /// panels of the `u`-grid.
    pub grid_size: usize,
    pub seed: u64,
    pub weight: WeightName,
    pub output_path: String,
    /// Worker threads; 0 selects the rayon default.
    pub threads: usize,
    /// Bootstrap resamples for distance standard errors (0 disables).
    pub bootstrap: usize,
    /// Combinatorics: number of `y`-variables and coordinates.
    pub m: usize,
    pub d: usize,
    /// Wall-clock budget in seconds; levels not started in time are skipped.
    pub time_budget_secs: Option<f64>,
}

/// Partial configuration, as read from a JSON file or from flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigPatch {
    pub experiment: Option<ExperimentKind>,
    pub hurst: Option<f64>,
    pub n_ladder: Option<Vec<usize>>,
    pub replicas: Option<usize>,
    pub grid_size: Option<usize>,
    pub seed: Option<u64>,
    pub weight: Option<WeightName>,
    pub output_path: Option<String>,
    pub threads: Option<usize>,
    pub bootstrap: Option<usize>,
    pub m: Option<usize>,
    pub d: Option<usize>,
    pub time_budget_secs: Option<f64>,
}

impl ConfigPatch {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("config file {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fields set in `other` win.
    pub fn overlay(self, other: ConfigPatch) -> ConfigPatch {
        ConfigPatch {
            experiment: other.experiment.or(self.experiment),
            hurst: other.hurst.or(self.hurst),
            n_ladder: other.n_ladder.or(self.n_ladder),
            replicas: other.replicas.or(self.replicas),
            grid_size: other.grid_size.or(self.grid_size),
            seed: other.seed.or(self.seed),
            weight: other.weight.or(self.weight),
            output_path: other.output_path.or(self.output_path),
            threads: other.threads.or(self.threads),
            bootstrap: other.bootstrap.or(self.bootstrap),
            m: other.m.or(self.m),
            d: other.d.or(self.d),
            time_budget_secs: other.time_budget_secs.or(self.time_budget_secs),
        }
    }
}

/// Parses `4,8,16`.
pub fn parse_ladder(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("n_ladder: '{t}' is not a nonnegative integer")))
        })
        .collect()
}

/// Default Itô grid: 8 intervals per unit of the largest level.
pub const ITO_GRID_FACTOR: usize = 8;

/// Default `u`-grid panels for the quadratic fBm experiment.
pub const DEFAULT_QUADRATIC_GRID: usize = 512;

impl ExperimentConfig {
    /// Resolves `file` then `flags` over the defaults of the chosen experiment.
    pub fn resolve(file: Option<ConfigPatch>, flags: ConfigPatch) -> Result<Self> {
        let p = file.unwrap_or_default().overlay(flags);
        let experiment =
            p.experiment.ok_or_else(|| Error::Config("experiment: no experiment selected".into()))?;
        let n_ladder = p.n_ladder.unwrap_or_else(|| experiment.default_ladder());
        let max_n = n_ladder.iter().copied().max().unwrap_or(0);
        let default_grid = match experiment {
            ExperimentKind::QuadraticBm | ExperimentKind::BoundsProp36 => ITO_GRID_FACTOR * max_n,
            ExperimentKind::QuadraticFbm => DEFAULT_QUADRATIC_GRID,
            _ => 0,
        };
        let cfg = ExperimentConfig {
            experiment,
            hurst: p.hurst.unwrap_or_else(|| experiment.default_hurst()),
            n_ladder,
            replicas: p.replicas.unwrap_or(10_000),
            grid_size: p.grid_size.unwrap_or(default_grid),
            seed: p.seed.unwrap_or(20_240_601),
            weight: p.weight.unwrap_or(WeightName::Cos),
            output_path: p.output_path.unwrap_or_else(|| "results".into()),
            threads: p.threads.unwrap_or(0),
            bootstrap: p.bootstrap.unwrap_or(0),
            m: p.m.unwrap_or(0),
            d: p.d.unwrap_or(1),
            time_budget_secs: p.time_budget_secs,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Field-level validation with actionable messages.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::Config(format!("{field}: {msg}")));
        let kind = self.experiment;
        if self.n_ladder.is_empty() {
            return bad("n_ladder", "must contain at least one level".into());
        }
        if self.n_ladder.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n_ladder", format!("must be strictly increasing, got {:?}", self.n_ladder));
        }
        if self.n_ladder[0] == 0 {
            return bad("n_ladder", "levels must be at least 1".into());
        }
        if kind.uses_replicas() && self.replicas < 100 {
            return bad("replicas", format!("need at least 100, got {}", self.replicas));
        }
        if kind == ExperimentKind::BoundsProp36 && self.replicas < 1000 {
            return bad("replicas", format!("the ingredient estimators need at least 1000, got {}", self.replicas));
        }
        let max_n = *self.n_ladder.last().unwrap();
        let h = self.hurst;
        if kind.uses_hurst() && !(h > 0.0 && h < 1.0) {
            return bad("hurst", format!("must lie in (0, 1), got {h}"));
        }
        match kind {
            ExperimentKind::QuadraticBm | ExperimentKind::BoundsProp36 => {
                if h != 0.5 {
                    return bad("hurst", format!("{} is a Brownian experiment; set hurst = 0.5 (got {h})", kind.as_str()));
                }
                if self.grid_size < ITO_GRID_FACTOR * max_n {
                    return bad(
                        "grid_size",
                        format!("must be at least {ITO_GRID_FACTOR} * max(n_ladder) = {}, got {}", ITO_GRID_FACTOR * max_n, self.grid_size),
                    );
                }
            }
            ExperimentKind::QuadraticFbm => {
                if h < 0.5 {
                    return bad("hurst", format!("the quadratic functional needs hurst >= 0.5, got {h}"));
                }
                if self.grid_size < 2 || self.grid_size > crate::functionals::MAX_U_GRID {
                    return bad("grid_size", format!("u-grid panels must lie in 2..={}, got {}", crate::functionals::MAX_U_GRID, self.grid_size));
                }
            }
            ExperimentKind::WeightedQv | ExperimentKind::WeightedBounds => {
                if !(h > 0.25 && h <= 0.5) {
                    return bad("hurst", format!("weighted variations need 0.25 < hurst <= 0.5, got {h}"));
                }
                if self.n_ladder[0] < 2 {
                    return bad("n_ladder", "weighted variations need levels >= 2".into());
                }
            }
            ExperimentKind::Lemma61 => {
                if h >= 0.5 {
                    return bad("hurst", format!("the increment bounds need hurst < 0.5, got {h}"));
                }
                if self.n_ladder[0] < 2 {
                    return bad("n_ladder", "levels must be at least 2".into());
                }
            }
            ExperimentKind::Combinatorics => {
                if self.d == 0 {
                    return bad("d", "need at least one coordinate".into());
                }
            }
            ExperimentKind::Constants => {}
        }
        if let Some(b) = self.time_budget_secs {
            if !(b > 0.0) {
                return bad("time_budget_secs", format!("must be positive, got {b}"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
