use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agent::{LearnerParams, YBins};
use crate::env::GameConfig;
use crate::error::{Error, Result};
use crate::metrics::ClassifyThresholds;
use crate::social::UtilityParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Ballistic,
    Dynamic,
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ballistic" => Ok(Condition::Ballistic),
            "dynamic" => Ok(Condition::Dynamic),
            other => Err(Error::InvalidConfig(format!("unknown condition {other:?}"))),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Ballistic => "ballistic",
            Condition::Dynamic => "dynamic",
        })
    }
}

/// One (alpha, beta) pair or a Cartesian grid of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UtilitySpec {
    Single(UtilityParams),
    Grid(UtilityGrid),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilityGrid {
    pub alpha_values: Vec<f64>,
    pub beta_values: Vec<f64>,
    /// Keep only cells with alpha >= beta.
    #[serde(default)]
    pub loss_averse_only: bool,
}

impl UtilitySpec {
    /// Cells in row-major (alpha outer, beta inner) order.
    pub fn cells(&self) -> Vec<UtilityParams> {
        match self {
            UtilitySpec::Single(p) => vec![*p],
            UtilitySpec::Grid(g) => g
                .alpha_values
                .iter()
                .flat_map(|&alpha| g.beta_values.iter().map(move |&beta| UtilityParams { alpha, beta }))
                .filter(|p| !g.loss_averse_only || p.alpha >= p.beta)
                .collect(),
        }
    }
}

/// Inclusive `start:stop:step` range, e.g. `0:1:0.1`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidConfig(format!("grid {s:?} is not start:stop:step"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step <= 0.0 || stop < start {
        return Err(bad());
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    // snap to 1e-10 so 0.1 * 3 prints as 0.3
    Ok((0..=n)
        .map(|i| ((start + step * i as f64) * 1e10).round() / 1e10)
        .collect())
}

/// Full description of an experiment; outputs are a pure function of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub condition: Condition,
    pub episodes: u64,
    pub dyads: u32,
    pub learner: LearnerParams,
    pub utility: UtilitySpec,
    pub game: GameConfig,
    pub master_seed: u64,
    /// Bootstrap the last update of an episode from the next episode's
    /// opening state instead of treating it as terminal.
    pub chain_episodes: bool,
    pub y_bins: usize,
    /// Record fairness every k-th episode (the final episode is always kept).
    pub sample_every: u64,
    /// Trailing window for late fairness in the heatmap.
    pub late_window: u64,
    pub classify: ClassifyThresholds,
    /// Write full per-dyad episode logs under `dyads/`.
    pub dyad_logs: bool,
    /// Write final Q-tables under `qtables/`.
    pub dump_q: bool,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let axis = parse_grid("0:1:0.1").expect("static grid");
        Self {
            condition: Condition::Ballistic,
            episodes: 10_000,
            dyads: 100,
            learner: LearnerParams::default(),
            utility: UtilitySpec::Grid(UtilityGrid {
                alpha_values: axis.clone(),
                beta_values: axis,
                loss_averse_only: true,
            }),
            game: GameConfig::default(),
            master_seed: 0,
            chain_episodes: false,
            y_bins: 5,
            sample_every: 1,
            late_window: 1000,
            classify: ClassifyThresholds::default(),
            dyad_logs: false,
            dump_q: false,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// On-disk manifest: the resolved config plus the producing version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.episodes == 0 {
            return bad("episodes must be >= 1");
        }
        if self.episodes > u32::MAX as u64 {
            return bad("episodes must fit in 32 bits");
        }
        if self.dyads == 0 {
            return bad("dyads must be >= 1");
        }
        if self.sample_every == 0 {
            return bad("sample_every must be >= 1");
        }
        if self.late_window == 0 || self.late_window > self.episodes {
            return bad("late_window must lie in [1, episodes]");
        }
        let w = self.classify.window;
        if w == 0 || w as u64 > self.episodes {
            return bad("classify.window must lie in [1, episodes]");
        }
        self.learner.validate()?;
        self.game.validate()?;
        if let UtilitySpec::Grid(g) = &self.utility {
            if g.alpha_values.is_empty() || g.beta_values.is_empty() {
                return bad("utility grid is empty");
            }
        }
        let cells = self.utility.cells();
        if cells.is_empty() {
            return bad("utility grid has no cells after the alpha >= beta restriction");
        }
        for c in &cells {
            c.validate()?;
        }
        if self.condition == Condition::Dynamic {
            self.y_bins()?;
        }
        Ok(())
    }

    pub fn y_bins(&self) -> Result<YBins> {
        let (lo, hi) = self.game.y_range();
        YBins::new(self.y_bins, lo, hi)
    }

    /// Loads a TOML config file, or a JSON config / manifest.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            message,
        };
        if path.extension().is_some_and(|e| e == "json") {
            let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| parse_err(e.to_string()))?;
            if value.get("config").is_some() {
                let m: Manifest = serde_json::from_value(value).map_err(|e| parse_err(e.to_string()))?;
                Ok(m.config)
            } else {
                serde_json::from_value(value).map_err(|e| parse_err(e.to_string()))
            }
        } else {
            toml::from_str(&text).map_err(|e| parse_err(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:1:0.1").unwrap().len(), 11);
        assert_eq!(parse_grid("0:1:0.1").unwrap()[3], 0.3);
        assert_eq!(parse_grid("0:0.5:0.5").unwrap(), vec![0.0, 0.5]);
        assert_eq!(parse_grid("0.2:0.2:1").unwrap(), vec![0.2]);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("a:1:0.1").is_err());
    }

    #[test]
    fn default_grid_is_lower_triangle() {
        let cfg = ExperimentConfig::default();
        let cells = cfg.utility.cells();
        assert_eq!(cells.len(), 66);
        assert!(cells.iter().all(|c| c.alpha >= c.beta));
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn empty_grid_rejected() {
        let cfg = ExperimentConfig {
            utility: UtilitySpec::Grid(UtilityGrid {
                alpha_values: vec![],
                beta_values: vec![0.0],
                loss_averse_only: false,
            }),
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn toml_roundtrip_with_partial_file() {
        let text = r#"
            condition = "dynamic"
            episodes = 200
            master_seed = 9
            [utility]
            alpha = 0.5
            beta = 0.0
            [learner]
            gamma = 0.99
            [game]
            max_ticks = 40
        "#;
        let cfg: ExperimentConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.condition, Condition::Dynamic);
        assert_eq!(
            cfg.utility,
            UtilitySpec::Single(UtilityParams { alpha: 0.5, beta: 0.0 })
        );
        assert_eq!(cfg.learner.gamma, 0.99);
        assert_eq!(cfg.learner.mu, 0.3);
        assert_eq!(cfg.game.max_ticks, 40);
        assert_eq!(cfg.game.reward_high, 4.0);
        let back: ExperimentConfig = toml::from_str(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(toml::from_str::<ExperimentConfig>("episodez = 3").is_err());
    }
}
