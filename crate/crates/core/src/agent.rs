//! Independent tabular Q-learners with ε-greedy exploration.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{AgentResult, SpotChoice};
use crate::error::{Error, Result};

/// Learning rate, discount and the linear exploration schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LearnerParams {
    pub mu: f64,
    pub gamma: f64,
    pub eps_start: f64,
    pub eps_end_episode: u64,
}

impl Default for LearnerParams {
    fn default() -> Self {
        Self {
            mu: 0.3,
            gamma: 0.9,
            eps_start: 1.0,
            eps_end_episode: 8500,
        }
    }
}

impl LearnerParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::InvalidConfig(format!("mu must lie in [0, 1], got {}", self.mu)));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidConfig(format!(
                "gamma must lie in [0, 1), got {}",
                self.gamma
            )));
        }
        if !(0.0..=1.0).contains(&self.eps_start) {
            return Err(Error::InvalidConfig(format!(
                "eps_start must lie in [0, 1], got {}",
                self.eps_start
            )));
        }
        if self.eps_end_episode == 0 {
            return Err(Error::InvalidConfig("eps_end_episode must be positive".into()));
        }
        Ok(())
    }

    /// Exploration probability for a 0-based episode index: linear from
    /// `eps_start` down to 0 at `eps_end_episode`, then 0.
    pub fn epsilon_at(&self, episode: u64) -> f64 {
        let frac = episode as f64 / self.eps_end_episode as f64;
        self.eps_start * (1.0 - frac).max(0.0)
    }
}

/// Index of a state row in a [`QTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EncodedState(pub usize);

/// Number of distinct previous-outcome values.
pub const OUTCOME_STATES: usize = 3;

fn outcome_index(prev: AgentResult) -> usize {
    match prev {
        AgentResult::GotHigh => 0,
        AgentResult::GotLow => 1,
        AgentResult::Tie => 2,
    }
}

pub fn encode_ballistic(prev: AgentResult) -> EncodedState {
    EncodedState(outcome_index(prev))
}

/// Maps positions along the spot axis onto `bins` equal-width bins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YBins {
    pub bins: usize,
    pub y_min: f64,
    pub y_max: f64,
}

impl YBins {
    pub fn new(bins: usize, y_min: f64, y_max: f64) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidConfig("y_bins must be positive".into()));
        }
        if !(y_min.is_finite() && y_max.is_finite() && y_min < y_max) {
            return Err(Error::InvalidConfig(format!("empty y range [{y_min}, {y_max}]")));
        }
        Ok(Self { bins, y_min, y_max })
    }

    pub fn bin(&self, y: f64) -> usize {
        let y = y.clamp(self.y_min, self.y_max);
        let width = (self.y_max - self.y_min) / self.bins as f64;
        (((y - self.y_min) / width) as usize).min(self.bins - 1)
    }

    pub fn state_count(&self) -> usize {
        OUTCOME_STATES * self.bins * self.bins
    }

    pub fn encode(&self, prev: AgentResult, y_self: f64, y_other: f64) -> EncodedState {
        let b = self.bins;
        EncodedState(outcome_index(prev) * b * b + self.bin(y_self) * b + self.bin(y_other))
    }
}

pub fn encode_dynamic(
    prev: AgentResult,
    y_self: f64,
    y_other: f64,
    bins: usize,
    y_min: f64,
    y_max: f64,
) -> Result<EncodedState> {
    Ok(YBins::new(bins, y_min, y_max)?.encode(prev, y_self, y_other))
}

/// Dense action-value table over (state, {High, Low}).
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    values: Vec<[f64; 2]>,
}

impl QTable {
    pub fn new(state_count: usize) -> Self {
        Self {
            values: vec![[0.0; 2]; state_count],
        }
    }

    pub fn state_count(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, s: EncodedState, a: SpotChoice) -> f64 {
        self.values[s.0][a.index()]
    }

    pub fn set(&mut self, s: EncodedState, a: SpotChoice, v: f64) {
        self.values[s.0][a.index()] = v;
    }

    pub fn rows(&self) -> impl Iterator<Item = (usize, [f64; 2])> + '_ {
        self.values.iter().copied().enumerate()
    }

    pub fn max_value(&self, s: EncodedState) -> f64 {
        let [h, l] = self.values[s.0];
        h.max(l)
    }

    /// ε-greedy choice. One uniform draw decides explore vs exploit; exact
    /// ties in the greedy branch are broken by a fair coin.
    pub fn select_action<R: Rng + ?Sized>(&self, s: EncodedState, epsilon: f64, rng: &mut R) -> SpotChoice {
        let coin = |rng: &mut R| {
            if rng.gen::<bool>() {
                SpotChoice::High
            } else {
                SpotChoice::Low
            }
        };
        if rng.gen::<f64>() < epsilon {
            return coin(rng);
        }
        let [h, l] = self.values[s.0];
        if h > l {
            SpotChoice::High
        } else if l > h {
            SpotChoice::Low
        } else {
            coin(rng)
        }
    }

    /// One-step Q-learning update. A terminal transition bootstraps from 0.
    pub fn update(
        &mut self,
        s: EncodedState,
        a: SpotChoice,
        reward: f64,
        s_next: EncodedState,
        terminal: bool,
        params: &LearnerParams,
    ) {
        let future = if terminal { 0.0 } else { self.max_value(s_next) };
        let q = &mut self.values[s.0][a.index()];
        *q += params.mu * (reward + params.gamma * future - *q);
    }
}
