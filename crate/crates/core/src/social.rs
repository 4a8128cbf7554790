//! Inequity-averse utility over two-episode reward references.
//!
//! Each agent compares its own reference (sum of its last two rewards) with
//! the other agent's. A trailing agent loses `alpha` per unit of shortfall, a
//! leading agent loses `beta` per unit of lead. Utilities never exceed the
//! raw reward.

use serde::{Deserialize, Serialize};

use crate::env::EpisodeOutcome;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilityParams {
    /// Weight on disadvantageous inequity.
    pub alpha: f64,
    /// Weight on advantageous inequity.
    pub beta: f64,
}

impl UtilityParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let p = Self { alpha, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0 && self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha and beta must be finite and >= 0, got ({}, {})",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }

    pub fn is_loss_averse(&self) -> bool {
        self.alpha > self.beta
    }

    pub fn is_pure_loss_aversion(&self) -> bool {
        self.alpha > 0.0 && self.beta == 0.0
    }
}

pub fn utility(r_i: f64, ref_i: f64, ref_j: f64, p: &UtilityParams) -> f64 {
    r_i - p.alpha * (ref_j - ref_i).max(0.0) - p.beta * (ref_i - ref_j).max(0.0)
}

/// Rolling window of the last two rewards of one agent.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct LastTwo {
    newest: Option<f64>,
    older: Option<f64>,
}

impl LastTwo {
    fn push(&mut self, r: f64) {
        self.older = self.newest.replace(r);
    }

    fn sum(&self) -> f64 {
        self.newest.unwrap_or(0.0) + self.older.unwrap_or(0.0)
    }
}

/// Per-dyad reward references; reset by constructing a new one.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RewardReference {
    a: LastTwo,
    b: LastTwo,
}

impl RewardReference {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, r_a: f64, r_b: f64) {
        self.a.push(r_a);
        self.b.push(r_b);
    }

    pub fn ref_a(&self) -> f64 {
        self.a.sum()
    }

    pub fn ref_b(&self) -> f64 {
        self.b.sum()
    }
}

/// Converts raw episode rewards into utilities. The current episode's
/// rewards enter the references before the utilities are evaluated.
pub fn perceive(outcome: &EpisodeOutcome, refs: &mut RewardReference, p: &UtilityParams) -> (f64, f64) {
    refs.push(outcome.reward_a, outcome.reward_b);
    let (ra, rb) = (refs.ref_a(), refs.ref_b());
    (
        utility(outcome.reward_a, ra, rb, p),
        utility(outcome.reward_b, rb, ra, p),
    )
}
