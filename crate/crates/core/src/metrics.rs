//! Fairness over high-reward counts and session outcome classification.

use serde::{Deserialize, Serialize};

use crate::env::{AgentResult, EpisodeOutcome};
use crate::error::{Error, Result};

/// min/max of the two high-reward counts; 1 when neither agent ever won.
pub fn fairness_ratio(h_a: u64, h_b: u64) -> f64 {
    let (lo, hi) = (h_a.min(h_b), h_a.max(h_b));
    if hi == 0 {
        1.0
    } else {
        lo as f64 / hi as f64
    }
}

/// Cumulative high-reward counts for one dyad.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FairnessTracker {
    pub h_count_a: u64,
    pub h_count_b: u64,
    pub episodes_seen: u64,
}

impl FairnessTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, outcome: &EpisodeOutcome) {
        if outcome.result_a == AgentResult::GotHigh {
            self.h_count_a += 1;
        } else if outcome.result_b == AgentResult::GotHigh {
            self.h_count_b += 1;
        }
        self.episodes_seen += 1;
    }

    pub fn fairness(&self) -> f64 {
        fairness_ratio(self.h_count_a, self.h_count_b)
    }

    pub fn ties(&self) -> u64 {
        self.episodes_seen - self.h_count_a - self.h_count_b
    }

    pub fn from_log<'a>(log: impl IntoIterator<Item = &'a EpisodeOutcome>) -> Self {
        let mut t = Self::new();
        for o in log {
            t.record(o);
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionOutcome {
    DominantA,
    DominantB,
    TurnTaking,
    Unconverged,
}

impl SessionOutcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            SessionOutcome::DominantA => "dominant_a",
            SessionOutcome::DominantB => "dominant_b",
            SessionOutcome::TurnTaking => "turn_taking",
            SessionOutcome::Unconverged => "unconverged",
        }
    }
}

/// Thresholds applied over the trailing window of a session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifyThresholds {
    pub window: usize,
    /// Share of non-tie episodes one agent must win to count as dominant.
    pub dominance: f64,
    pub fairness: f64,
    /// Minimum share of non-tie episodes in the window.
    pub non_tie: f64,
}

impl Default for ClassifyThresholds {
    fn default() -> Self {
        Self {
            window: 500,
            dominance: 0.9,
            fairness: 0.8,
            non_tie: 0.5,
        }
    }
}

/// Classifies a session by its last `window` episodes.
///
/// Both the dominance and turn-taking labels require at least `non_tie` of
/// the window to be decided episodes; a mostly-tied session is unconverged.
pub fn classify_session(outcomes: &[EpisodeOutcome], window: usize, th: &ClassifyThresholds) -> Result<SessionOutcome> {
    if window == 0 || window > outcomes.len() {
        return Err(Error::InvalidWindow {
            window,
            len: outcomes.len(),
        });
    }
    let t = FairnessTracker::from_log(&outcomes[outcomes.len() - window..]);
    let decided = t.h_count_a + t.h_count_b;
    if decided == 0 || (decided as f64) < th.non_tie * window as f64 {
        return Ok(SessionOutcome::Unconverged);
    }
    let share_a = t.h_count_a as f64 / decided as f64;
    Ok(if share_a >= th.dominance {
        SessionOutcome::DominantA
    } else if 1.0 - share_a >= th.dominance {
        SessionOutcome::DominantB
    } else if t.fairness() >= th.fairness {
        SessionOutcome::TurnTaking
    } else {
        SessionOutcome::Unconverged
    })
}
