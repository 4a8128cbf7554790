//! Battle of the Exes arena.
//!
//! Two agents compete for a high-value and a low-value reward spot. In the
//! ballistic condition both pick a spot once and the pick is resolved
//! immediately. In the dynamic condition both move at constant speed and may
//! retarget every tick; the episode ends when a spot is reached or the tick
//! budget runs out.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the start-equidistance check on floating point geometry.
const EQUIDISTANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: Vec2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Moves up to `step` units straight toward `target`, never overshooting.
    pub fn step_toward(&self, target: Vec2, step: f64) -> Vec2 {
        let dist = self.distance(target);
        if dist <= step {
            return target;
        }
        let k = step / dist;
        Vec2::new(self.x + (target.x - self.x) * k, self.y + (target.y - self.y) * k)
    }
}

/// Geometry, payoffs and timing for one game condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GameConfig {
    pub start_a: Vec2,
    pub start_b: Vec2,
    pub spot_high: Vec2,
    pub spot_low: Vec2,
    pub reward_high: f64,
    pub reward_low: f64,
    pub tie_radius: f64,
    pub speed: f64,
    pub reach_radius: f64,
    pub max_ticks: u32,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            start_a: Vec2::new(-10.0, 0.0),
            start_b: Vec2::new(10.0, 0.0),
            spot_high: Vec2::new(0.0, 5.0),
            spot_low: Vec2::new(0.0, -5.0),
            reward_high: 4.0,
            reward_low: 2.0,
            tie_radius: 4.0,
            speed: 1.0,
            reach_radius: 0.5,
            max_ticks: 50,
        }
    }
}

impl GameConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        for (name, p) in [
            ("start_a", self.start_a),
            ("start_b", self.start_b),
            ("spot_high", self.spot_high),
            ("spot_low", self.spot_low),
        ] {
            if !p.is_finite() {
                return bad(format!("{name} must have finite coordinates"));
            }
        }
        if !(self.reward_low.is_finite() && self.reward_high.is_finite()) {
            return bad("rewards must be finite".into());
        }
        if self.reward_low < 0.0 {
            return bad(format!("reward_low must be >= 0, got {}", self.reward_low));
        }
        if self.reward_high <= self.reward_low {
            return bad(format!(
                "reward_high ({}) must exceed reward_low ({})",
                self.reward_high, self.reward_low
            ));
        }
        for (name, v) in [
            ("tie_radius", self.tie_radius),
            ("speed", self.speed),
            ("reach_radius", self.reach_radius),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.max_ticks == 0 {
            return bad("max_ticks must be positive".into());
        }
        if self.spot_high == self.spot_low {
            return bad("spot_high and spot_low coincide".into());
        }
        if self.start_a == self.start_b {
            return bad("start_a and start_b coincide".into());
        }
        for (name, spot) in [("spot_high", self.spot_high), ("spot_low", self.spot_low)] {
            let da = self.start_a.distance(spot);
            let db = self.start_b.distance(spot);
            if (da - db).abs() > EQUIDISTANCE_TOL * da.max(db).max(1.0) {
                return bad(format!("{name} is not equidistant from the starts ({da} vs {db})"));
            }
        }
        Ok(())
    }

    pub fn spot(&self, choice: SpotChoice) -> Vec2 {
        match choice {
            SpotChoice::High => self.spot_high,
            SpotChoice::Low => self.spot_low,
        }
    }

    pub fn reward(&self, choice: SpotChoice) -> f64 {
        match choice {
            SpotChoice::High => self.reward_high,
            SpotChoice::Low => self.reward_low,
        }
    }

    /// Vertical extent spanned by the two reward spots.
    pub fn y_range(&self) -> (f64, f64) {
        let (a, b) = (self.spot_high.y, self.spot_low.y);
        (a.min(b), a.max(b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpotChoice {
    High,
    Low,
}

impl SpotChoice {
    pub const ALL: [SpotChoice; 2] = [SpotChoice::High, SpotChoice::Low];

    pub fn index(self) -> usize {
        match self {
            SpotChoice::High => 0,
            SpotChoice::Low => 1,
        }
    }

    pub fn other(self) -> SpotChoice {
        match self {
            SpotChoice::High => SpotChoice::Low,
            SpotChoice::Low => SpotChoice::High,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentResult {
    GotHigh,
    GotLow,
    Tie,
}

impl AgentResult {
    pub const ALL: [AgentResult; 3] = [AgentResult::GotHigh, AgentResult::GotLow, AgentResult::Tie];

    fn from_choice(choice: SpotChoice) -> Self {
        match choice {
            SpotChoice::High => AgentResult::GotHigh,
            SpotChoice::Low => AgentResult::GotLow,
        }
    }
}

/// Result of one episode from both agents' point of view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub result_a: AgentResult,
    pub result_b: AgentResult,
    pub reward_a: f64,
    pub reward_b: f64,
    pub ticks: u32,
    pub timed_out: bool,
}

impl EpisodeOutcome {
    fn tie(ticks: u32, timed_out: bool) -> Self {
        Self {
            result_a: AgentResult::Tie,
            result_b: AgentResult::Tie,
            reward_a: 0.0,
            reward_b: 0.0,
            ticks,
            timed_out,
        }
    }

    /// Agent a ends with `spot_a`, agent b with the other spot.
    fn split(cfg: &GameConfig, spot_a: SpotChoice, ticks: u32) -> Self {
        let spot_b = spot_a.other();
        Self {
            result_a: AgentResult::from_choice(spot_a),
            result_b: AgentResult::from_choice(spot_b),
            reward_a: cfg.reward(spot_a),
            reward_b: cfg.reward(spot_b),
            ticks,
            timed_out: false,
        }
    }

    pub fn is_tie(&self) -> bool {
        self.result_a == AgentResult::Tie
    }

    /// Same episode with the agent roles exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            result_a: self.result_b,
            result_b: self.result_a,
            reward_a: self.reward_b,
            reward_b: self.reward_a,
            ..*self
        }
    }
}

/// Resolves one ballistic (single simultaneous choice) episode.
pub fn resolve_ballistic(cfg: &GameConfig, choice_a: SpotChoice, choice_b: SpotChoice) -> EpisodeOutcome {
    if choice_a == choice_b {
        EpisodeOutcome::tie(0, false)
    } else {
        EpisodeOutcome::split(cfg, choice_a, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicState {
    pub pos_a: Vec2,
    pub pos_b: Vec2,
    pub tick: u32,
    /// Set once the episode has emitted its outcome.
    pub finished: bool,
}

pub fn dynamic_reset(cfg: &GameConfig) -> DynamicState {
    DynamicState {
        pos_a: cfg.start_a,
        pos_b: cfg.start_b,
        tick: 0,
        finished: false,
    }
}

/// Which spot, if any, lies within reach of `pos`.
fn reached_spot(cfg: &GameConfig, pos: Vec2) -> Option<SpotChoice> {
    SpotChoice::ALL
        .into_iter()
        .filter(|&s| pos.distance(cfg.spot(s)) <= cfg.reach_radius)
        .min_by(|&s, &t| pos.distance(cfg.spot(s)).total_cmp(&pos.distance(cfg.spot(t))))
}

/// Advances a dynamic episode by one tick.
///
/// Both agents move simultaneously toward their chosen spots and the
/// resulting positions are adjudicated afterwards. Returns the new state and,
/// if the episode ended on this tick, its outcome.
pub fn dynamic_step(
    cfg: &GameConfig,
    state: &DynamicState,
    choice_a: SpotChoice,
    choice_b: SpotChoice,
) -> Result<(DynamicState, Option<EpisodeOutcome>)> {
    if state.finished || state.tick >= cfg.max_ticks {
        return Err(Error::EpisodeFinished { tick: state.tick });
    }
    let pos_a = state.pos_a.step_toward(cfg.spot(choice_a), cfg.speed);
    let pos_b = state.pos_b.step_toward(cfg.spot(choice_b), cfg.speed);
    let tick = state.tick + 1;

    let outcome = match (reached_spot(cfg, pos_a), reached_spot(cfg, pos_b)) {
        (Some(sa), Some(sb)) if sa == sb => Some(EpisodeOutcome::tie(tick, false)),
        (Some(sa), Some(_)) => Some(EpisodeOutcome::split(cfg, sa, tick)),
        (Some(sa), None) => Some(if pos_b.distance(cfg.spot(sa)) <= cfg.tie_radius {
            EpisodeOutcome::tie(tick, false)
        } else {
            EpisodeOutcome::split(cfg, sa, tick)
        }),
        (None, Some(sb)) => Some(if pos_a.distance(cfg.spot(sb)) <= cfg.tie_radius {
            EpisodeOutcome::tie(tick, false)
        } else {
            EpisodeOutcome::split(cfg, sb.other(), tick)
        }),
        (None, None) if tick >= cfg.max_ticks => Some(EpisodeOutcome::tie(tick, true)),
        (None, None) => None,
    };

    let next = DynamicState {
        pos_a,
        pos_b,
        tick,
        finished: outcome.is_some(),
    };
    Ok((next, outcome))
}
