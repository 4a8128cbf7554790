//! One session between two independent learners.

use std::collections::VecDeque;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{encode_ballistic, EncodedState, QTable, YBins, OUTCOME_STATES};
use crate::env::{dynamic_reset, dynamic_step, resolve_ballistic, AgentResult, EpisodeOutcome, SpotChoice};
use crate::error::Result;
use crate::metrics::{classify_session, FairnessTracker, SessionOutcome};
use crate::social::{perceive, RewardReference, UtilityParams};

use super::config::{Condition, ExperimentConfig};
use super::seed::dyad_rng;

/// Cumulative statistics at one sampled episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    /// 1-based episode number.
    pub episode: u32,
    pub h_a: u32,
    pub h_b: u32,
    pub ties: u32,
    pub timeouts: u32,
    /// Episodes covered since the previous sample.
    pub interval: u32,
    pub interval_ticks: u64,
}

impl SampleRecord {
    pub fn fairness(&self) -> f64 {
        crate::metrics::fairness_ratio(self.h_a as u64, self.h_b as u64)
    }

    pub fn mean_episode_ticks(&self) -> f64 {
        self.interval_ticks as f64 / self.interval as f64
    }
}

/// Everything one dyad produces.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadSeries {
    pub alpha: f64,
    pub beta: f64,
    pub dyad_index: u32,
    pub samples: Vec<SampleRecord>,
    pub final_counts: FairnessTracker,
    /// Counts over the trailing `late_window` episodes.
    pub late_counts: FairnessTracker,
    pub timeouts: u64,
    pub session: SessionOutcome,
    pub log: Option<Vec<EpisodeOutcome>>,
    pub q_a: QTable,
    pub q_b: QTable,
}

impl DyadSeries {
    pub fn fairness_series(&self) -> Vec<f64> {
        self.samples.iter().map(SampleRecord::fairness).collect()
    }
}

/// Mutable simulation state for one dyad.
pub struct Dyad<'a> {
    cfg: &'a ExperimentConfig,
    utility: UtilityParams,
    dyad_index: u32,
    bins: Option<YBins>,
    pub q_a: QTable,
    pub q_b: QTable,
    refs: RewardReference,
    prev_a: AgentResult,
    prev_b: AgentResult,
    episode: u64,
    rng: ChaCha8Rng,
}

impl<'a> Dyad<'a> {
    pub fn new(cfg: &'a ExperimentConfig, utility: UtilityParams, dyad_index: u32) -> Result<Self> {
        cfg.validate()?;
        utility.validate()?;
        let bins = match cfg.condition {
            Condition::Ballistic => None,
            Condition::Dynamic => Some(cfg.y_bins()?),
        };
        let states = bins.map_or(OUTCOME_STATES, |b| b.state_count());
        Ok(Self {
            cfg,
            utility,
            dyad_index,
            bins,
            q_a: QTable::new(states),
            q_b: QTable::new(states),
            refs: RewardReference::new(),
            prev_a: AgentResult::Tie,
            prev_b: AgentResult::Tie,
            episode: 0,
            rng: dyad_rng(cfg.master_seed, utility.alpha, utility.beta, dyad_index),
        })
    }

    /// Opening states of the next episode given the previous results.
    fn opening_states(&self, prev_a: AgentResult, prev_b: AgentResult) -> (EncodedState, EncodedState) {
        match &self.bins {
            None => (encode_ballistic(prev_a), encode_ballistic(prev_b)),
            Some(bins) => {
                let (ya, yb) = (self.cfg.game.start_a.y, self.cfg.game.start_b.y);
                (bins.encode(prev_a, ya, yb), bins.encode(prev_b, yb, ya))
            }
        }
    }

    /// Applies the end-of-episode utilities to the last decision of each agent.
    fn finish(&mut self, outcome: &EpisodeOutcome, last: [(EncodedState, SpotChoice); 2]) {
        let (u_a, u_b) = perceive(outcome, &mut self.refs, &self.utility);
        let (next_a, next_b) = self.opening_states(outcome.result_a, outcome.result_b);
        let terminal = !self.cfg.chain_episodes;
        let lp = &self.cfg.learner;
        self.q_a.update(last[0].0, last[0].1, u_a, next_a, terminal, lp);
        self.q_b.update(last[1].0, last[1].1, u_b, next_b, terminal, lp);
        self.prev_a = outcome.result_a;
        self.prev_b = outcome.result_b;
        self.episode += 1;
    }

    pub fn play_episode(&mut self) -> Result<EpisodeOutcome> {
        let cfg = self.cfg;
        let eps = cfg.learner.epsilon_at(self.episode);
        let game = &cfg.game;
        let Some(bins) = self.bins else {
            let (s_a, s_b) = self.opening_states(self.prev_a, self.prev_b);
            let c_a = self.q_a.select_action(s_a, eps, &mut self.rng);
            let c_b = self.q_b.select_action(s_b, eps, &mut self.rng);
            let outcome = resolve_ballistic(game, c_a, c_b);
            self.finish(&outcome, [(s_a, c_a), (s_b, c_b)]);
            return Ok(outcome);
        };

        let mut state = dynamic_reset(game);
        loop {
            let s_a = bins.encode(self.prev_a, state.pos_a.y, state.pos_b.y);
            let s_b = bins.encode(self.prev_b, state.pos_b.y, state.pos_a.y);
            let c_a = self.q_a.select_action(s_a, eps, &mut self.rng);
            let c_b = self.q_b.select_action(s_b, eps, &mut self.rng);
            let (next, outcome) = dynamic_step(game, &state, c_a, c_b)?;
            if let Some(outcome) = outcome {
                self.finish(&outcome, [(s_a, c_a), (s_b, c_b)]);
                return Ok(outcome);
            }
            let n_a = bins.encode(self.prev_a, next.pos_a.y, next.pos_b.y);
            let n_b = bins.encode(self.prev_b, next.pos_b.y, next.pos_a.y);
            let lp = &cfg.learner;
            self.q_a.update(s_a, c_a, 0.0, n_a, false, lp);
            self.q_b.update(s_b, c_b, 0.0, n_b, false, lp);
            state = next;
        }
    }

    /// Plays the configured number of episodes.
    pub fn run(mut self) -> Result<DyadSeries> {
        let cfg = self.cfg;
        let total = cfg.episodes;
        let late_start = total - cfg.late_window;
        let window = cfg.classify.window;

        let mut tracker = FairnessTracker::new();
        let mut late = FairnessTracker::new();
        let mut recent: VecDeque<EpisodeOutcome> = VecDeque::with_capacity(window);
        let mut log = cfg.dyad_logs.then(|| Vec::with_capacity(total as usize));
        let mut samples = Vec::with_capacity((total / cfg.sample_every + 1) as usize);
        let (mut timeouts, mut interval, mut interval_ticks) = (0u64, 0u32, 0u64);

        for t in 0..total {
            let outcome = self.play_episode()?;
            tracker.record(&outcome);
            if t >= late_start {
                late.record(&outcome);
            }
            if recent.len() == window {
                recent.pop_front();
            }
            recent.push_back(outcome);
            if let Some(log) = log.as_mut() {
                log.push(outcome);
            }
            timeouts += outcome.timed_out as u64;
            interval += 1;
            interval_ticks += outcome.ticks as u64;

            let episode = t + 1;
            if episode % cfg.sample_every == 0 || episode == total {
                samples.push(SampleRecord {
                    episode: episode as u32,
                    h_a: tracker.h_count_a as u32,
                    h_b: tracker.h_count_b as u32,
                    ties: tracker.ties() as u32,
                    timeouts: timeouts as u32,
                    interval,
                    interval_ticks,
                });
                interval = 0;
                interval_ticks = 0;
            }
        }

        let recent: Vec<_> = recent.into();
        let session = classify_session(&recent, window, &cfg.classify)?;
        Ok(DyadSeries {
            alpha: self.utility.alpha,
            beta: self.utility.beta,
            dyad_index: self.dyad_index,
            samples,
            final_counts: tracker,
            late_counts: late,
            timeouts,
            session,
            log,
            q_a: self.q_a,
            q_b: self.q_b,
        })
    }
}

/// Simulates one dyad from scratch; re-runnable in isolation.
pub fn run_dyad(cfg: &ExperimentConfig, utility: UtilityParams, dyad_index: u32) -> Result<DyadSeries> {
    Dyad::new(cfg, utility, dyad_index)?.run()
}
