use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use boe_core::agent::{EncodedState, LearnerParams, QTable};
use boe_core::env::{
    dynamic_reset, dynamic_step, resolve_ballistic, AgentResult, EpisodeOutcome, GameConfig, SpotChoice,
};
use boe_core::metrics::{fairness_ratio, FairnessTracker};
use boe_core::social::{perceive, utility, RewardReference, UtilityParams};

fn choice() -> impl Strategy<Value = SpotChoice> {
    prop_oneof![Just(SpotChoice::High), Just(SpotChoice::Low)]
}

/// Episode outcome with a-high / b-high / tie encoded as 0 / 1 / 2.
fn outcome(kind: u8) -> EpisodeOutcome {
    let cfg = GameConfig::default();
    match kind {
        0 => resolve_ballistic(&cfg, SpotChoice::High, SpotChoice::Low),
        1 => resolve_ballistic(&cfg, SpotChoice::Low, SpotChoice::High),
        _ => resolve_ballistic(&cfg, SpotChoice::High, SpotChoice::High),
    }
}

fn play(cfg: &GameConfig, choices_a: &[SpotChoice], choices_b: &[SpotChoice]) -> Option<EpisodeOutcome> {
    let mut state = dynamic_reset(cfg);
    for (&a, &b) in choices_a.iter().zip(choices_b) {
        let (next, out) = dynamic_step(cfg, &state, a, b).unwrap();
        if out.is_some() {
            return out;
        }
        state = next;
    }
    None
}

fn assert_outcome_consistent(cfg: &GameConfig, o: &EpisodeOutcome) {
    let pair = (o.reward_a, o.reward_b);
    assert!(
        pair == (0.0, 0.0) || pair == (cfg.reward_high, cfg.reward_low) || pair == (cfg.reward_low, cfg.reward_high)
    );
    assert_eq!(o.result_a == AgentResult::Tie, o.result_b == AgentResult::Tie);
    match o.result_a {
        AgentResult::GotHigh => assert_eq!((o.result_b, o.reward_a), (AgentResult::GotLow, cfg.reward_high)),
        AgentResult::GotLow => assert_eq!((o.result_b, o.reward_a), (AgentResult::GotHigh, cfg.reward_low)),
        AgentResult::Tie => assert_eq!(pair, (0.0, 0.0)),
    }
    if o.timed_out {
        assert!(o.is_tie());
        assert_eq!(o.ticks, cfg.max_ticks);
    }
}

#[test]
fn symmetric_choice_sequences_always_tie() {
    // Exhaustive over every sequence of length <= 12 with the tick budget
    // also set to 12, so every full-length sequence terminates.
    let cfg = GameConfig {
        max_ticks: 12,
        ..Default::default()
    };
    for len in 1..=12usize {
        for bits in 0u32..(1 << len) {
            let seq: Vec<SpotChoice> = (0..len)
                .map(|i| {
                    if bits >> i & 1 == 1 {
                        SpotChoice::High
                    } else {
                        SpotChoice::Low
                    }
                })
                .collect();
            let out = play(&cfg, &seq, &seq);
            if len == 12 {
                assert!(out.is_some());
            }
            if let Some(o) = out {
                assert!(o.is_tie(), "sequence {seq:?} gave {o:?}");
            }
        }
    }
}

proptest! {
    #[test]
    fn dynamic_outcomes_are_consistent_and_terminate(
        a in prop::collection::vec(choice(), 60),
        b in prop::collection::vec(choice(), 60),
        tie in 0.5f64..6.0,
        max_ticks in 1u32..60,
    ) {
        let cfg = GameConfig { tie_radius: tie, max_ticks, ..Default::default() };
        let mut state = dynamic_reset(&cfg);
        let mut emitted = None;
        let (lo_x, hi_x, lo_y, hi_y) = (-10.0 - cfg.speed, 10.0 + cfg.speed, -5.0 - cfg.speed, 5.0 + cfg.speed);
        for t in 0..max_ticks as usize {
            let (next, out) = dynamic_step(&cfg, &state, a[t], b[t]).unwrap();
            for p in [next.pos_a, next.pos_b] {
                prop_assert!(p.x >= lo_x && p.x <= hi_x && p.y >= lo_y && p.y <= hi_y);
            }
            state = next;
            if out.is_some() {
                emitted = out;
                break;
            }
        }
        let o = emitted.expect("episode must end within max_ticks");
        assert_outcome_consistent(&cfg, &o);
        prop_assert_eq!(o.ticks, state.tick);
        prop_assert!(dynamic_step(&cfg, &state, SpotChoice::High, SpotChoice::High).is_err());
    }

    #[test]
    fn fixed_choice_distance_strictly_decreases(c in choice(), speed in 0.1f64..3.0) {
        let cfg = GameConfig { speed, max_ticks: 1000, ..Default::default() };
        let target = cfg.spot(c);
        let mut state = dynamic_reset(&cfg);
        let mut last = state.pos_a.distance(target);
        loop {
            // b parks on the other spot's path so only a can reach `target` first
            let (next, out) = dynamic_step(&cfg, &state, c, c.other()).unwrap();
            let d = next.pos_a.distance(target);
            prop_assert!(d < last);
            last = d;
            state = next;
            if out.is_some() {
                break;
            }
        }
    }

    #[test]
    fn ballistic_roles_swap(x in choice(), y in choice()) {
        let cfg = GameConfig::default();
        prop_assert_eq!(resolve_ballistic(&cfg, x, y), resolve_ballistic(&cfg, y, x).swapped());
        assert_outcome_consistent(&cfg, &resolve_ballistic(&cfg, x, y));
    }

    #[test]
    fn q_values_stay_bounded(
        updates in prop::collection::vec((0usize..6, choice(), -4.0f64..=4.0, 0usize..6, any::<bool>()), 1..400),
        mu in 0.0f64..=1.0,
        gamma in 0.0f64..0.99,
    ) {
        let p = LearnerParams { mu, gamma, ..Default::default() };
        let bound = 4.0 / (1.0 - gamma) + 1e-9;
        let mut q = QTable::new(6);
        for (s, a, r, s2, term) in updates {
            q.update(EncodedState(s), a, r, EncodedState(s2), term, &p);
        }
        for (_, [h, l]) in q.rows() {
            prop_assert!(h.is_finite() && l.is_finite());
            prop_assert!(h.abs() <= bound && l.abs() <= bound);
        }
    }

    #[test]
    fn consistent_q_is_a_fixed_point(r in -4.0f64..4.0, gamma in 0.0f64..0.99, mu in 0.0f64..=1.0) {
        // self-loop s -> s under action High with constant reward r
        let p = LearnerParams { mu, gamma, ..Default::default() };
        let v = r / (1.0 - gamma);
        let mut q = QTable::new(1);
        q.set(EncodedState(0), SpotChoice::High, v);
        q.set(EncodedState(0), SpotChoice::Low, v - 1.0);
        for _ in 0..50 {
            q.update(EncodedState(0), SpotChoice::High, r, EncodedState(0), false, &p);
        }
        prop_assert!((q.get(EncodedState(0), SpotChoice::High) - v).abs() <= 1e-9 * v.abs().max(1.0));
    }

    #[test]
    fn greedy_choice_ignores_constant_shift(h in -10.0f64..10.0, l in -10.0f64..10.0, c in -100.0f64..100.0, seed in any::<u64>()) {
        let mut q = QTable::new(1);
        let mut shifted = QTable::new(1);
        let s = EncodedState(0);
        q.set(s, SpotChoice::High, h);
        q.set(s, SpotChoice::Low, l);
        shifted.set(s, SpotChoice::High, h + c);
        shifted.set(s, SpotChoice::Low, l + c);
        let same_order = (h > l) == (h + c > l + c) && (h == l) == (h + c == l + c);
        prop_assume!(same_order);
        let mut r1 = ChaCha8Rng::seed_from_u64(seed);
        let mut r2 = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            prop_assert_eq!(q.select_action(s, 0.0, &mut r1), shifted.select_action(s, 0.0, &mut r2));
        }
    }

    #[test]
    fn same_seed_same_table(seed in any::<u64>(), stream in prop::collection::vec((0usize..3, -4.0f64..4.0), 1..200)) {
        let p = LearnerParams::default();
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut q = QTable::new(3);
            for &(s, r) in &stream {
                let a = q.select_action(EncodedState(s), 0.3, &mut rng);
                q.update(EncodedState(s), a, r, EncodedState((s + 1) % 3), false, &p);
            }
            q
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn utility_never_exceeds_reward(
        r in -10.0f64..10.0, ri in -20.0f64..20.0, rj in -20.0f64..20.0,
        alpha in 0.0f64..2.0, beta in 0.0f64..2.0,
    ) {
        let p = UtilityParams { alpha, beta };
        let u = utility(r, ri, rj, &p);
        prop_assert!(u <= r);
        let untouched = ri == rj || (ri > rj && beta == 0.0) || (ri < rj && alpha == 0.0);
        prop_assert_eq!(u == r, untouched);
    }

    #[test]
    fn perception_is_agent_symmetric(kinds in prop::collection::vec(0u8..3, 1..30), alpha in 0.0f64..1.0, beta in 0.0f64..1.0) {
        let p = UtilityParams { alpha, beta };
        let mut refs = RewardReference::new();
        let mut mirrored = RewardReference::new();
        for k in kinds {
            let o = outcome(k);
            let (ua, ub) = perceive(&o, &mut refs, &p);
            let (va, vb) = perceive(&o.swapped(), &mut mirrored, &p);
            prop_assert_eq!((ua, ub), (vb, va));
        }
    }

    #[test]
    fn fairness_is_a_swap_invariant_ratio(h_a in 0u64..1000, h_b in 0u64..1000) {
        let f = fairness_ratio(h_a, h_b);
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert_eq!(f, fairness_ratio(h_b, h_a));
        prop_assert_eq!(f == 1.0, h_a == h_b);
    }

    #[test]
    fn tracker_replays_from_log(kinds in prop::collection::vec(0u8..3, 0..200)) {
        let log: Vec<_> = kinds.iter().map(|&k| outcome(k)).collect();
        let mut live = FairnessTracker::new();
        for o in &log {
            live.record(o);
            prop_assert!(live.h_count_a + live.h_count_b <= live.episodes_seen);
        }
        prop_assert_eq!(FairnessTracker::from_log(&log), live);
    }
}
