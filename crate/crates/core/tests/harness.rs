mod common;

use std::cell::Cell;
use std::sync::Arc;

use delayband::bco::{DbgdParams, DbgdState, FeasibleSet, ProjectedGradient};
use delayband::env::{periodic_delays, synthetic_mab_losses, BcoEnvironment, MabEnvironment, REFERENCE_PATTERN};
use delayband::harness::{
    aggregate_csv, run_mab, run_simulation, simulate_bco, simulate_mab, sweep, trace_csv, BcoAlgorithm,
    BcoLearner, BcoPayload, CheckStatus, DelayKnowledge, DelaySpec, Delivery, Dexp3Tuning, EstimatorKind,
    FeedbackKind, MabAlgorithm, MabEnvSpec, MabLearner, MonitorSet, Rate, Simulation, SimulationConfig,
};
use delayband::mab::{estimate_loss, sample_arm, Bold, Dexp3, Dexp3Params, Exp3, MabObservation};
use delayband::{DelaySchedule, Error, ProbabilityVector, Result, TieOrder};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{mab_config, mab_run};

/// Forwards to DEXP3 but fails loudly if it is ever handed an origin slot.
struct BlindMab {
    inner: Dexp3,
    seen: Cell<usize>,
}

impl MabLearner for BlindMab {
    fn delay_knowledge(&self) -> DelayKnowledge {
        MabLearner::delay_knowledge(&self.inner)
    }

    fn distribution(&self) -> &ProbabilityVector {
        MabLearner::distribution(&self.inner)
    }

    fn select_arm(&mut self, slot: usize, rng: &mut dyn RngCore) -> usize {
        MabLearner::select_arm(&mut self.inner, slot, rng)
    }

    fn apply(&mut self, delivery: Delivery<'_, MabObservation>) -> Result<()> {
        match delivery {
            Delivery::Anonymous(obs) => {
                self.seen.set(self.seen.get() + 1);
                MabLearner::apply(&mut self.inner, Delivery::Anonymous(obs))
            }
            Delivery::Stamped(event) => panic!("origin slot {} exposed to DEXP3", event.origin_slot()),
        }
    }
}

struct BlindBco {
    inner: DbgdState,
    seen: usize,
}

impl BcoLearner for BlindBco {
    fn delay_knowledge(&self) -> DelayKnowledge {
        self.inner.delay_knowledge()
    }

    fn feedback_kind(&self) -> FeedbackKind {
        self.inner.feedback_kind()
    }

    fn estimator(&self) -> EstimatorKind {
        self.inner.estimator()
    }

    fn action(&self) -> &[f64] {
        BcoLearner::action(&self.inner)
    }

    fn queries(&mut self, slot: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        self.inner.queries(slot, rng)
    }

    fn apply(&mut self, delivery: Delivery<'_, BcoPayload>) -> Result<Vec<f64>> {
        match delivery {
            Delivery::Anonymous(payload) => {
                self.seen += 1;
                self.inner.apply(Delivery::Anonymous(payload))
            }
            Delivery::Stamped(event) => panic!("origin slot {} exposed to DBGD", event.origin_slot()),
        }
    }

    fn step_size(&self) -> f64 {
        self.inner.step_size()
    }

    fn iterate_set(&self) -> &FeasibleSet {
        self.inner.iterate_set()
    }
}

fn reference_schedule(horizon: usize) -> DelaySchedule {
    periodic_delays(horizon, &REFERENCE_PATTERN).unwrap()
}

fn linear_env(horizon: usize) -> Arc<BcoEnvironment> {
    let b = (1..=horizon)
        .map(|t| {
            let t = t as f64;
            vec![(0.7 * t).sin(), 0.5 - (0.3 * t).cos(), 0.25]
        })
        .collect();
    Arc::new(BcoEnvironment::linear(b).unwrap())
}

#[test]
fn dexp3_never_sees_origin_slots() {
    let horizon = 300;
    let env = synthetic_mab_losses(horizon, 5, 100).unwrap();
    let schedule = reference_schedule(horizon);
    let params = Dexp3Params::theorem1(horizon, schedule.total(), schedule.max_delay(), 5).unwrap();
    let mut spy = BlindMab {
        inner: Dexp3::new(params),
        seen: Cell::new(0),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    simulate_mab(&mut spy, &env, &schedule, TieOrder::default(), false, &mut rng).unwrap();
    assert_eq!(spy.seen.get(), horizon);
}

#[test]
fn dbgd_never_sees_origin_slots() {
    let horizon = 200;
    let env = linear_env(horizon);
    let schedule = reference_schedule(horizon);
    let set = FeasibleSet::ball(1.0).unwrap();
    let params = DbgdParams::theorem2(horizon, schedule.total(), 3).unwrap();
    let mut spy = BlindBco {
        inner: DbgdState::new(params, &set, 3).unwrap(),
        seen: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    simulate_bco(&mut spy, &env, &set, &schedule, TieOrder::default(), MonitorSet::none(), &mut rng).unwrap();
    assert_eq!(spy.seen, horizon);
}

#[test]
fn known_delay_learner_receives_stamps() {
    let horizon = 50;
    let env = synthetic_mab_losses(horizon, 3, 10).unwrap();
    let schedule = reference_schedule(horizon);
    let mut bold = Bold::new(3, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let sim = simulate_mab(&mut bold, &env, &schedule, TieOrder::default(), false, &mut rng).unwrap();
    assert_eq!(sim.telemetry.delivery_order.len(), horizon);
    assert_eq!(bold.outstanding(), 0);
}

#[test]
fn same_slot_feedback_follows_tie_order() {
    let env = MabEnvironment::new(vec![vec![0.1, 0.9]; 3]).unwrap();
    let schedule = DelaySchedule::new(vec![2, 0, 0]).unwrap();
    let order = |tie| {
        let mut learner = Exp3::new(2, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        simulate_mab(&mut learner, &env, &schedule, tie, false, &mut rng)
            .unwrap()
            .telemetry
            .delivery_order
    };
    assert_eq!(order(TieOrder::OriginDescending), vec![2, 3, 1]);
    assert_eq!(order(TieOrder::OriginAscending), vec![2, 1, 3]);
}

#[test]
fn empty_slot_leaves_the_iterate_in_place() {
    let horizon = 4;
    let env = linear_env(horizon);
    let schedule = DelaySchedule::new(vec![2, 0, 1, 0]).unwrap();
    let set = FeasibleSet::ball(1.0).unwrap();
    let mut learner = DbgdState::new(DbgdParams::new(0.2, 0.1).unwrap(), &set, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let sim = simulate_bco(&mut learner, &env, &set, &schedule, TieOrder::default(), MonitorSet::none(), &mut rng)
        .unwrap();
    let actions = &sim.telemetry.actions;
    // Nothing arrives at the end of slot 1.
    assert_eq!(actions[0], actions[1]);
    assert_ne!(actions[1], actions[2]);
}

#[test]
fn unsafeguarded_dexp3_matches_exp3_without_delay() {
    let horizon = 2000;
    let arms = 5;
    let eta = 0.05;
    let env = synthetic_mab_losses(horizon, arms, 500).unwrap();
    let schedule = DelaySchedule::zero(horizon);
    let mut dexp3 = Dexp3::new(Dexp3Params::without_safeguards(eta, arms));
    let mut exp3 = Exp3::new(arms, eta);
    let mut rng_a = ChaCha8Rng::seed_from_u64(11);
    let mut rng_b = ChaCha8Rng::seed_from_u64(11);
    let a = simulate_mab(&mut dexp3, &env, &schedule, TieOrder::default(), true, &mut rng_a).unwrap();
    let b = simulate_mab(&mut exp3, &env, &schedule, TieOrder::default(), true, &mut rng_b).unwrap();
    assert_eq!(a.arms, b.arms);
    for (p, q) in a.telemetry.distributions.iter().zip(&b.telemetry.distributions) {
        for k in 0..arms {
            assert!((p[k] - q[k]).abs() <= 1e-12);
        }
    }
}

#[test]
fn bold_equals_exp3_without_delay() {
    let horizon = 1000;
    let env = synthetic_mab_losses(horizon, 4, 300).unwrap();
    let schedule = DelaySchedule::zero(horizon);
    let mut bold = Bold::new(4, 0.07);
    let mut exp3 = Exp3::new(4, 0.07);
    let mut rng_a = ChaCha8Rng::seed_from_u64(5);
    let mut rng_b = ChaCha8Rng::seed_from_u64(5);
    let a = simulate_mab(&mut bold, &env, &schedule, TieOrder::default(), true, &mut rng_a).unwrap();
    let b = simulate_mab(&mut exp3, &env, &schedule, TieOrder::default(), true, &mut rng_b).unwrap();
    assert_eq!(a.arms, b.arms);
    assert_eq!(a.telemetry.distributions, b.telemetry.distributions);
}

#[test]
fn dbgd_equals_shrunk_ogd_on_linear_losses_without_delay() {
    let horizon = 1000;
    let env = linear_env(horizon);
    let set = FeasibleSet::ball(1.0).unwrap();
    let schedule = DelaySchedule::zero(horizon);
    let params = DbgdParams::theorem2(horizon, 0, 3).unwrap();
    let mut dbgd = DbgdState::new(params, &set, 3).unwrap();
    let mut ogd = ProjectedGradient::new(params.eta, set.shrunk(params.delta).unwrap(), 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let a = simulate_bco(&mut dbgd, &env, &set, &schedule, TieOrder::default(), MonitorSet::none(), &mut rng).unwrap();
    let b = simulate_bco(&mut ogd, &env, &set, &schedule, TieOrder::default(), MonitorSet::none(), &mut rng).unwrap();
    for (x, y) in a.telemetry.actions.iter().zip(&b.telemetry.actions) {
        for (u, v) in x.iter().zip(y) {
            assert!((u - v).abs() <= 1e-9);
        }
    }
}

/// With the sampling distribution equal to the current one, the scaled
/// importance-weighted estimate is unbiased.
#[test]
fn loss_estimate_is_unbiased_without_delay() {
    let p = ProbabilityVector::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    let losses = [0.9, 0.1, 0.5, 0.3];
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 200_000;
    let mut sum = [0.0; 4];
    let mut sum_sq = [0.0; 4];
    for _ in 0..n {
        let arm = sample_arm(&p, &mut rng);
        let est = estimate_loss(losses[arm], arm, &p).unwrap();
        for k in 0..4 {
            sum[k] += est[k];
            sum_sq[k] += est[k] * est[k];
        }
    }
    for k in 0..4 {
        let mean = sum[k] / n as f64;
        let var = sum_sq[k] / n as f64 - mean * mean;
        let se = (var / n as f64).sqrt();
        assert!((mean - losses[k]).abs() <= 4.0 * se, "arm {k}: {mean} vs {}", losses[k]);
    }
}

#[test]
fn dexp3_run_passes_every_monitor() {
    let run = mab_run(
        MabAlgorithm::Dexp3(Dexp3Tuning::Auto { eta_scale: 1.0 }),
        500,
        MonitorSet::all(),
    );
    let result = run_mab(&run, 9).unwrap();
    assert!(result.monitors.passed(), "{}", result.monitors);
    assert_eq!(result.monitors.get("floor").unwrap().status, CheckStatus::Passed);
}

#[test]
fn unsafeguarded_run_skips_safeguard_checks() {
    let run = mab_run(
        MabAlgorithm::Dexp3(Dexp3Tuning::Unsafeguarded { eta: Rate::default() }),
        200,
        MonitorSet::all(),
    );
    let result = run_mab(&run, 1).unwrap();
    assert_eq!(result.monitors.get("floor").unwrap().status, CheckStatus::NotApplicable);
    assert_eq!(result.monitors.get("slot-lemma").unwrap().status, CheckStatus::Passed);
}

#[test]
fn single_seed_sweep_equals_the_run() {
    let config = mab_config(MabAlgorithm::Dexp3(Dexp3Tuning::Auto { eta_scale: 1.0 }), 400, 1);
    let entries = sweep(std::slice::from_ref(&config));
    let single = run_simulation(&config.simulation, 0).unwrap();
    let entry = &entries[0];
    let swept = entry.runs[0].1.as_ref().unwrap();
    assert_eq!(swept.regret, single.regret);
    assert_eq!(swept.arms, single.arms);
    let aggregate = entry.aggregate.as_ref().unwrap();
    assert_eq!(aggregate.runs, 1);
    assert_eq!(aggregate.mean_normalized, single.regret.normalized_by_horizon());
    assert!(aggregate.std_normalized.iter().all(|&s| s == 0.0));
}

#[test]
fn sweeps_repeat_byte_for_byte() {
    let configs = vec![
        mab_config(MabAlgorithm::Exp3(Rate::default()), 300, 4),
        mab_config(MabAlgorithm::Dexp3(Dexp3Tuning::Auto { eta_scale: 1.0 }), 300, 4),
        common::bco_config(BcoAlgorithm::Fkm { eta: None, delta: None }, 300, 3),
    ];
    let render = || {
        sweep(&configs)
            .iter()
            .map(|e| {
                let traces: String = e.successes().map(|r| trace_csv(&r.regret)).collect();
                traces + &aggregate_csv(e.aggregate.as_ref().unwrap())
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(render(), render());
}

#[test]
fn failing_run_does_not_abort_siblings() {
    let mut broken = mab_run(MabAlgorithm::Exp3(Rate::default()), 100, MonitorSet::none());
    broken.environment = MabEnvSpec::Ratings {
        path: "/nonexistent/ratings.csv".into(),
        arms: 3,
    };
    let configs = vec![
        SimulationConfig {
            simulation: Simulation::Mab(broken),
            seeds: vec![0, 1],
        },
        mab_config(MabAlgorithm::Exp3(Rate::default()), 100, 2),
    ];
    let entries = sweep(&configs);
    assert_eq!(entries[0].failures(), 2);
    assert!(matches!(entries[0].runs[0].1, Err(Error::Io { .. })));
    assert!(entries[0].aggregate.is_none());
    assert_eq!(entries[1].failures(), 0);
    assert_eq!(entries[1].aggregate.as_ref().unwrap().runs, 2);
}

#[test]
fn delay_file_with_wrong_horizon_is_rejected() {
    let mut run = mab_run(MabAlgorithm::Bold(Rate::default()), 100, MonitorSet::none());
    run.delays = DelaySpec::Fixed(DelaySchedule::zero(99));
    assert!(matches!(run_mab(&run, 0), Err(Error::ConfigMismatch(_))));
}
