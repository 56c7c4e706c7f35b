use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::RngCore;

use super::config::{BcoRun, MabRun, SeedStreams, Stream};
use super::learner::{BcoLearner, BcoPayload, DelayKnowledge, Delivery, FeedbackKind, MabLearner};
use super::monitor::{monitor_invariants, BcoTelemetry, BcoUpdate, MabTelemetry, MonitorReport, MonitorSet, Telemetry};
use crate::bco::{FeasibleSet, QueryValues};
use crate::delay::DelaySchedule;
use crate::env::{best_fixed_arm, best_fixed_point, BcoEnvironment, MabEnvironment};
use crate::error::{Error, Result};
use crate::feedback::{FeedbackEvent, FeedbackQueue, TieOrder};
use crate::mab::MabObservation;
use crate::regret::RegretTrace;

/// Hands one event to a learner, withholding the origin slot from learners
/// that must not know delays.
fn deliver<P, R>(knowledge: DelayKnowledge, event: &FeedbackEvent<P>, apply: impl FnOnce(Delivery<'_, P>) -> R) -> R {
    match knowledge {
        DelayKnowledge::Unknown => apply(Delivery::Anonymous(event.payload())),
        DelayKnowledge::Known => apply(Delivery::Stamped(event)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MabSimulation {
    pub regret: RegretTrace,
    /// Arm played in each slot (0-based).
    pub arms: Vec<usize>,
    pub best_arm: usize,
    pub telemetry: MabTelemetry,
}

/// The slot loop for bandits: act, incur `l_t(a_t)`, enqueue the feedback
/// for slot `t + d_t`, then apply everything due this slot in tie order.
pub fn simulate_mab(
    learner: &mut dyn MabLearner,
    env: &MabEnvironment,
    schedule: &DelaySchedule,
    tie_order: TieOrder,
    record_distributions: bool,
    rng: &mut dyn RngCore,
) -> Result<MabSimulation> {
    let horizon = env.horizon();
    if schedule.horizon() != horizon {
        return Err(Error::ConfigMismatch(format!(
            "schedule has {} slots, environment has {horizon}",
            schedule.horizon()
        )));
    }
    if learner.distribution().len() != env.arms() {
        return Err(Error::ConfigMismatch(format!(
            "learner has {} arms, environment has {}",
            learner.distribution().len(),
            env.arms()
        )));
    }
    let knowledge = learner.delay_knowledge();
    let mut queue = FeedbackQueue::new(horizon, tie_order);
    let mut losses = Vec::with_capacity(horizon);
    let mut arms = Vec::with_capacity(horizon);
    let mut delivery_order = Vec::with_capacity(horizon);
    let mut distributions = Vec::new();
    if record_distributions {
        distributions.push(learner.distribution().clone());
    }
    for t in 1..=horizon {
        let arm = learner.select_arm(t, rng);
        let loss = env.loss(t, arm);
        arms.push(arm);
        losses.push(loss);
        queue.push(t, schedule.arrival(t), MabObservation { loss, arm });
        for event in queue.drain_due(t) {
            delivery_order.push(event.origin_slot());
            deliver(knowledge, &event, |d| learner.apply(d))?;
            if record_distributions {
                distributions.push(learner.distribution().clone());
            }
        }
    }
    let (best_arm, _) = best_fixed_arm(env);
    let comparator: Vec<f64> = (1..=horizon).map(|t| env.loss(t, best_arm)).collect();
    Ok(MabSimulation {
        regret: RegretTrace::from_losses(&losses, &comparator),
        arms,
        best_arm,
        telemetry: MabTelemetry {
            schedule: schedule.clone(),
            delivery_order,
            distributions,
            safeguards: learner.safeguards(),
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BcoSimulation {
    /// Loss at the played point.
    pub regret: RegretTrace,
    /// Loss averaged over the played point and all queried points.
    pub query_regret: RegretTrace,
    pub comparator_point: Vec<f64>,
    pub telemetry: BcoTelemetry,
}

/// The slot loop for bandit convex optimization. `set` is the unshrunk
/// feasible set `X`, over which the comparator is computed.
pub fn simulate_bco(
    learner: &mut dyn BcoLearner,
    env: &Arc<BcoEnvironment>,
    set: &FeasibleSet,
    schedule: &DelaySchedule,
    tie_order: TieOrder,
    monitors: MonitorSet,
    rng: &mut dyn RngCore,
) -> Result<BcoSimulation> {
    let horizon = env.horizon();
    if schedule.horizon() != horizon {
        return Err(Error::ConfigMismatch(format!(
            "schedule has {} slots, environment has {horizon}",
            schedule.horizon()
        )));
    }
    if learner.action().len() != env.dim() {
        return Err(Error::ConfigMismatch(format!(
            "learner works in dimension {}, environment in {}",
            learner.action().len(),
            env.dim()
        )));
    }
    let record_updates = monitors.needs_updates();
    let knowledge = learner.delay_knowledge();
    let kind = learner.feedback_kind();
    let mut queue = FeedbackQueue::new(horizon, tie_order);
    let mut losses = Vec::with_capacity(horizon);
    let mut averaged = Vec::with_capacity(horizon);
    let mut actions = Vec::with_capacity(horizon);
    let mut queries_seen = Vec::new();
    let mut updates = Vec::new();
    let mut delivery_order = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let x = learner.action().to_vec();
        let queries = learner.queries(t, rng);
        let at_action = env.value(t, &x);
        let at_queries: Vec<f64> = queries.iter().map(|q| env.value(t, q)).collect();
        losses.push(at_action);
        averaged.push((at_action + at_queries.iter().sum::<f64>()) / (1 + at_queries.len()) as f64);
        let payload = match kind {
            FeedbackKind::Values => BcoPayload::Values(QueryValues { at_action, at_queries }),
            FeedbackKind::Gradient => BcoPayload::Gradient(env.gradient(t, &x)),
        };
        queue.push(t, schedule.arrival(t), payload);
        actions.push(x);
        if monitors.feasibility {
            queries_seen.push(queries);
        }
        for event in queue.drain_due(t) {
            delivery_order.push(event.origin_slot());
            let before = record_updates.then(|| learner.action().to_vec());
            let gradient = deliver(knowledge, &event, |d| learner.apply(d))?;
            if let Some(before) = before {
                updates.push(BcoUpdate {
                    origin: event.origin_slot(),
                    gradient,
                    before,
                    after: learner.action().to_vec(),
                });
            }
        }
    }
    let (comparator_point, _) = best_fixed_point(env, &set.unshrunk())?;
    let comparator: Vec<f64> = (1..=horizon).map(|t| env.value(t, &comparator_point)).collect();
    Ok(BcoSimulation {
        regret: RegretTrace::from_losses(&losses, &comparator),
        query_regret: RegretTrace::from_losses(&averaged, &comparator),
        comparator_point,
        telemetry: BcoTelemetry {
            schedule: schedule.clone(),
            delivery_order,
            environment: Arc::clone(env),
            set: set.unshrunk(),
            iterate_set: learner.iterate_set().clone(),
            estimator: learner.estimator(),
            eta: learner.step_size(),
            actions,
            queries: queries_seen,
            updates,
        },
    })
}

/// Outcome of one (configuration, seed) run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub name: String,
    pub algorithm: &'static str,
    pub seed: u64,
    pub regret: RegretTrace,
    /// Regret of the query-averaged loss (BCO only).
    pub query_regret: Option<RegretTrace>,
    pub monitors: MonitorReport,
    pub wall_time: Duration,
    /// Arms played (MAB only).
    pub arms: Vec<usize>,
    /// Points played (BCO only).
    pub iterates: Vec<Vec<f64>>,
    pub total_delay: usize,
    pub max_delay: usize,
}

impl RunResult {
    pub fn horizon(&self) -> usize {
        self.regret.horizon()
    }

    /// `Reg_T / T`.
    pub fn normalized_final(&self) -> f64 {
        self.regret.final_regret() / self.horizon() as f64
    }
}

/// Runs one bandit configuration with one master seed.
pub fn run_mab(run: &MabRun, seed: u64) -> Result<RunResult> {
    let started = Instant::now();
    let streams = SeedStreams::new(seed);
    let env = run.environment.resolve(&streams)?;
    let schedule = if run.algorithm.is_delayed() {
        run.delays.resolve(env.horizon(), &streams)?
    } else {
        DelaySchedule::zero(env.horizon())
    };
    let mut learner = run.algorithm.build(env.arms(), &schedule)?;
    let mut rng = streams.rng(Stream::ArmSampling);
    let sim = simulate_mab(
        learner.as_mut(),
        &env,
        &schedule,
        run.tie_order,
        run.monitors.needs_distributions(),
        &mut rng,
    )?;
    let monitors = monitor_invariants(&Telemetry::Mab(sim.telemetry), run.monitors);
    Ok(RunResult {
        name: run.name.clone(),
        algorithm: run.algorithm.label(),
        seed,
        regret: sim.regret,
        query_regret: None,
        monitors,
        wall_time: started.elapsed(),
        arms: sim.arms,
        iterates: Vec::new(),
        total_delay: schedule.total(),
        max_delay: schedule.max_delay(),
    })
}

/// Runs one BCO configuration with one master seed.
pub fn run_bco(run: &BcoRun, seed: u64) -> Result<RunResult> {
    let started = Instant::now();
    let streams = SeedStreams::new(seed);
    let env = run.environment.resolve(&streams)?;
    run.set.check_dim(env.dim())?;
    let schedule = if run.algorithm.is_delayed() {
        run.delays.resolve(env.horizon(), &streams)?
    } else {
        DelaySchedule::zero(env.horizon())
    };
    let mut learner = run.algorithm.build(env.dim(), &run.set, &schedule)?;
    let mut rng = streams.rng(Stream::Directions);
    let sim = simulate_bco(
        learner.as_mut(),
        &env,
        &run.set,
        &schedule,
        run.tie_order,
        run.monitors,
        &mut rng,
    )?;
    let iterates = sim.telemetry.actions.clone();
    let monitors = monitor_invariants(&Telemetry::Bco(sim.telemetry), run.monitors);
    Ok(RunResult {
        name: run.name.clone(),
        algorithm: run.algorithm.label(),
        seed,
        regret: sim.regret,
        query_regret: Some(sim.query_regret),
        monitors,
        wall_time: started.elapsed(),
        arms: Vec::new(),
        iterates,
        total_delay: schedule.total(),
        max_delay: schedule.max_delay(),
    })
}
