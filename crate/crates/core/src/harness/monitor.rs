//! Runtime checks of the invariants the analysis relies on.

use std::fmt;
use std::sync::Arc;

use super::learner::EstimatorKind;
use crate::bco::FeasibleSet;
use crate::delay::DelaySchedule;
use crate::env::BcoEnvironment;
use crate::error::{Error, Result};
use crate::mab::Dexp3Params;
use crate::simplex::ProbabilityVector;
use crate::virtual_map::VirtualSlotMap;

/// Slack allowed on bound checks, absorbing floating-point rounding.
pub const BOUND_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MonitorSet {
    /// Virtual-slot lags: nonnegative, at most `2d̄`, summing to `D`.
    pub slot_lemma: bool,
    /// Every origin slot delivered exactly once.
    pub delivery: bool,
    /// `p_prev(k)/p_next(k) <= 1/(1 - δ2 - ηδ1)`.
    pub shrink_ratio: bool,
    /// `p_next(k)/p_prev(k) <= max{1 + δ2, 1/(1 - ηδ1)}`.
    pub growth_ratio: bool,
    /// `p(k) >= δ2/(K(1 + δ2))`.
    pub floor: bool,
    /// `‖g‖ <= √K L` and `‖g - ∇f‖ <= βδ√K/2`.
    pub gradient_bounds: bool,
    /// Iterates in `X_δ`, queries in `X`.
    pub feasibility: bool,
    /// `‖x_after - x_before‖ <= η√K L` per update.
    pub displacement: bool,
}

pub const MONITOR_NAMES: [&str; 8] = [
    "slot-lemma",
    "delivery",
    "shrink-ratio",
    "growth-ratio",
    "floor",
    "gradient-bounds",
    "feasibility",
    "displacement",
];

impl MonitorSet {
    pub fn all() -> Self {
        Self {
            slot_lemma: true,
            delivery: true,
            shrink_ratio: true,
            growth_ratio: true,
            floor: true,
            gradient_bounds: true,
            feasibility: true,
            displacement: true,
        }
    }

    pub fn none() -> Self {
        Self::default()
    }

    fn flag(&mut self, name: &str) -> Option<&mut bool> {
        Some(match name {
            "slot-lemma" => &mut self.slot_lemma,
            "delivery" => &mut self.delivery,
            "shrink-ratio" => &mut self.shrink_ratio,
            "growth-ratio" => &mut self.growth_ratio,
            "floor" => &mut self.floor,
            "gradient-bounds" => &mut self.gradient_bounds,
            "feasibility" => &mut self.feasibility,
            "displacement" => &mut self.displacement,
            _ => return None,
        })
    }

    /// Parses a comma-separated list of monitor names, `all` or `none`.
    pub fn parse(list: &str) -> Result<Self> {
        let mut set = Self::none();
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match name {
                "all" => set = Self::all(),
                "none" => set = Self::none(),
                _ => {
                    *set.flag(name).ok_or_else(|| {
                        Error::param(
                            "monitors",
                            format!("unknown monitor `{name}` (known: all, none, {})", MONITOR_NAMES.join(", ")),
                        )
                    })? = true
                }
            }
        }
        Ok(set)
    }

    pub fn enabled(&self) -> Vec<&'static str> {
        let mut copy = *self;
        MONITOR_NAMES
            .iter()
            .copied()
            .filter(|n| *copy.flag(n).expect("known name"))
            .collect()
    }

    pub fn any(&self) -> bool {
        !self.enabled().is_empty()
    }

    pub(crate) fn needs_distributions(&self) -> bool {
        self.shrink_ratio || self.growth_ratio || self.floor
    }

    pub(crate) fn needs_updates(&self) -> bool {
        self.gradient_bounds || self.displacement || self.feasibility
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Passed,
    Failed,
    /// The run's learner or parameters are outside the check's hypotheses.
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub status: CheckStatus,
    /// Number of individual inequalities evaluated.
    pub checked: usize,
    pub first_violation: Option<String>,
    /// Smallest and largest `bound - value` seen, where meaningful.
    pub margin: Option<(f64, f64)>,
    pub note: String,
}

impl CheckOutcome {
    fn not_applicable(name: &'static str, note: impl Into<String>) -> Self {
        Self {
            name,
            status: CheckStatus::NotApplicable,
            checked: 0,
            first_violation: None,
            margin: None,
            note: note.into(),
        }
    }
}

/// Accumulates one check's evaluations.
struct Tally {
    name: &'static str,
    checked: usize,
    first_violation: Option<String>,
    margin: Option<(f64, f64)>,
    note: String,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checked: 0,
            first_violation: None,
            margin: None,
            note: String::new(),
        }
    }

    /// Records `value <= bound (+ tolerance)`.
    fn bound(&mut self, value: f64, bound: f64, tolerance: f64, location: impl FnOnce() -> String) {
        self.checked += 1;
        let slack = bound - value;
        self.margin = Some(match self.margin {
            None => (slack, slack),
            Some((lo, hi)) => (lo.min(slack), hi.max(slack)),
        });
        if !(slack >= -tolerance) && self.first_violation.is_none() {
            self.first_violation = Some(format!("{}: {value:e} exceeds bound {bound:e}", location()));
        }
    }

    fn condition(&mut self, ok: bool, location: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.first_violation.is_none() {
            self.first_violation = Some(location());
        }
    }

    fn finish(self) -> CheckOutcome {
        CheckOutcome {
            name: self.name,
            status: if self.first_violation.is_some() {
                CheckStatus::Failed
            } else {
                CheckStatus::Passed
            },
            checked: self.checked,
            first_violation: self.first_violation,
            margin: self.margin,
            note: self.note,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl MonitorReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.status != CheckStatus::Failed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckOutcome> {
        self.outcomes.iter().find(|o| o.name == name)
    }
}

impl fmt::Display for MonitorReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.outcomes {
            let status = match o.status {
                CheckStatus::Passed => "pass",
                CheckStatus::Failed => "FAIL",
                CheckStatus::NotApplicable => "n/a",
            };
            write!(f, "{:<16} {:<4} checked={}", o.name, status, o.checked)?;
            if let Some((lo, hi)) = o.margin {
                write!(f, " margin=[{lo:.3e}, {hi:.3e}]")?;
            }
            if let Some(v) = &o.first_violation {
                write!(f, " first violation: {v}")?;
            }
            if !o.note.is_empty() {
                write!(f, " ({})", o.note)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// What a MAB run retains for checking.
#[derive(Debug, Clone, PartialEq)]
pub struct MabTelemetry {
    /// The schedule the learner actually faced.
    pub schedule: DelaySchedule,
    /// Origin slots in the order their feedback was applied.
    pub delivery_order: Vec<usize>,
    /// Initial distribution followed by the distribution after each applied
    /// feedback. Empty unless distribution checks were requested.
    pub distributions: Vec<ProbabilityVector>,
    pub safeguards: Option<Dexp3Params>,
}

/// One applied BCO feedback.
#[derive(Debug, Clone, PartialEq)]
pub struct BcoUpdate {
    pub origin: usize,
    pub gradient: Vec<f64>,
    pub before: Vec<f64>,
    pub after: Vec<f64>,
}

/// What a BCO run retains for checking.
#[derive(Debug, Clone, PartialEq)]
pub struct BcoTelemetry {
    pub schedule: DelaySchedule,
    pub delivery_order: Vec<usize>,
    pub environment: Arc<BcoEnvironment>,
    /// The unshrunk set `X`.
    pub set: FeasibleSet,
    pub iterate_set: FeasibleSet,
    pub estimator: EstimatorKind,
    pub eta: f64,
    /// Action played in each slot.
    pub actions: Vec<Vec<f64>>,
    /// Extra points evaluated in each slot. Empty unless recorded.
    pub queries: Vec<Vec<Vec<f64>>>,
    /// Empty unless recorded.
    pub updates: Vec<BcoUpdate>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Telemetry {
    Mab(MabTelemetry),
    Bco(BcoTelemetry),
}

impl Telemetry {
    fn schedule(&self) -> &DelaySchedule {
        match self {
            Telemetry::Mab(t) => &t.schedule,
            Telemetry::Bco(t) => &t.schedule,
        }
    }

    fn delivery_order(&self) -> &[usize] {
        match self {
            Telemetry::Mab(t) => &t.delivery_order,
            Telemetry::Bco(t) => &t.delivery_order,
        }
    }
}

/// Evaluates every enabled check. Checks that do not apply to the run's
/// setting are reported as not applicable.
pub fn monitor_invariants(telemetry: &Telemetry, monitors: MonitorSet) -> MonitorReport {
    let mut outcomes = Vec::new();
    if monitors.delivery {
        outcomes.push(check_delivery(telemetry));
    }
    if monitors.slot_lemma {
        outcomes.push(check_slot_lemma(telemetry));
    }
    match telemetry {
        Telemetry::Mab(t) => {
            if monitors.shrink_ratio {
                outcomes.push(check_ratios(t, true));
            }
            if monitors.growth_ratio {
                outcomes.push(check_ratios(t, false));
            }
            if monitors.floor {
                outcomes.push(check_floor(t));
            }
            for (on, name) in [
                (monitors.gradient_bounds, "gradient-bounds"),
                (monitors.feasibility, "feasibility"),
                (monitors.displacement, "displacement"),
            ] {
                if on {
                    outcomes.push(CheckOutcome::not_applicable(name, "bandit convex optimization only"));
                }
            }
        }
        Telemetry::Bco(t) => {
            for (on, name) in [
                (monitors.shrink_ratio, "shrink-ratio"),
                (monitors.growth_ratio, "growth-ratio"),
                (monitors.floor, "floor"),
            ] {
                if on {
                    outcomes.push(CheckOutcome::not_applicable(name, "multi-armed bandits only"));
                }
            }
            if monitors.gradient_bounds {
                outcomes.push(check_gradient_bounds(t));
            }
            if monitors.feasibility {
                outcomes.push(check_feasibility(t));
            }
            if monitors.displacement {
                outcomes.push(check_displacement(t));
            }
        }
    }
    MonitorReport { outcomes }
}

fn check_delivery(telemetry: &Telemetry) -> CheckOutcome {
    let horizon = telemetry.schedule().horizon();
    let order = telemetry.delivery_order();
    let mut tally = Tally::new("delivery");
    let mut seen = vec![false; horizon + 1];
    for (i, &s) in order.iter().enumerate() {
        let fresh = s >= 1 && s <= horizon && !seen[s];
        tally.condition(fresh, || format!("delivery #{} repeats or invents origin slot {s}", i + 1));
        if fresh {
            seen[s] = true;
        }
    }
    let missing = (1..=horizon).find(|&s| !seen[s]);
    tally.condition(missing.is_none(), || {
        format!("origin slot {} was never delivered", missing.unwrap_or(0))
    });
    tally.finish()
}

fn check_slot_lemma(telemetry: &Telemetry) -> CheckOutcome {
    let schedule = telemetry.schedule();
    let mut tally = Tally::new("slot-lemma");
    match VirtualSlotMap::from_delivery_order(telemetry.delivery_order().to_vec(), schedule) {
        Ok(map) => {
            let report = map.verify(schedule);
            tally.checked = 2 * map.horizon() + 1;
            if !report.passed() {
                tally.first_violation = Some(report.to_string());
            }
            tally.note = format!("sum of lags {} = D {}", report.lag_sum, report.total_delay);
            tally.margin = Some((
                (report.lag_bound - report.max_lag) as f64,
                (report.lag_bound - report.max_lag) as f64,
            ));
        }
        Err(e) => tally.condition(false, || e.to_string()),
    }
    tally.finish()
}

fn applicable_safeguards(t: &MabTelemetry, name: &'static str) -> std::result::Result<Dexp3Params, CheckOutcome> {
    match t.safeguards {
        None => Err(CheckOutcome::not_applicable(name, "learner has no cap or floor")),
        Some(p) if !p.satisfies_safeguard_conditions() => Err(CheckOutcome::not_applicable(
            name,
            "parameters violate 1 - delta2 - eta*delta1 >= 0 or delta2 > 0",
        )),
        Some(_) if t.distributions.is_empty() => {
            Err(CheckOutcome::not_applicable(name, "distributions were not recorded"))
        }
        Some(p) => Ok(p),
    }
}

fn check_ratios(t: &MabTelemetry, shrink: bool) -> CheckOutcome {
    let name = if shrink { "shrink-ratio" } else { "growth-ratio" };
    let params = match applicable_safeguards(t, name) {
        Ok(p) => p,
        Err(outcome) => return outcome,
    };
    let bound = if shrink {
        params.shrink_ratio_bound()
    } else {
        params.growth_ratio_bound()
    };
    let mut tally = Tally::new(name);
    for (tau, pair) in t.distributions.windows(2).enumerate() {
        let (prev, next) = (&pair[0], &pair[1]);
        for k in 0..prev.len() {
            let ratio = if shrink { prev[k] / next[k] } else { next[k] / prev[k] };
            tally.bound(ratio, bound, BOUND_TOLERANCE * bound, || {
                format!("virtual slot {}, arm {}", tau + 1, k + 1)
            });
        }
    }
    tally.finish()
}

fn check_floor(t: &MabTelemetry) -> CheckOutcome {
    let params = match applicable_safeguards(t, "floor") {
        Ok(p) => p,
        Err(outcome) => return outcome,
    };
    let floor = params.floor();
    let mut tally = Tally::new("floor");
    for (tau, p) in t.distributions.iter().enumerate() {
        // Reversed so that a positive margin means the floor holds.
        tally.bound(-p.min(), -floor, BOUND_TOLERANCE * floor, || {
            format!("distribution after {tau} updates")
        });
    }
    tally.finish()
}

fn check_gradient_bounds(t: &BcoTelemetry) -> CheckOutcome {
    let delta = match t.estimator {
        EstimatorKind::Coordinate { delta } => delta,
        _ => return CheckOutcome::not_applicable("gradient-bounds", "coordinate-query estimators only"),
    };
    if t.updates.is_empty() && !t.delivery_order.is_empty() {
        return CheckOutcome::not_applicable("gradient-bounds", "updates were not recorded");
    }
    let root_k = (t.environment.dim() as f64).sqrt();
    let mut norm_tally = Tally::new("gradient-bounds");
    let mut bias_tally = Tally::new("gradient-bias");
    for (i, u) in t.updates.iter().enumerate() {
        let s = u.origin;
        let action = &t.actions[s - 1];
        let exact = t.environment.gradient(s, action);
        let lipschitz = t.environment.lipschitz(s, &t.set);
        let beta = t.environment.smoothness(s);
        let norm: f64 = u.gradient.iter().map(|g| g * g).sum::<f64>().sqrt();
        let bias: f64 = u
            .gradient
            .iter()
            .zip(&exact)
            .map(|(g, e)| (g - e).powi(2))
            .sum::<f64>()
            .sqrt();
        norm_tally.bound(norm, root_k * lipschitz, BOUND_TOLERANCE, || {
            format!("update {} (origin slot {s}): gradient norm", i + 1)
        });
        bias_tally.bound(bias, beta * delta * root_k / 2.0, BOUND_TOLERANCE, || {
            format!("update {} (origin slot {s}): bias", i + 1)
        });
    }
    let bias = bias_tally.finish();
    let mut outcome = norm_tally.finish();
    outcome.checked += bias.checked;
    if outcome.first_violation.is_none() {
        outcome.first_violation = bias.first_violation;
        if outcome.first_violation.is_some() {
            outcome.status = CheckStatus::Failed;
        }
    }
    // The bias margin is the informative one: zero means the bound is tight.
    outcome.margin = bias.margin;
    outcome.note = "margin refers to the bias bound".into();
    outcome
}

fn check_feasibility(t: &BcoTelemetry) -> CheckOutcome {
    let mut tally = Tally::new("feasibility");
    for (i, x) in t.actions.iter().enumerate() {
        tally.condition(t.iterate_set.contains(x, BOUND_TOLERANCE), || {
            format!("slot {}: iterate outside its set", i + 1)
        });
    }
    for (i, qs) in t.queries.iter().enumerate() {
        for (k, q) in qs.iter().enumerate() {
            tally.condition(t.set.contains(q, BOUND_TOLERANCE), || {
                format!("slot {}: query {} outside the feasible set", i + 1, k + 1)
            });
        }
    }
    tally.finish()
}

fn check_displacement(t: &BcoTelemetry) -> CheckOutcome {
    if matches!(t.estimator, EstimatorKind::OnePoint) {
        return CheckOutcome::not_applicable("displacement", "one-point estimates are not Lipschitz-bounded");
    }
    if t.updates.is_empty() && !t.delivery_order.is_empty() {
        return CheckOutcome::not_applicable("displacement", "updates were not recorded");
    }
    let root_k = (t.environment.dim() as f64).sqrt();
    let mut tally = Tally::new("displacement");
    for (i, u) in t.updates.iter().enumerate() {
        let moved: f64 = u
            .before
            .iter()
            .zip(&u.after)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let lipschitz = t.environment.lipschitz(u.origin, &t.set);
        tally.bound(moved, t.eta * root_k * lipschitz, BOUND_TOLERANCE, || {
            format!("update {} (origin slot {})", i + 1, u.origin)
        });
    }
    tally.finish()
}
