//! The interface between the simulation loop and learners.
//!
//! A learner declares whether it may know delays. Unknown-delay learners are
//! handed bare payloads; only known-delay learners get the stamped event with
//! its origin slot.

use rand::RngCore;

use crate::bco::{DbgdState, FeasibleSet, Fkm, ProjectedGradient, QueryValues};
use crate::error::{Error, Result};
use crate::feedback::FeedbackEvent;
use crate::mab::{Bold, Dexp3, Dexp3Params, Exp3, MabObservation};
use crate::simplex::ProbabilityVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelayKnowledge {
    /// Sees feedback content only.
    Unknown,
    /// Sees the origin slot of each piece of feedback.
    Known,
}

/// One piece of feedback as handed to a learner.
#[derive(Debug)]
pub enum Delivery<'a, P> {
    Anonymous(&'a P),
    Stamped(&'a FeedbackEvent<P>),
}

impl<P> Delivery<'_, P> {
    pub fn payload(&self) -> &P {
        match self {
            Delivery::Anonymous(p) => p,
            Delivery::Stamped(e) => e.payload(),
        }
    }
}

fn unexpected(learner: &str, what: &str) -> Error {
    Error::ConfigMismatch(format!("{learner} cannot consume {what}"))
}

pub trait MabLearner {
    fn delay_knowledge(&self) -> DelayKnowledge;
    fn distribution(&self) -> &ProbabilityVector;
    fn select_arm(&mut self, slot: usize, rng: &mut dyn RngCore) -> usize;
    fn apply(&mut self, delivery: Delivery<'_, MabObservation>) -> Result<()>;
    /// Safeguard parameters, for learners whose distributions obey the
    /// floor and ratio bounds.
    fn safeguards(&self) -> Option<Dexp3Params> {
        None
    }
}

impl MabLearner for Dexp3 {
    fn delay_knowledge(&self) -> DelayKnowledge {
        DelayKnowledge::Unknown
    }

    fn distribution(&self) -> &ProbabilityVector {
        Dexp3::distribution(self)
    }

    fn select_arm(&mut self, _slot: usize, rng: &mut dyn RngCore) -> usize {
        Dexp3::select_arm(self, rng)
    }

    fn apply(&mut self, delivery: Delivery<'_, MabObservation>) -> Result<()> {
        match delivery {
            Delivery::Anonymous(obs) => self.observe(*obs),
            Delivery::Stamped(_) => Err(unexpected("DEXP3", "slot-stamped feedback")),
        }
    }

    fn safeguards(&self) -> Option<Dexp3Params> {
        Some(*self.params())
    }
}

impl MabLearner for Exp3 {
    fn delay_knowledge(&self) -> DelayKnowledge {
        DelayKnowledge::Unknown
    }

    fn distribution(&self) -> &ProbabilityVector {
        Exp3::distribution(self)
    }

    fn select_arm(&mut self, _slot: usize, rng: &mut dyn RngCore) -> usize {
        Exp3::select_arm(self, rng)
    }

    fn apply(&mut self, delivery: Delivery<'_, MabObservation>) -> Result<()> {
        self.observe(*delivery.payload())
    }
}

impl MabLearner for Bold {
    fn delay_knowledge(&self) -> DelayKnowledge {
        DelayKnowledge::Known
    }

    fn distribution(&self) -> &ProbabilityVector {
        Bold::distribution(self)
    }

    fn select_arm(&mut self, slot: usize, rng: &mut dyn RngCore) -> usize {
        Bold::select_arm(self, slot, rng)
    }

    fn apply(&mut self, delivery: Delivery<'_, MabObservation>) -> Result<()> {
        match delivery {
            Delivery::Stamped(event) => {
                let obs = event.payload();
                self.apply_feedback(event.origin_slot(), obs.loss, obs.arm)
            }
            Delivery::Anonymous(_) => Err(unexpected("BOLD", "feedback without its origin slot")),
        }
    }
}

/// What the environment reveals for one origin slot.
#[derive(Debug, Clone, PartialEq)]
pub enum BcoPayload {
    /// Function values at the action and the extra query points.
    Values(QueryValues),
    /// Exact gradient at the action (full information).
    Gradient(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackKind {
    Values,
    Gradient,
}

/// How a learner turns feedback into a step, which determines the bounds its
/// steps obey.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorKind {
    /// `(K+1)`-point forward differences with radius `δ`.
    Coordinate { delta: f64 },
    /// Exact gradients.
    Exact,
    /// One-point spherical estimate.
    OnePoint,
}

pub trait BcoLearner {
    fn delay_knowledge(&self) -> DelayKnowledge;
    fn feedback_kind(&self) -> FeedbackKind;
    fn estimator(&self) -> EstimatorKind;
    /// The point played this slot.
    fn action(&self) -> &[f64];
    /// Points evaluated this slot besides the action.
    fn queries(&mut self, slot: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>>;
    /// Applies one piece of feedback and returns the gradient (estimate) used.
    fn apply(&mut self, delivery: Delivery<'_, BcoPayload>) -> Result<Vec<f64>>;
    fn step_size(&self) -> f64;
    /// The set iterates are projected onto.
    fn iterate_set(&self) -> &FeasibleSet;
}

impl BcoLearner for DbgdState {
    fn delay_knowledge(&self) -> DelayKnowledge {
        DelayKnowledge::Unknown
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Values
    }

    fn estimator(&self) -> EstimatorKind {
        EstimatorKind::Coordinate {
            delta: self.params().delta,
        }
    }

    fn action(&self) -> &[f64] {
        self.point()
    }

    fn queries(&mut self, _slot: usize, _rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        self.query_points()
    }

    fn apply(&mut self, delivery: Delivery<'_, BcoPayload>) -> Result<Vec<f64>> {
        match delivery {
            Delivery::Anonymous(BcoPayload::Values(values)) => Ok(self.observe(values)?.into_inner()),
            Delivery::Anonymous(BcoPayload::Gradient(_)) => Err(unexpected("DBGD", "gradients")),
            Delivery::Stamped(_) => Err(unexpected("DBGD", "slot-stamped feedback")),
        }
    }

    fn step_size(&self) -> f64 {
        self.params().eta
    }

    fn iterate_set(&self) -> &FeasibleSet {
        self.set()
    }
}

impl BcoLearner for ProjectedGradient {
    fn delay_knowledge(&self) -> DelayKnowledge {
        DelayKnowledge::Unknown
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Gradient
    }

    fn estimator(&self) -> EstimatorKind {
        EstimatorKind::Exact
    }

    fn action(&self) -> &[f64] {
        self.point()
    }

    fn queries(&mut self, _slot: usize, _rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        Vec::new()
    }

    fn apply(&mut self, delivery: Delivery<'_, BcoPayload>) -> Result<Vec<f64>> {
        match delivery.payload() {
            BcoPayload::Gradient(g) => {
                self.observe(g)?;
                Ok(g.clone())
            }
            BcoPayload::Values(_) => Err(unexpected("gradient descent", "function values")),
        }
    }

    fn step_size(&self) -> f64 {
        self.eta()
    }

    fn iterate_set(&self) -> &FeasibleSet {
        self.set()
    }
}

impl BcoLearner for Fkm {
    fn delay_knowledge(&self) -> DelayKnowledge {
        DelayKnowledge::Known
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Values
    }

    fn estimator(&self) -> EstimatorKind {
        EstimatorKind::OnePoint
    }

    fn action(&self) -> &[f64] {
        self.point()
    }

    fn queries(&mut self, slot: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        vec![self.query(slot, rng)]
    }

    fn apply(&mut self, delivery: Delivery<'_, BcoPayload>) -> Result<Vec<f64>> {
        match delivery {
            Delivery::Stamped(event) => match event.payload() {
                BcoPayload::Values(v) if v.at_queries.len() == 1 => {
                    self.observe(event.origin_slot(), event.arrival_slot(), v.at_queries[0])
                }
                _ => Err(unexpected("FKM", "anything but one queried value")),
            },
            Delivery::Anonymous(_) => Err(unexpected("FKM", "feedback without its origin slot")),
        }
    }

    fn step_size(&self) -> f64 {
        self.eta()
    }

    fn iterate_set(&self) -> &FeasibleSet {
        self.set()
    }
}
