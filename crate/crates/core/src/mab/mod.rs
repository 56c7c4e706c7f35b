//! Multi-armed bandit learners: DEXP3 (unknown delays) and the EXP3 and
//! BOLD baselines.
//!
//! Arms are 0-indexed in code; CSV and CLI output report them as given.

mod bold;
mod dexp3;
mod exp3;

use rand::Rng;

pub use bold::Bold;
pub use dexp3::{apply_feedback, dexp3_theorem1_params, estimate_loss, Dexp3, Dexp3Params};
pub use exp3::{exp3_step, Exp3};

use crate::simplex::ProbabilityVector;

/// What an unknown-delay MAB learner sees: a loss value and the arm that
/// produced it, with no indication of when it was incurred.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MabObservation {
    pub loss: f64,
    pub arm: usize,
}

/// Draws an arm from `p` by inverse CDF on one uniform variate.
pub fn sample_arm<R: Rng + ?Sized>(p: &ProbabilityVector, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    p.inverse_cdf(u)
}

/// EXP3-family multiplicative step with an importance weight taken from `scale`.
///
/// `p'(k) ∝ p(k) exp(-η l̂(k))` where `l̂(k) = loss·1(arm = k) / scale(k)`.
/// Only the observed arm's weight changes, so the update is a single
/// exponential followed by renormalization.
pub(crate) fn importance_weighted_step(
    p: &ProbabilityVector,
    scale: &ProbabilityVector,
    loss: f64,
    arm: usize,
    eta: f64,
) -> ProbabilityVector {
    let estimate = loss / scale[arm];
    let mut weights = p.as_slice().to_vec();
    weights[arm] *= (-eta * estimate).exp();
    ProbabilityVector::from_weights(weights).expect("multiplicative weights stay positive")
}
