use rand::Rng;

use super::{importance_weighted_step, sample_arm, MabObservation};
use crate::error::{Error, Result};
use crate::simplex::ProbabilityVector;

/// One EXP3 step with the unbiased importance-weighted estimate.
///
/// Requires every entry of `p` to be positive so the estimate is finite.
pub fn exp3_step(p: &ProbabilityVector, loss: f64, arm: usize, eta: f64) -> Result<ProbabilityVector> {
    if let Some(k) = p.as_slice().iter().position(|v| *v <= 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "entry {} is zero; the importance weight is undefined",
            k + 1
        )));
    }
    if arm >= p.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            actual: arm + 1,
        });
    }
    Ok(importance_weighted_step(p, p, loss, arm, eta))
}

/// Non-delayed EXP3.
#[derive(Debug, Clone)]
pub struct Exp3 {
    p: ProbabilityVector,
    eta: f64,
}

impl Exp3 {
    pub fn new(arms: usize, eta: f64) -> Self {
        Self {
            p: ProbabilityVector::uniform(arms),
            eta,
        }
    }

    pub fn distribution(&self) -> &ProbabilityVector {
        &self.p
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn select_arm<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_arm(&self.p, rng)
    }

    pub fn observe(&mut self, obs: MabObservation) -> Result<()> {
        self.p = exp3_step(&self.p, obs.loss, obs.arm, self.eta)?;
        Ok(())
    }
}
