use std::collections::BTreeMap;

use rand::Rng;

use super::{importance_weighted_step, sample_arm};
use crate::error::{Error, Result};
use crate::simplex::ProbabilityVector;

/// Delayed EXP3 for known delays.
///
/// Keeps the distribution used at each slot until that slot's feedback
/// arrives, then importance-weights the loss by it. This needs the origin
/// slot of every observation, which is exactly what unknown-delay learners
/// lack.
#[derive(Debug, Clone)]
pub struct Bold {
    p: ProbabilityVector,
    eta: f64,
    stored: BTreeMap<usize, ProbabilityVector>,
}

impl Bold {
    pub fn new(arms: usize, eta: f64) -> Self {
        Self {
            p: ProbabilityVector::uniform(arms),
            eta,
            stored: BTreeMap::new(),
        }
    }

    pub fn distribution(&self) -> &ProbabilityVector {
        &self.p
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Number of slots whose feedback is outstanding.
    pub fn outstanding(&self) -> usize {
        self.stored.len()
    }

    /// Draws the arm for `slot` and remembers the distribution it came from.
    pub fn select_arm<R: Rng + ?Sized>(&mut self, slot: usize, rng: &mut R) -> usize {
        self.stored.insert(slot, self.p.clone());
        sample_arm(&self.p, rng)
    }

    pub fn apply_feedback(&mut self, origin_slot: usize, loss: f64, arm: usize) -> Result<()> {
        let at_origin = self
            .stored
            .remove(&origin_slot)
            .ok_or(Error::MissingStoredDistribution(origin_slot))?;
        if arm >= self.p.len() {
            return Err(Error::DimensionMismatch {
                expected: self.p.len(),
                actual: arm + 1,
            });
        }
        self.p = importance_weighted_step(&self.p, &at_origin, loss, arm, self.eta);
        Ok(())
    }
}
