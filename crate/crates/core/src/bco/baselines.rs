//! Reference learners for the BCO experiments: full-information OGD, its
//! delayed variant that applies gradients on arrival, and the one-point FKM
//! estimator for the non-delayed bandit setting.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::dbgd::descend;
use super::set::{norm, FeasibleSet};
use crate::error::{Error, Result};

/// `Π_set[x - η ∇f]`. The set is used as given; pass an unshrunk set for
/// plain OGD.
pub fn ogd_step(x: &[f64], gradient: &[f64], eta: f64, set: &FeasibleSet) -> Vec<f64> {
    descend(x, gradient, eta, set)
}

/// Applies each arrived gradient in order with a projected step.
pub fn solid_end_of_slot(x: &[f64], gradients: &[Vec<f64>], eta: f64, set: &FeasibleSet) -> Vec<f64> {
    gradients
        .iter()
        .fold(x.to_vec(), |x, g| descend(&x, g, eta, set))
}

/// Projected gradient descent with exact gradients. Run with zero delays
/// this is OGD; with delays it applies gradients as they arrive.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedGradient {
    x: Vec<f64>,
    eta: f64,
    set: FeasibleSet,
}

impl ProjectedGradient {
    pub fn new(eta: f64, set: FeasibleSet, dim: usize) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::param("eta", format!("{eta} is not a positive finite rate")));
        }
        set.check_dim(dim)?;
        Ok(Self {
            x: vec![0.0; dim],
            eta,
            set,
        })
    }

    pub fn point(&self) -> &[f64] {
        &self.x
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn set(&self) -> &FeasibleSet {
        &self.set
    }

    pub fn observe(&mut self, gradient: &[f64]) -> Result<()> {
        if gradient.len() != self.x.len() {
            return Err(Error::DimensionMismatch {
                expected: self.x.len(),
                actual: gradient.len(),
            });
        }
        self.x = descend(&self.x, gradient, self.eta, &self.set);
        Ok(())
    }
}

/// Uniform direction on the unit sphere in `R^dim`.
pub fn sample_unit_sphere<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = norm(&v);
        if n > 1e-300 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

/// One-point gradient estimate `(K/δ) f(x + δu) u`.
pub fn fkm_gradient(observed_value: f64, u: &[f64], delta: f64) -> Vec<f64> {
    let scale = u.len() as f64 / delta * observed_value;
    u.iter().map(|c| scale * c).collect()
}

/// `Π_{X_δ}[x - η (K/δ) f(x + δu) u]`. `set` is `X_δ`.
pub fn fkm_step(
    x: &[f64],
    observed_value: f64,
    u: &[f64],
    eta: f64,
    delta: f64,
    set: &FeasibleSet,
) -> Vec<f64> {
    descend(x, &fkm_gradient(observed_value, u, delta), eta, set)
}

/// FKM with its own bookkeeping of the direction drawn each slot.
///
/// The estimate needs the direction `u` used at the origin slot, which an
/// unknown-delay learner cannot recover. Feedback is therefore only accepted
/// in the slot it was generated.
#[derive(Debug, Clone, PartialEq)]
pub struct Fkm {
    x: Vec<f64>,
    eta: f64,
    delta: f64,
    set: FeasibleSet,
    pending: Option<(usize, Vec<f64>)>,
}

impl Fkm {
    /// `set` is the unshrunk `X`; iterates live in `X_δ`, so `x + δu ∈ X`.
    pub fn new(eta: f64, delta: f64, set: &FeasibleSet, dim: usize) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::param("eta", format!("{eta} is not a positive finite rate")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::param("delta", format!("{delta} is not in (0, 1)")));
        }
        set.check_dim(dim)?;
        if !set.admits_coordinate_queries() {
            return Err(Error::param("set", "sphere queries may leave the set"));
        }
        Ok(Self {
            x: vec![0.0; dim],
            eta,
            delta,
            set: set.shrunk(delta)?,
            pending: None,
        })
    }

    pub fn point(&self) -> &[f64] {
        &self.x
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn set(&self) -> &FeasibleSet {
        &self.set
    }

    /// Draws this slot's direction and returns the point to evaluate.
    pub fn query<R: Rng + ?Sized>(&mut self, slot: usize, rng: &mut R) -> Vec<f64> {
        let u = sample_unit_sphere(self.x.len(), rng);
        let q = self.x.iter().zip(&u).map(|(x, u)| x + self.delta * u).collect();
        self.pending = Some((slot, u));
        q
    }

    /// Consumes the value at the queried point. Fails if the value is from an
    /// earlier slot than `arrival`.
    pub fn observe(&mut self, origin: usize, arrival: usize, value: f64) -> Result<Vec<f64>> {
        if origin != arrival {
            return Err(Error::DelayedOnePointFeedback { origin, arrival });
        }
        let u = match self.pending.take() {
            Some((slot, u)) if slot == origin => u,
            _ => return Err(Error::DelayedOnePointFeedback { origin, arrival }),
        };
        let g = fkm_gradient(value, &u, self.delta);
        self.x = descend(&self.x, &g, self.eta, &self.set);
        Ok(g)
    }
}
