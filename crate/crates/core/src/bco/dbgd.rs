//! DBGD: projected descent driven by `(K+1)`-point deterministic gradient
//! estimates, one per returned feedback, regardless of how stale it is.

use super::gradient::{GradientEstimate, QueryValues};
use super::set::FeasibleSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbgdParams {
    pub eta: f64,
    /// Query radius, also the shrink of the feasible set.
    pub delta: f64,
}

impl DbgdParams {
    pub fn new(eta: f64, delta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::param("eta", format!("{eta} is not a positive finite rate")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::param("delta", format!("{delta} is not in (0, 1)")));
        }
        Ok(Self { eta, delta })
    }

    /// `δ = min{0.5, 1/(T+D)}`, `η = 1/√(K(T+D))`.
    pub fn theorem2(horizon: usize, total_delay: usize, dim: usize) -> Result<Self> {
        Self::theorem2_scaled(horizon, total_delay, dim, 1.0, 1.0)
    }

    /// As [`DbgdParams::theorem2`] with constants: `δ = min{0.5, c_δ/(T+D)}`,
    /// `η = c_η/√(K(T+D))`.
    pub fn theorem2_scaled(
        horizon: usize,
        total_delay: usize,
        dim: usize,
        eta_scale: f64,
        delta_scale: f64,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::param("horizon", "must be at least 1"));
        }
        if dim == 0 {
            return Err(Error::param("dim", "must be at least 1"));
        }
        let span = (horizon + total_delay) as f64;
        let delta = (delta_scale / span).min(0.5);
        let eta = eta_scale / (dim as f64 * span).sqrt();
        Self::new(eta, delta)
    }
}

/// [`DbgdParams::theorem2`] as a free function returning `(η, δ)`.
pub fn dbgd_theorem2_params(horizon: usize, total_delay: usize, dim: usize) -> Result<(f64, f64)> {
    DbgdParams::theorem2(horizon, total_delay, dim).map(|p| (p.eta, p.delta))
}

/// Learner state: the current point in `X_δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DbgdState {
    x: Vec<f64>,
    params: DbgdParams,
    set: FeasibleSet,
}

impl DbgdState {
    /// Starts at the origin. `set` is the unshrunk `X`; the state keeps
    /// `X_δ` for its iterates. Fails if coordinate queries could leave `X`.
    pub fn new(params: DbgdParams, set: &FeasibleSet, dim: usize) -> Result<Self> {
        set.check_dim(dim)?;
        if !set.admits_coordinate_queries() {
            return Err(Error::param(
                "set",
                "queries x + delta*e_k may leave the set; use a ball of radius >= 1 or a box with upper bounds >= 1",
            ));
        }
        Ok(Self {
            x: vec![0.0; dim],
            params,
            set: set.shrunk(params.delta)?,
        })
    }

    pub fn point(&self) -> &[f64] {
        &self.x
    }

    pub fn params(&self) -> &DbgdParams {
        &self.params
    }

    /// `X_δ`.
    pub fn set(&self) -> &FeasibleSet {
        &self.set
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// `x + δ e_k` for `k = 1..K`.
    pub fn query_points(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|k| {
                let mut q = self.x.clone();
                q[k] += self.params.delta;
                q
            })
            .collect()
    }

    /// One projected step from a single returned observation. Returns the
    /// gradient estimate it used.
    pub fn observe(&mut self, values: &QueryValues) -> Result<GradientEstimate> {
        if values.at_queries.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: values.at_queries.len(),
            });
        }
        let g = values.gradient(self.params.delta)?;
        self.x = descend(&self.x, &g, self.params.eta, &self.set);
        Ok(g)
    }

    /// Applies all observations returned in a slot, in order.
    pub fn end_of_slot(&mut self, feedback: &[QueryValues]) -> Result<()> {
        feedback.iter().try_for_each(|v| self.observe(v).map(drop))
    }
}

/// Functional form: consumes a state and returns the updated one.
pub fn dbgd_end_of_slot(mut state: DbgdState, feedback: &[QueryValues]) -> Result<DbgdState> {
    state.end_of_slot(feedback)?;
    Ok(state)
}

/// `Π_set[x - η g]`.
pub(crate) fn descend(x: &[f64], g: &[f64], eta: f64, set: &FeasibleSet) -> Vec<f64> {
    let moved: Vec<f64> = x.iter().zip(g).map(|(xi, gi)| xi - eta * gi).collect();
    set.project(&moved)
}
