use std::ops::Deref;

use crate::error::{Error, Result};

/// Function values returned for one origin slot: at the played point and at
/// each queried point `x + δ e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryValues {
    pub at_action: f64,
    pub at_queries: Vec<f64>,
}

/// A gradient estimate in loss units per unit of decision variable.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate(Vec<f64>);

impl GradientEstimate {
    pub fn new(g: Vec<f64>) -> Self {
        Self(g)
    }

    pub fn norm(&self) -> f64 {
        super::set::norm(&self.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for GradientEstimate {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Forward differences along the coordinate axes:
/// `g(k) = (f(x + δ e_k) - f(x)) / δ`.
///
/// Uses nothing but the returned values and `δ`, so it is computable no
/// matter how long ago the values were produced.
pub fn estimate_gradient_multipoint(
    f_at_x: f64,
    f_at_queries: &[f64],
    delta: f64,
) -> Result<GradientEstimate> {
    if !(delta > 0.0) {
        return Err(Error::param("delta", format!("query radius {delta} must be positive")));
    }
    Ok(GradientEstimate(
        f_at_queries.iter().map(|fq| (fq - f_at_x) / delta).collect(),
    ))
}

impl QueryValues {
    pub fn gradient(&self, delta: f64) -> Result<GradientEstimate> {
        estimate_gradient_multipoint(self.at_action, &self.at_queries, delta)
    }
}
