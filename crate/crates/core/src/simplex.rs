//! Points on the probability simplex.

use std::ops::Index;

use crate::error::{Error, Result};

/// Tolerance on `|sum - 1|` accepted by [`ProbabilityVector::new`].
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A distribution over `K` arms.
///
/// Every constructor checks nonnegativity and that the entries sum to one
/// within [`SUM_TOLERANCE`], so a value of this type is always a valid
/// sampling distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDistribution("no entries".into()));
        }
        if let Some((k, v)) = entries
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {} is {v}",
                k + 1
            )));
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        Ok(Self(entries))
    }

    pub fn uniform(k: usize) -> Self {
        assert!(k > 0, "uniform distribution needs at least one arm");
        Self(vec![1.0 / k as f64; k])
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Ok(Self(weights.into_iter().map(|w| w / total).collect()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `pᵀ l`.
    pub fn dot(&self, values: &[f64]) -> f64 {
        self.0.iter().zip(values).map(|(p, l)| p * l).sum()
    }

    /// Inverse-CDF draw: returns the first index whose cumulative mass
    /// strictly exceeds `u`, for `u` in `[0, 1)`.
    ///
    /// Strict comparison keeps zero-mass arms from being selected at `u = 0`.
    /// If rounding leaves the total mass below `u`, the last arm with
    /// positive mass is returned.
    pub fn inverse_cdf(&self, u: f64) -> usize {
        let mut cumulative = 0.0;
        for (k, p) in self.0.iter().enumerate() {
            cumulative += p;
            if cumulative > u {
                return k;
            }
        }
        self.0
            .iter()
            .rposition(|p| *p > 0.0)
            .unwrap_or(self.0.len() - 1)
    }
}

impl Index<usize> for ProbabilityVector {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

impl AsRef<[f64]> for ProbabilityVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}
