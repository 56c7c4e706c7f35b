use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// Origin-centered Euclidean ball.
    Ball { radius: f64 },
    /// Axis-aligned box.
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

/// A compact convex set `X` together with a shrink factor `δ`; points live in
/// `X_δ = (1 - δ) X`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSet {
    region: Region,
    shrink: f64,
}

impl FeasibleSet {
    pub fn ball(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::param("radius", format!("{radius} must be positive")));
        }
        Ok(Self {
            region: Region::Ball { radius },
            shrink: 0.0,
        })
    }

    /// Box with per-coordinate bounds; the origin must be inside.
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::param("box", "lower and upper bounds need equal, nonzero length"));
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && *lo <= 0.0 && 0.0 <= *hi))
        {
            return Err(Error::param("box", "bounds must be finite and bracket the origin"));
        }
        Ok(Self {
            region: Region::Box { lower, upper },
            shrink: 0.0,
        })
    }

    /// Same region with shrink `delta ∈ [0, 1)`.
    pub fn shrunk(&self, delta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::param("shrink", format!("{delta} is not in [0, 1)")));
        }
        Ok(Self {
            region: self.region.clone(),
            shrink: delta,
        })
    }

    /// The underlying set `X` (shrink 0).
    pub fn unshrunk(&self) -> Self {
        Self {
            region: self.region.clone(),
            shrink: 0.0,
        }
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn shrink(&self) -> f64 {
        self.shrink
    }

    /// Fixed dimension for boxes; balls accept any dimension.
    pub fn dim(&self) -> Option<usize> {
        match &self.region {
            Region::Ball { .. } => None,
            Region::Box { lower, .. } => Some(lower.len()),
        }
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self.dim() {
            Some(d) if d != dim => Err(Error::DimensionMismatch {
                expected: d,
                actual: dim,
            }),
            _ => Ok(()),
        }
    }

    fn scale(&self) -> f64 {
        1.0 - self.shrink
    }

    /// Euclidean projection onto `X_δ`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let s = self.scale();
        match &self.region {
            Region::Ball { radius } => {
                let norm = norm(x);
                let limit = s * radius;
                if norm <= limit {
                    x.to_vec()
                } else {
                    let factor = limit / norm;
                    x.iter().map(|v| v * factor).collect()
                }
            }
            Region::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (lo, hi))| v.clamp(s * lo, s * hi))
                .collect(),
        }
    }

    /// Membership in `X_δ` up to `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        let s = self.scale();
        match &self.region {
            Region::Ball { radius } => norm(x) <= s * radius + tol,
            Region::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (lo, hi))| *v >= s * lo - tol && *v <= s * hi + tol),
        }
    }

    /// Largest `‖x‖` over `X`.
    pub fn max_norm(&self) -> f64 {
        match &self.region {
            Region::Ball { radius } => *radius,
            Region::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(lo, hi)| lo.abs().max(hi.abs()).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// `max_{x,y ∈ X} ‖x - y‖`.
    pub fn diameter(&self) -> f64 {
        match &self.region {
            Region::Ball { radius } => 2.0 * radius,
            Region::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(lo, hi)| (hi - lo).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Whether `x + δ e_k ∈ X` for every `x ∈ (1-δ) X`, `k`, and `δ ∈ [0, 1)`.
    ///
    /// Holds for balls of radius at least 1 and for boxes whose upper bounds
    /// are all at least 1.
    pub fn admits_coordinate_queries(&self) -> bool {
        match &self.region {
            Region::Ball { radius } => *radius >= 1.0,
            Region::Box { upper, .. } => upper.iter().all(|hi| *hi >= 1.0),
        }
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
