//! Best fixed point in hindsight for the BCO environments.
//!
//! Both loss families sum to a quadratic, so the hindsight objective is kept
//! as an explicit quadratic form of the per-slot mean loss. Using the mean
//! keeps the solver tolerance independent of the horizon.

use super::bco::{BcoEnvironment, LossFamily};
use crate::bco::{FeasibleSet, Region};
use crate::error::{Error, Result};

/// `F(x) = ½ xᵀHx + cᵀx + κ`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    pub hessian: Vec<Vec<f64>>,
    pub linear: Vec<f64>,
    pub constant: f64,
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

impl QuadraticForm {
    /// `(1/T) Σ_t f_t`.
    pub fn mean_loss(env: &BcoEnvironment) -> Self {
        let k = env.dim();
        let n = env.horizon() as f64;
        let mut hessian = vec![vec![0.0; k]; k];
        let mut linear = vec![0.0; k];
        let mut constant = 0.0;
        match env.family() {
            LossFamily::Quadratic { a, b } => {
                let curvature = 2.0 * a.iter().sum::<f64>() / n;
                for (i, row) in hessian.iter_mut().enumerate() {
                    row[i] = curvature;
                }
                for bt in b {
                    for (c, v) in linear.iter_mut().zip(bt) {
                        *c += v / n;
                    }
                }
            }
            LossFamily::Regression { features, targets } => {
                for (w, y) in features.iter().zip(targets) {
                    for i in 0..k {
                        for j in 0..k {
                            hessian[i][j] += w[i] * w[j] / n;
                        }
                        linear[i] -= y * w[i] / n;
                    }
                    constant += 0.5 * y * y / n;
                }
            }
        }
        Self {
            hessian,
            linear,
            constant,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let hx: Vec<f64> = self.hessian.iter().map(|row| dot(row, x)).collect();
        0.5 * dot(x, &hx) + dot(&self.linear, x) + self.constant
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.hessian
            .iter()
            .zip(&self.linear)
            .map(|(row, c)| dot(row, x) + c)
            .collect()
    }

    /// Upper bound on the largest eigenvalue (maximum absolute row sum).
    pub fn smoothness_bound(&self) -> f64 {
        self.hessian
            .iter()
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop once the gradient-map norm is at most this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub point: Vec<f64>,
    pub iterations: usize,
    /// Gradient-map norm at `point`.
    pub residual: f64,
}

/// `‖x - Π(x - s∇F(x))‖ / s`; zero exactly at constrained minimizers.
pub fn gradient_map_norm(form: &QuadraticForm, set: &FeasibleSet, x: &[f64], step: f64) -> f64 {
    let g = form.gradient(x);
    let moved: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - step * gi).collect();
    let p = set.project(&moved);
    x.iter()
        .zip(&p)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
        / step
}

/// Accelerated projected gradient with adaptive restart, step `1/L`.
pub fn minimize_projected(
    form: &QuadraticForm,
    set: &FeasibleSet,
    start: &[f64],
    options: SolverOptions,
) -> Result<Solution> {
    let lipschitz = form.smoothness_bound();
    let step = if lipschitz > 0.0 { 1.0 / lipschitz } else { 1.0 };
    let mut x = set.project(start);
    let mut residual = gradient_map_norm(form, set, &x, step);
    if residual <= options.tolerance {
        return Ok(Solution {
            point: x,
            iterations: 0,
            residual,
        });
    }
    let mut y = x.clone();
    let mut momentum = 1.0f64;
    for iteration in 1..=options.max_iterations {
        let g = form.gradient(&y);
        let moved: Vec<f64> = y.iter().zip(&g).map(|(yi, gi)| yi - step * gi).collect();
        let next = set.project(&moved);
        let restart = y
            .iter()
            .zip(&next)
            .zip(&x)
            .map(|((yi, ni), xi)| (yi - ni) * (ni - xi))
            .sum::<f64>()
            > 0.0;
        if restart {
            momentum = 1.0;
            y = next.clone();
        } else {
            let following = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
            let beta = (momentum - 1.0) / following;
            y = next
                .iter()
                .zip(&x)
                .map(|(ni, xi)| ni + beta * (ni - xi))
                .collect();
            momentum = following;
        }
        x = next;
        residual = gradient_map_norm(form, set, &x, step);
        if residual <= options.tolerance {
            return Ok(Solution {
                point: x,
                iterations: iteration,
                residual,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: options.max_iterations,
        residual,
    })
}

/// Exact minimizer for the quadratic family, whose mean Hessian is a multiple
/// of the identity: project `-Σb / (2Σa)` onto the set, or for purely linear
/// sums take the boundary point minimizing `(Σb)ᵀx`.
pub fn closed_form_minimizer(env: &BcoEnvironment, set: &FeasibleSet) -> Option<Vec<f64>> {
    let LossFamily::Quadratic { a, b } = env.family() else {
        return None;
    };
    let curvature: f64 = a.iter().sum();
    let mut total = vec![0.0; env.dim()];
    for bt in b {
        for (s, v) in total.iter_mut().zip(bt) {
            *s += v;
        }
    }
    if curvature > 0.0 {
        let free: Vec<f64> = total.iter().map(|v| -v / (2.0 * curvature)).collect();
        return Some(set.project(&free));
    }
    let scale = 1.0 - set.shrink();
    Some(match set.region() {
        Region::Ball { radius } => {
            let n = dot(&total, &total).sqrt();
            if n == 0.0 {
                vec![0.0; env.dim()]
            } else {
                total.iter().map(|v| -scale * radius * v / n).collect()
            }
        }
        Region::Box { lower, upper } => total
            .iter()
            .zip(lower.iter().zip(upper))
            .map(|(v, (lo, hi))| {
                if *v > 0.0 {
                    scale * lo
                } else if *v < 0.0 {
                    scale * hi
                } else {
                    0.0
                }
            })
            .collect(),
    })
}

/// `argmin_{x ∈ set} Σ_t f_t(x)` and `Σ_t f_t(x*)`.
///
/// The quadratic family starts from the closed form; the regression family
/// starts from the origin. Either way the result is polished by projected
/// descent until the gradient-map norm of the mean loss is at most `1e-8`.
pub fn best_fixed_point(env: &BcoEnvironment, set: &FeasibleSet) -> Result<(Vec<f64>, f64)> {
    set.check_dim(env.dim())?;
    let form = QuadraticForm::mean_loss(env);
    let start = closed_form_minimizer(env, set).unwrap_or_else(|| vec![0.0; env.dim()]);
    let solution = minimize_projected(&form, set, &start, SolverOptions::default())?;
    let total = (1..=env.horizon()).map(|t| env.value(t, &solution.point)).sum();
    Ok((solution.point, total))
}
