use std::path::Path;

use rand::Rng;

use super::text::{data_lines, fields, read_file};
use crate::bco::FeasibleSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum LossFamily {
    /// `f_t(x) = a_t ‖x‖² + b_tᵀx` with `a_t >= 0`.
    Quadratic { a: Vec<f64>, b: Vec<Vec<f64>> },
    /// `f_t(x) = ½ (y_t - xᵀw_t)²`.
    Regression { features: Vec<Vec<f64>>, targets: Vec<f64> },
}

/// A sequence of convex losses `f_1, …, f_T` over `R^K`.
#[derive(Debug, Clone, PartialEq)]
pub struct BcoEnvironment {
    family: LossFamily,
    dim: usize,
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

impl BcoEnvironment {
    pub fn quadratic(a: Vec<f64>, b: Vec<Vec<f64>>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::param("quadratic", "need one (a_t, b_t) pair per slot"));
        }
        let dim = b[0].len();
        if dim == 0 {
            return Err(Error::param("quadratic", "dimension must be at least 1"));
        }
        if let Some(row) = b.iter().find(|row| row.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: row.len(),
            });
        }
        if a.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::param("a", "curvatures must be finite and nonnegative"));
        }
        Ok(Self {
            family: LossFamily::Quadratic { a, b },
            dim,
        })
    }

    /// `f_t(x) = b_tᵀx`.
    pub fn linear(b: Vec<Vec<f64>>) -> Result<Self> {
        Self::quadratic(vec![0.0; b.len()], b)
    }

    pub fn regression(features: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        if features.is_empty() || features.len() != targets.len() {
            return Err(Error::param("regression", "need one (w_t, y_t) pair per slot"));
        }
        let dim = features[0].len();
        if dim == 0 {
            return Err(Error::param("regression", "need at least one feature"));
        }
        if let Some(row) = features.iter().find(|row| row.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: row.len(),
            });
        }
        Ok(Self {
            family: LossFamily::Regression { features, targets },
            dim,
        })
    }

    pub fn family(&self) -> &LossFamily {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> usize {
        match &self.family {
            LossFamily::Quadratic { a, .. } => a.len(),
            LossFamily::Regression { targets, .. } => targets.len(),
        }
    }

    /// `f_t(x)`, 1-based slot.
    pub fn value(&self, slot: usize, x: &[f64]) -> f64 {
        let i = slot - 1;
        match &self.family {
            LossFamily::Quadratic { a, b } => a[i] * dot(x, x) + dot(&b[i], x),
            LossFamily::Regression { features, targets } => {
                0.5 * (targets[i] - dot(x, &features[i])).powi(2)
            }
        }
    }

    /// `∇f_t(x)`. Only the simulator and full-information baselines use this.
    pub fn gradient(&self, slot: usize, x: &[f64]) -> Vec<f64> {
        let i = slot - 1;
        match &self.family {
            LossFamily::Quadratic { a, b } => {
                x.iter().zip(&b[i]).map(|(xk, bk)| 2.0 * a[i] * xk + bk).collect()
            }
            LossFamily::Regression { features, targets } => {
                let residual = targets[i] - dot(x, &features[i]);
                features[i].iter().map(|w| -residual * w).collect()
            }
        }
    }

    /// A Lipschitz constant of `f_t` over `set`.
    pub fn lipschitz(&self, slot: usize, set: &FeasibleSet) -> f64 {
        let i = slot - 1;
        let r = set.unshrunk().max_norm();
        match &self.family {
            LossFamily::Quadratic { a, b } => 2.0 * a[i] * r + norm(&b[i]),
            LossFamily::Regression { features, targets } => {
                let w = norm(&features[i]);
                (targets[i].abs() + r * w) * w
            }
        }
    }

    /// Smoothness constant `β_t` of `f_t`.
    pub fn smoothness(&self, slot: usize) -> f64 {
        let i = slot - 1;
        match &self.family {
            LossFamily::Quadratic { a, .. } => 2.0 * a[i],
            LossFamily::Regression { features, .. } => dot(&features[i], &features[i]),
        }
    }
}

/// `a_t = cos(3t) + 3`, `b_t = (2 sin 2t + 1, cos 2t - 2, sin 2t, 2 sin 2t - 2, 2)`.
pub fn synthetic_bco_functions(horizon: usize) -> Result<BcoEnvironment> {
    let (a, b) = (1..=horizon)
        .map(|t| {
            let t = t as f64;
            let (s2, c2) = (2.0 * t).sin_cos();
            (
                (3.0 * t).cos() + 3.0,
                vec![2.0 * s2 + 1.0, c2 - 2.0, s2, 2.0 * s2 - 2.0, 2.0],
            )
        })
        .unzip();
    BcoEnvironment::quadratic(a, b)
}

/// `a_t ~ U[a_min, a_max]`, `b_t ~ U[-b_max, b_max]^K`.
pub fn random_quadratic<R: Rng + ?Sized>(
    horizon: usize,
    dim: usize,
    curvature: (f64, f64),
    b_max: f64,
    rng: &mut R,
) -> Result<BcoEnvironment> {
    let (lo, hi) = curvature;
    if !(0.0 <= lo && lo <= hi) || !(b_max >= 0.0) {
        return Err(Error::param("random_quadratic", "need 0 <= a_min <= a_max and b_max >= 0"));
    }
    let (a, b) = (0..horizon)
        .map(|_| {
            (
                lo + (hi - lo) * rng.random::<f64>(),
                (0..dim).map(|_| b_max * (2.0 * rng.random::<f64>() - 1.0)).collect(),
            )
        })
        .unzip();
    BcoEnvironment::quadratic(a, b)
}

/// Regression table: each row holds `K` features followed by the target. A
/// non-numeric first row is treated as a header. With `standardize`, each
/// feature column is shifted to mean 0 and scaled to population variance 1;
/// constant columns are only centered.
pub fn parse_regression(text: &str, source: &str, standardize: bool) -> Result<BcoEnvironment> {
    let parse_err = |line, reason: String| Error::Parse {
        path: source.to_string(),
        line,
        reason,
    };
    let mut features: Vec<Vec<f64>> = Vec::new();
    let mut targets = Vec::new();
    let mut width = None;
    for (index, (line_no, line)) in data_lines(text).enumerate() {
        let cells = fields(line);
        let parsed: std::result::Result<Vec<f64>, _> = cells.iter().map(|c| c.parse::<f64>()).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if index == 0 => continue,
            Err(_) => return Err(parse_err(line_no, "non-numeric field".into())),
        };
        let expected = *width.get_or_insert(values.len());
        if values.len() != expected || expected < 2 {
            return Err(parse_err(
                line_no,
                format!("expected {} columns, found {}", expected.max(2), values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(parse_err(line_no, "non-finite value".into()));
        }
        let (w, y) = values.split_at(expected - 1);
        features.push(w.to_vec());
        targets.push(y[0]);
    }
    if features.is_empty() {
        return Err(parse_err(0, "no data rows".into()));
    }
    if standardize {
        standardize_columns(&mut features);
    }
    BcoEnvironment::regression(features, targets)
}

fn standardize_columns(rows: &mut [Vec<f64>]) {
    let n = rows.len() as f64;
    for k in 0..rows[0].len() {
        let mean = rows.iter().map(|r| r[k]).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        for r in rows.iter_mut() {
            r[k] -= mean;
            if sd > 0.0 {
                r[k] /= sd;
            }
        }
    }
}

pub fn load_regression_dataset(path: &Path, standardize: bool) -> Result<BcoEnvironment> {
    parse_regression(&read_file(path)?, &path.display().to_string(), standardize)
}
