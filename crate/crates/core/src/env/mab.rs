use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::text::{data_lines, fields, read_file};
use crate::error::{Error, Result};

/// A fixed `T × K` loss matrix with entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MabEnvironment {
    losses: Vec<f64>,
    arms: usize,
    clamped_entries: usize,
}

impl MabEnvironment {
    /// Rejects rows of unequal length and entries outside `[0, 1]`.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(rows, false)
    }

    /// Clamps entries into `[0, 1]` and counts how many needed it.
    pub fn clamped(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(rows, true)
    }

    fn build(rows: Vec<Vec<f64>>, clamp: bool) -> Result<Self> {
        let arms = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || arms == 0 {
            return Err(Error::param("losses", "need at least one slot and one arm"));
        }
        let mut losses = Vec::with_capacity(rows.len() * arms);
        let mut clamped_entries = 0;
        for row in rows {
            if row.len() != arms {
                return Err(Error::DimensionMismatch {
                    expected: arms,
                    actual: row.len(),
                });
            }
            for v in row {
                if v.is_nan() {
                    return Err(Error::LossOutOfRange(v));
                }
                if !(0.0..=1.0).contains(&v) {
                    if !clamp {
                        return Err(Error::LossOutOfRange(v));
                    }
                    clamped_entries += 1;
                }
                losses.push(v.clamp(0.0, 1.0));
            }
        }
        Ok(Self {
            losses,
            arms,
            clamped_entries,
        })
    }

    pub fn horizon(&self) -> usize {
        self.losses.len() / self.arms
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    /// `l_t(k)` for 1-based slot and 0-based arm.
    pub fn loss(&self, slot: usize, arm: usize) -> f64 {
        self.losses[(slot - 1) * self.arms + arm]
    }

    pub fn row(&self, slot: usize) -> &[f64] {
        &self.losses[(slot - 1) * self.arms..slot * self.arms]
    }

    /// Entries that fell outside `[0, 1]` before clamping.
    pub fn clamped_entries(&self) -> usize {
        self.clamped_entries
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.arms];
        for row in self.losses.chunks(self.arms) {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }
}

/// Losses with an abrupt change after `change_slot`:
/// `0.4 k |cos t|` up to it, `0.2 k |sin 2t|` afterwards, clamped to `[0, 1]`.
/// Arms are numbered `k = 1..K` in the formula.
pub fn synthetic_mab_losses(horizon: usize, arms: usize, change_slot: usize) -> Result<MabEnvironment> {
    if arms == 0 || horizon == 0 {
        return Err(Error::param("arms", "need at least one slot and one arm"));
    }
    let rows = (1..=horizon)
        .map(|t| {
            let tf = t as f64;
            (1..=arms)
                .map(|k| {
                    let k = k as f64;
                    if t <= change_slot {
                        0.4 * k * tf.cos().abs()
                    } else {
                        0.2 * k * (2.0 * tf).sin().abs()
                    }
                })
                .collect()
        })
        .collect();
    MabEnvironment::clamped(rows)
}

/// Uniform losses, for randomized tests and sweeps.
pub fn random_mab_losses<R: Rng + ?Sized>(horizon: usize, arms: usize, rng: &mut R) -> Result<MabEnvironment> {
    let rows = (0..horizon)
        .map(|_| (0..arms).map(|_| rng.random::<f64>()).collect())
        .collect();
    MabEnvironment::new(rows)
}

const MISSING_TOKENS: [&str; 5] = ["", "?", "na", "nan", "99"];

/// Ratings table with one user per row and `arms` score columns in `[0, 1]`.
/// Loss is `1 - score`. Missing cells (empty, `?`, `NA`, `NaN`, `99`) get a
/// uniform score drawn from a ChaCha stream seeded with `fill_seed`.
pub fn parse_ratings(text: &str, source: &str, arms: usize, fill_seed: u64) -> Result<MabEnvironment> {
    let mut rng = ChaCha8Rng::seed_from_u64(fill_seed);
    let parse_err = |line, reason: String| Error::Parse {
        path: source.to_string(),
        line,
        reason,
    };
    let mut rows = Vec::new();
    for (line_no, line) in data_lines(text) {
        let cells = fields(line);
        if cells.len() != arms {
            return Err(parse_err(
                line_no,
                format!("expected {arms} columns, found {}", cells.len()),
            ));
        }
        let mut row = Vec::with_capacity(arms);
        for cell in cells {
            let score = if MISSING_TOKENS.contains(&cell.to_ascii_lowercase().as_str()) {
                rng.random::<f64>()
            } else {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("`{cell}` is not a number")))?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(parse_err(line_no, format!("score {v} is outside [0, 1]")));
                }
                v
            };
            row.push(1.0 - score);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(0, "no data rows".into()));
    }
    MabEnvironment::new(rows)
}

pub fn load_ratings_dataset(path: &Path, arms: usize, fill_seed: u64) -> Result<MabEnvironment> {
    parse_ratings(&read_file(path)?, &path.display().to_string(), arms, fill_seed)
}

/// `argmin_k Σ_t l_t(k)` with ties to the lowest index, and its cumulative loss.
pub fn best_fixed_arm(env: &MabEnvironment) -> (usize, f64) {
    env.column_sums()
        .into_iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (k, s)| if s < best.1 { (k, s) } else { best })
}
