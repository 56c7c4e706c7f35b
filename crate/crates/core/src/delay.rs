//! Per-slot feedback delays.
//!
//! Slots are 1-indexed: the feedback produced at slot `t` arrives at the end
//! of slot `t + d_t`. A schedule is only valid if every piece of feedback
//! arrives by the end of the horizon, i.e. `d_t <= T - t`.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelaySchedule {
    delays: Vec<usize>,
    max_delay: usize,
    total: usize,
}

impl DelaySchedule {
    /// Validates `delays` (index 0 holds `d_1`).
    pub fn new(delays: Vec<usize>) -> Result<Self> {
        let horizon = delays.len();
        for (i, &d) in delays.iter().enumerate() {
            let slot = i + 1;
            if d > horizon - slot {
                return Err(Error::DelayPastHorizon {
                    slot,
                    delay: d,
                    horizon,
                });
            }
        }
        Ok(Self::from_valid(delays))
    }

    /// Applies the end-of-horizon clamp `d_t <- min(d_t, T - t)`.
    pub fn clamped(mut delays: Vec<usize>) -> Self {
        let horizon = delays.len();
        for (i, d) in delays.iter_mut().enumerate() {
            *d = (*d).min(horizon - (i + 1));
        }
        Self::from_valid(delays)
    }

    pub fn zero(horizon: usize) -> Self {
        Self::from_valid(vec![0; horizon])
    }

    fn from_valid(delays: Vec<usize>) -> Self {
        let max_delay = delays.iter().copied().max().unwrap_or(0);
        let total = delays.iter().sum();
        Self {
            delays,
            max_delay,
            total,
        }
    }

    pub fn horizon(&self) -> usize {
        self.delays.len()
    }

    /// `d_t` for 1-indexed slot `t`.
    pub fn delay(&self, slot: usize) -> usize {
        self.delays[slot - 1]
    }

    /// Slot at whose end the feedback of `slot` is delivered.
    pub fn arrival(&self, slot: usize) -> usize {
        slot + self.delay(slot)
    }

    pub fn delays(&self) -> &[usize] {
        &self.delays
    }

    /// `d̄ = max_t d_t`.
    pub fn max_delay(&self) -> usize {
        self.max_delay
    }

    /// `D = Σ_t d_t`.
    pub fn total(&self) -> usize {
        self.total
    }

    /// One delay per line.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.delays.len() * 2);
        for d in &self.delays {
            writeln!(out, "{d}").unwrap();
        }
        out
    }

    /// Parses the one-column format written by [`DelaySchedule::to_text`].
    /// Blank lines and `#` comments are ignored.
    pub fn from_text(text: &str, source: &str) -> Result<Self> {
        let mut delays = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let d = line.parse::<usize>().map_err(|e| Error::Parse {
                path: source.to_string(),
                line: i + 1,
                reason: format!("`{line}` is not a nonnegative integer ({e})"),
            })?;
            delays.push(d);
        }
        Self::new(delays)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_late_feedback() {
        let err = DelaySchedule::new(vec![0, 2, 0]).unwrap_err();
        assert_eq!(
            err,
            Error::DelayPastHorizon {
                slot: 2,
                delay: 2,
                horizon: 3
            }
        );
    }

    #[test]
    fn clamp_and_summaries() {
        let s = DelaySchedule::clamped(vec![5, 5, 5]);
        assert_eq!(s.delays(), &[2, 1, 0]);
        assert_eq!(s.max_delay(), 2);
        assert_eq!(s.total(), 3);
        assert_eq!(s.arrival(1), 3);
    }

    #[test]
    fn text_round_trip() {
        let s = DelaySchedule::new(vec![2, 0, 0]).unwrap();
        assert_eq!(s.to_text(), "2\n0\n0\n");
        let back = DelaySchedule::from_text("# header\n2\n\n0\n0\n", "mem").unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn text_reports_line_numbers() {
        match DelaySchedule::from_text("0\nx\n", "sched.txt") {
            Err(Error::Parse { line, path, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(path, "sched.txt");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(DelaySchedule::from_text("3\n0\n", "s").is_err());
    }
}
