//! Real-to-virtual slot mapping.
//!
//! Virtual slot `τ` is the `τ`-th feedback application over the run. For each
//! `τ` the map records the real slot `t(τ)` whose loss was applied, the number
//! of feedbacks `L_{t(τ)-1}` received before that slot started, and the lag
//! `s̃_τ = τ - 1 - L_{t(τ)-1}`: how many virtual updates happened between the
//! moment the action was taken and the moment its feedback was used.
//!
//! For any valid schedule with maximum delay `d̄` and total delay `D`:
//! `s̃_τ >= 0`, `s̃_τ <= 2 d̄`, and `Σ_τ s̃_τ = D`.

use std::fmt;

use crate::delay::DelaySchedule;
use crate::error::{Error, Result};
use crate::feedback::TieOrder;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VirtualSlotMap {
    t_of_tau: Vec<usize>,
    prefix_at_origin: Vec<usize>,
    received_before: Vec<usize>,
    lags: Vec<i64>,
}

impl VirtualSlotMap {
    /// Builds the map by sorting feedback by arrival slot, breaking ties with `tie_order`.
    pub fn build(schedule: &DelaySchedule, tie_order: TieOrder) -> Result<Self> {
        // Re-validate: a hand-built schedule may bypass the constructor checks.
        let schedule = DelaySchedule::new(schedule.delays().to_vec())?;
        let horizon = schedule.horizon();
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); horizon + 1];
        for s in 1..=horizon {
            buckets[schedule.arrival(s)].push(s);
        }
        let mut order = Vec::with_capacity(horizon);
        for (slot, bucket) in buckets.iter_mut().enumerate().skip(1) {
            tie_order.arrange(slot, bucket);
            order.extend_from_slice(bucket);
        }
        Self::from_delivery_order(order, &schedule)
    }

    /// Builds the map from an observed delivery sequence of origin slots.
    ///
    /// Fails if `order` is not a permutation of `1..=T`.
    pub fn from_delivery_order(order: Vec<usize>, schedule: &DelaySchedule) -> Result<Self> {
        let horizon = schedule.horizon();
        if order.len() != horizon {
            return Err(Error::DimensionMismatch {
                expected: horizon,
                actual: order.len(),
            });
        }
        let mut seen = vec![false; horizon + 1];
        for &s in &order {
            if s == 0 || s > horizon || seen[s] {
                return Err(Error::ConfigMismatch(format!(
                    "delivery order is not a permutation of 1..={horizon} (offending slot {s})"
                )));
            }
            seen[s] = true;
        }

        // received_before[t] = L_{t-1}: feedback count delivered by the end of slot t-1.
        let mut arrivals_per_slot = vec![0usize; horizon + 1];
        for s in 1..=horizon {
            arrivals_per_slot[schedule.arrival(s)] += 1;
        }
        let mut received_before = vec![0usize; horizon + 1];
        for t in 2..=horizon {
            received_before[t] = received_before[t - 1] + arrivals_per_slot[t - 1];
        }

        let prefix_at_origin: Vec<usize> = order.iter().map(|&t| received_before[t]).collect();
        let lags = prefix_at_origin
            .iter()
            .enumerate()
            .map(|(i, &l)| i as i64 - l as i64)
            .collect();
        Ok(Self {
            t_of_tau: order,
            prefix_at_origin,
            received_before,
            lags,
        })
    }

    pub fn horizon(&self) -> usize {
        self.t_of_tau.len()
    }

    /// `t(τ)` for every `τ = 1..=T`.
    pub fn t_of_tau(&self) -> &[usize] {
        &self.t_of_tau
    }

    /// `L_{t(τ)-1}` for every `τ`.
    pub fn prefix_at_origin(&self) -> &[usize] {
        &self.prefix_at_origin
    }

    /// `L_{t-1}` for real slot `t` (1-indexed).
    pub fn received_before(&self, slot: usize) -> usize {
        self.received_before[slot]
    }

    /// `s̃_τ` for every `τ`.
    pub fn lags(&self) -> &[i64] {
        &self.lags
    }

    /// Checks the three lag properties against `schedule`.
    pub fn verify(&self, schedule: &DelaySchedule) -> SlotLemmaReport {
        let bound = 2 * schedule.max_delay() as i64;
        let negative_at = self.lags.iter().position(|&s| s < 0).map(|i| i + 1);
        let over_bound_at = self.lags.iter().position(|&s| s > bound).map(|i| i + 1);
        SlotLemmaReport {
            negative_at,
            over_bound_at,
            lag_sum: self.lags.iter().sum(),
            total_delay: schedule.total() as i64,
            max_lag: self.lags.iter().copied().max().unwrap_or(0),
            lag_bound: bound,
        }
    }
}

/// Outcome of [`VirtualSlotMap::verify`]. Violations name the first offending `τ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotLemmaReport {
    pub negative_at: Option<usize>,
    pub over_bound_at: Option<usize>,
    pub lag_sum: i64,
    pub total_delay: i64,
    pub max_lag: i64,
    pub lag_bound: i64,
}

impl SlotLemmaReport {
    pub fn passed(&self) -> bool {
        self.negative_at.is_none() && self.over_bound_at.is_none() && self.lag_sum == self.total_delay
    }
}

impl fmt::Display for SlotLemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |ok: bool| if ok { "pass" } else { "FAIL" };
        match self.negative_at {
            None => writeln!(f, "  lag >= 0            : pass")?,
            Some(tau) => writeln!(f, "  lag >= 0            : FAIL at tau={tau}")?,
        }
        match self.over_bound_at {
            None => writeln!(
                f,
                "  lag <= 2*d_bar = {:<3}: pass (max lag {})",
                self.lag_bound, self.max_lag
            )?,
            Some(tau) => writeln!(f, "  lag <= 2*d_bar = {:<3}: FAIL at tau={tau}", self.lag_bound)?,
        }
        write!(
            f,
            "  sum of lags = D     : {} ({} vs {})",
            mark(self.lag_sum == self.total_delay),
            self.lag_sum,
            self.total_delay
        )
    }
}

pub fn build_virtual_map(schedule: &DelaySchedule, tie_order: TieOrder) -> Result<VirtualSlotMap> {
    VirtualSlotMap::build(schedule, tie_order)
}

pub fn verify_slot_lemma(map: &VirtualSlotMap, schedule: &DelaySchedule) -> SlotLemmaReport {
    map.verify(schedule)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_slot_delay_example() {
        // Slot 3 delivers origins 1 and 3 together; the worked example
        // processes the newer one first.
        let schedule = DelaySchedule::new(vec![2, 0, 0]).unwrap();
        let ascending = build_virtual_map(&schedule, TieOrder::OriginAscending).unwrap();
        assert_eq!(ascending.t_of_tau(), &[2, 1, 3]);
        assert_eq!(ascending.lags(), &[0, 1, 1]);
        let map = build_virtual_map(&schedule, TieOrder::OriginDescending).unwrap();
        assert_eq!(map.t_of_tau(), &[2, 3, 1]);
        assert_eq!(map.prefix_at_origin(), &[0, 1, 0]);
        assert_eq!(map.lags(), &[0, 0, 2]);
        let report = verify_slot_lemma(&map, &schedule);
        assert!(report.passed(), "{report}");
        assert_eq!(report.lag_sum, 2);
    }

    #[test]
    fn zero_delay_is_identity() {
        let schedule = DelaySchedule::zero(3);
        let map = build_virtual_map(&schedule, TieOrder::OriginAscending).unwrap();
        assert_eq!(map.t_of_tau(), &[1, 2, 3]);
        assert_eq!(map.lags(), &[0, 0, 0]);
        let report = map.verify(&schedule);
        assert!(report.passed());
        assert_eq!(report.lag_sum, 0);
        assert_eq!(report.total_delay, 0);
    }

    #[test]
    fn seven_slot_pattern() {
        // Pattern 1,2,1,0,3,0,2 clamped to T=7 gives 1,2,1,0,2,0,0.
        // Arrivals: s1->2, s2->4, s3->4, s4->4, s5->7, s6->6, s7->7.
        let schedule = DelaySchedule::clamped(vec![1, 2, 1, 0, 3, 0, 2]);
        assert_eq!(schedule.delays(), &[1, 2, 1, 0, 2, 0, 0]);
        let map = build_virtual_map(&schedule, TieOrder::OriginAscending).unwrap();
        assert_eq!(map.t_of_tau(), &[1, 2, 3, 4, 6, 5, 7]);
        // L_{t-1}: L_0=0, L_1=0, L_2=1, L_3=1, L_4=4, L_5=4, L_6=5.
        assert_eq!(map.prefix_at_origin(), &[0, 0, 1, 1, 4, 4, 5]);
        assert_eq!(map.lags(), &[0, 1, 1, 2, 0, 1, 1]);
        let report = map.verify(&schedule);
        assert!(report.passed(), "{report}");
        assert_eq!(report.lag_sum, 6);
        assert!(report.max_lag <= 6);
    }

    #[test]
    fn non_permutation_rejected() {
        let schedule = DelaySchedule::zero(3);
        assert!(VirtualSlotMap::from_delivery_order(vec![1, 1, 3], &schedule).is_err());
        assert!(VirtualSlotMap::from_delivery_order(vec![1, 2], &schedule).is_err());
    }

    #[test]
    fn report_names_offending_tau() {
        // Deliver slot 1's feedback before slot 1 itself could have produced
        // an earlier one: order inconsistent with the schedule.
        let schedule = DelaySchedule::new(vec![0, 0, 0]).unwrap();
        let map = VirtualSlotMap::from_delivery_order(vec![3, 1, 2], &schedule).unwrap();
        let report = map.verify(&schedule);
        assert!(!report.passed());
        assert_eq!(report.negative_at, Some(1));
    }
}
