//! DEXP3: exponential weights under unknown feedback delays.
//!
//! A delayed loss is importance-weighted by the distribution that is current
//! when it arrives, not by the one it was drawn from (which the learner cannot
//! identify). The resulting bias is kept in check by two safeguards: the loss
//! estimate is capped at `δ1` before exponentiation, and every arm keeps at
//! least `δ2/K` mass before the final renormalization. Together they give
//! `p(k) >= δ2 / (K (1 + δ2))` and bounded ratios between consecutive
//! distributions.

use std::fmt;

use rand::Rng;

use super::{sample_arm, MabObservation};
use crate::error::{Error, Result};
use crate::simplex::ProbabilityVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dexp3Params {
    pub eta: f64,
    /// Cap on the loss estimate.
    pub delta1: f64,
    /// Probability floor scale.
    pub delta2: f64,
    pub arms: usize,
}

impl Dexp3Params {
    /// Checked constructor: requires `η > 0`, `δ1 > 0`, `δ2 ∈ (0, 1)`,
    /// `1 - δ2 - ηδ1 >= 0` and `1 - ηδ1 > 0`.
    pub fn new(eta: f64, delta1: f64, delta2: f64, arms: usize) -> Result<Self> {
        if arms == 0 {
            return Err(Error::param("arms", "need at least one arm"));
        }
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::param("eta", format!("{eta} is not a positive finite rate")));
        }
        if !(delta1 > 0.0) {
            return Err(Error::param("delta1", format!("{delta1} must be positive")));
        }
        if !(delta2 > 0.0 && delta2 < 1.0) {
            return Err(Error::param("delta2", format!("{delta2} is not in (0, 1)")));
        }
        let params = Self {
            eta,
            delta1,
            delta2,
            arms,
        };
        if 1.0 - delta2 - eta * delta1 < 0.0 {
            return Err(Error::param(
                "delta1",
                format!("1 - delta2 - eta*delta1 = {} < 0", 1.0 - delta2 - eta * delta1),
            ));
        }
        if 1.0 - eta * delta1 <= 0.0 {
            return Err(Error::param("delta1", "1 - eta*delta1 must be positive"));
        }
        Ok(params)
    }

    /// The tuning that yields the `O(√(K d̄ (T+D)))` regret bound:
    /// `δ2 = 1/(T+D)`, `η = √((1+ln K)/(d̄ K (T+D)))`, `δ1 = 1/(2ηd̄) - δ2/η`.
    pub fn theorem1(horizon: usize, total_delay: usize, max_delay: usize, arms: usize) -> Result<Self> {
        Self::theorem1_scaled(horizon, total_delay, max_delay, arms, 1.0)
    }

    /// As [`Dexp3Params::theorem1`] with `η` multiplied by `eta_scale`.
    ///
    /// `δ1` is recomputed from the scaled `η`, so `1 - δ2 - ηδ1 = 1 - 1/(2d̄)`
    /// holds for any scale.
    pub fn theorem1_scaled(
        horizon: usize,
        total_delay: usize,
        max_delay: usize,
        arms: usize,
        eta_scale: f64,
    ) -> Result<Self> {
        if max_delay == 0 {
            return Err(Error::param("max_delay", "the tuning requires d_bar > 0"));
        }
        if horizon == 0 {
            return Err(Error::param("horizon", "must be at least 1"));
        }
        if arms == 0 {
            return Err(Error::param("arms", "need at least one arm"));
        }
        // δ1 > 0 needs T + D > 2 d̄; this also forces δ2 < 1.
        let span = (horizon + total_delay) as f64;
        let d_bar = max_delay as f64;
        if span <= 2.0 * d_bar {
            return Err(Error::param(
                "horizon",
                format!("T + D = {span} must exceed 2*d_bar = {}", 2.0 * d_bar),
            ));
        }
        let k = arms as f64;
        let delta2 = 1.0 / span;
        let eta = eta_scale * ((1.0 + k.ln()) / (d_bar * k * span)).sqrt();
        let delta1 = 1.0 / (2.0 * eta * d_bar) - delta2 / eta;
        Self::new(eta, delta1, delta2, arms)
    }

    /// Disables both safeguards (`δ1 = ∞`, `δ2 = 0`). With zero delay the
    /// update then coincides with EXP3. The safeguard conditions do not hold.
    pub fn without_safeguards(eta: f64, arms: usize) -> Self {
        Self {
            eta,
            delta1: f64::INFINITY,
            delta2: 0.0,
            arms,
        }
    }

    pub fn satisfies_safeguard_conditions(&self) -> bool {
        self.delta2 > 0.0
            && self.delta1.is_finite()
            && 1.0 - self.delta2 - self.eta * self.delta1 >= 0.0
            && 1.0 - self.eta * self.delta1 > 0.0
    }

    /// `δ2 / (K (1 + δ2))`.
    pub fn floor(&self) -> f64 {
        self.delta2 / (self.arms as f64 * (1.0 + self.delta2))
    }

    /// Upper bound on `p_prev(k) / p_next(k)`: `1/(1 - δ2 - ηδ1)`.
    pub fn shrink_ratio_bound(&self) -> f64 {
        1.0 / (1.0 - self.delta2 - self.eta * self.delta1)
    }

    /// Upper bound on `p_next(k) / p_prev(k)`: `max{1 + δ2, 1/(1 - ηδ1)}`.
    pub fn growth_ratio_bound(&self) -> f64 {
        (1.0 + self.delta2).max(1.0 / (1.0 - self.eta * self.delta1))
    }
}

/// [`Dexp3Params::theorem1`] as a free function.
pub fn dexp3_theorem1_params(horizon: usize, total_delay: usize, max_delay: usize, arms: usize) -> Result<Dexp3Params> {
    Dexp3Params::theorem1(horizon, total_delay, max_delay, arms)
}

/// Importance-weighted loss vector scaled by the current distribution.
pub fn estimate_loss(loss: f64, arm: usize, current: &ProbabilityVector) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&loss) {
        return Err(Error::LossOutOfRange(loss));
    }
    if arm >= current.len() {
        return Err(Error::DimensionMismatch {
            expected: current.len(),
            actual: arm + 1,
        });
    }
    let mut estimate = vec![0.0; current.len()];
    estimate[arm] = loss / current[arm];
    Ok(estimate)
}

/// One capped exponential step, floor-trimmed normalization, and final normalization.
pub fn apply_feedback(
    p: &ProbabilityVector,
    estimate: &[f64],
    params: &Dexp3Params,
) -> ProbabilityVector {
    debug_assert_eq!(p.len(), estimate.len());
    let raw: Vec<f64> = p
        .as_slice()
        .iter()
        .zip(estimate)
        .map(|(pk, lk)| pk * (-params.eta * params.delta1.min(*lk)).exp())
        .collect();
    let raw_total: f64 = raw.iter().sum();
    let floor = params.delta2 / params.arms as f64;
    let trimmed: Vec<f64> = raw.iter().map(|w| (w / raw_total).max(floor)).collect();
    ProbabilityVector::from_weights(trimmed).expect("trimmed weights are positive")
}

/// DEXP3 learner state.
#[derive(Debug, Clone)]
pub struct Dexp3 {
    p: ProbabilityVector,
    params: Dexp3Params,
}

impl Dexp3 {
    pub fn new(params: Dexp3Params) -> Self {
        Self {
            p: ProbabilityVector::uniform(params.arms),
            params,
        }
    }

    pub fn distribution(&self) -> &ProbabilityVector {
        &self.p
    }

    pub fn params(&self) -> &Dexp3Params {
        &self.params
    }

    pub fn select_arm<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_arm(&self.p, rng)
    }

    /// Estimate then apply one delayed observation.
    pub fn observe(&mut self, obs: MabObservation) -> Result<()> {
        let estimate = estimate_loss(obs.loss, obs.arm, &self.p)?;
        self.p = apply_feedback(&self.p, &estimate, &self.params);
        Ok(())
    }

    /// Applies everything that arrived this slot, in the given order.
    /// An empty slot leaves the distribution unchanged.
    pub fn end_of_slot(&mut self, feedback: &[MabObservation]) -> Result<()> {
        feedback.iter().try_for_each(|obs| self.observe(*obs))
    }
}

impl fmt::Display for Dexp3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "dexp3 eta={:.6e} delta1={:.6} delta2={:.6e} p={:?}",
            self.params.eta,
            self.params.delta1,
            self.params.delta2,
            self.p.as_slice()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Straight-line evaluation of the three update steps for K = 2.
    fn two_arm_oracle(p: [f64; 2], l: [f64; 2], eta: f64, d1: f64, d2: f64) -> [f64; 2] {
        let w0 = p[0] * (-eta * d1.min(l[0])).exp();
        let w1 = p[1] * (-eta * d1.min(l[1])).exp();
        let s = w0 + w1;
        let t0 = f64::max(w0 / s, d2 / 2.0);
        let t1 = f64::max(w1 / s, d2 / 2.0);
        [t0 / (t0 + t1), t1 / (t0 + t1)]
    }

    #[test]
    fn estimate_scales_by_current_distribution() {
        let p = ProbabilityVector::new(vec![0.2, 0.5, 0.3]).unwrap();
        let est = estimate_loss(0.8, 1, &p).unwrap();
        assert_eq!(est, vec![0.0, 1.6, 0.0]);
        assert_eq!(estimate_loss(0.0, 2, &p).unwrap(), vec![0.0; 3]);
        let sure = ProbabilityVector::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(estimate_loss(0.37, 1, &sure).unwrap(), vec![0.0, 0.37]);
        assert!(matches!(estimate_loss(1.2, 0, &p), Err(Error::LossOutOfRange(_))));
        assert!(matches!(estimate_loss(-0.1, 0, &p), Err(Error::LossOutOfRange(_))));
    }

    #[test]
    fn step_matches_scalar_oracle() {
        // These values do not satisfy the safeguard conditions; the step itself
        // is still well defined.
        let params = Dexp3Params {
            eta: 0.1,
            delta1: 10.0,
            delta2: 0.01,
            arms: 2,
        };
        let p = ProbabilityVector::uniform(2);
        let next = apply_feedback(&p, &[1.0, 0.0], &params);
        let expected = two_arm_oracle([0.5, 0.5], [1.0, 0.0], 0.1, 10.0, 0.01);
        assert!((next[0] - expected[0]).abs() < 1e-15);
        assert!((next[0] - 0.475_021).abs() < 5e-7);
        assert!((next[1] - 0.524_979).abs() < 5e-7);
    }

    #[test]
    fn zero_estimate_is_fixed_point() {
        let params = Dexp3Params::new(0.1, 5.0, 0.01, 3).unwrap();
        let p = ProbabilityVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let next = apply_feedback(&p, &[0.0; 3], &params);
        assert_eq!(next, p);
    }

    #[test]
    fn floor_activates() {
        // η δ1 = 0.9 caps the estimate; arm 1 drops to p e^{-0.9}/(…) ≈ 0.289,
        // so use a large δ2 to make δ2/K the binding bound.
        let params = Dexp3Params::new(0.9, 1.0, 0.09, 2).unwrap();
        let p = ProbabilityVector::new(vec![0.05, 0.95]).unwrap();
        let next = apply_feedback(&p, &[params.delta1, 0.0], &params);
        let raw0: f64 = 0.05 * (-0.9f64).exp();
        let q0 = raw0 / (raw0 + 0.95);
        let floor = params.delta2 / 2.0;
        assert!(q0 < floor, "precondition: trimmed step must bind");
        let q1 = 0.95 / (raw0 + 0.95);
        let expected0 = floor / (floor + q1);
        assert_eq!(next[0], expected0);
        let oracle = two_arm_oracle([0.05, 0.95], [1.0, 0.0], 0.9, 1.0, 0.09);
        assert!((next[0] - oracle[0]).abs() < 1e-15);
        assert!(next.min() >= params.floor() - 1e-12);
    }

    #[test]
    fn empty_slot_reuses_distribution() {
        let mut learner = Dexp3::new(Dexp3Params::new(0.1, 5.0, 0.01, 3).unwrap());
        learner.observe(MabObservation { loss: 0.7, arm: 2 }).unwrap();
        let before = learner.distribution().clone();
        learner.end_of_slot(&[]).unwrap();
        assert_eq!(learner.distribution(), &before);
    }

    #[test]
    fn slot_is_sequential_composition() {
        let params = Dexp3Params::new(0.3, 3.0, 0.05, 2).unwrap();
        let a = MabObservation { loss: 0.9, arm: 0 };
        let b = MabObservation { loss: 0.4, arm: 1 };

        let mut batched = Dexp3::new(params);
        batched.end_of_slot(&[a, b]).unwrap();

        let p0 = ProbabilityVector::uniform(2);
        let e_a = estimate_loss(a.loss, a.arm, &p0).unwrap();
        let p1 = apply_feedback(&p0, &e_a, &params);
        let e_b = estimate_loss(b.loss, b.arm, &p1).unwrap();
        let p2 = apply_feedback(&p1, &e_b, &params);
        assert_eq!(batched.distribution(), &p2);

        // Scalar oracle: first step uses p0, second step re-scales by p1.
        let o1 = two_arm_oracle([0.5, 0.5], [0.9 / 0.5, 0.0], 0.3, 3.0, 0.05);
        let o2 = two_arm_oracle(o1, [0.0, 0.4 / o1[1]], 0.3, 3.0, 0.05);
        assert!((p2[0] - o2[0]).abs() < 1e-15);

        // Applying in the opposite order generally lands elsewhere.
        let mut reversed = Dexp3::new(params);
        reversed.end_of_slot(&[b, a]).unwrap();
        assert!((reversed.distribution()[0] - p2[0]).abs() > 1e-6);

        let mut single = Dexp3::new(params);
        single.end_of_slot(&[a]).unwrap();
        assert_eq!(single.distribution(), &p1);
    }

    #[test]
    fn default_tuning_values() {
        let params = Dexp3Params::theorem1(2000, 2569, 3, 5).unwrap();
        assert_eq!(dexp3_theorem1_params(2000, 2569, 3, 5).unwrap(), params);
        let span = 4569.0f64;
        let eta = ((1.0 + 5f64.ln()) / (3.0 * 5.0 * span)).sqrt();
        assert!((params.delta2 - 2.1887e-4).abs() < 1e-8);
        assert!((params.eta - 6.1705e-3).abs() < 1e-7);
        assert!((params.eta - eta).abs() < 1e-18);
        assert!((params.delta1 - 26.975).abs() < 1e-3);
        let slack = 1.0 - params.delta2 - params.eta * params.delta1;
        assert!((slack - (1.0 - 1.0 / 6.0)).abs() < 1e-12);
        assert!(1.0 - params.eta * params.delta1 > 0.0);
        assert!(params.satisfies_safeguard_conditions());
    }

    #[test]
    fn default_tuning_identity_for_any_scale() {
        for (t, d, dbar, k, c) in [(50, 30, 2, 3, 1.0), (400, 12, 4, 10, 0.5), (10, 10, 1, 2, 2.0)] {
            let params = Dexp3Params::theorem1_scaled(t, d, dbar, k, c).unwrap();
            let slack = 1.0 - params.delta2 - params.eta * params.delta1;
            assert!((slack - (1.0 - 0.5 / dbar as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn default_tuning_guards() {
        assert!(Dexp3Params::theorem1(100, 10, 0, 3).is_err());
        // T=1, D=0, d̄=1 would give δ2 = 1.
        assert!(Dexp3Params::theorem1(1, 0, 1, 2).is_err());
        // T+D = 2d̄ would give δ1 = 0.
        assert!(Dexp3Params::theorem1(2, 0, 1, 2).is_err());
        assert!(Dexp3Params::theorem1(3, 0, 1, 2).is_ok());
    }

    #[test]
    fn checked_constructor_enforces_safeguard_conditions() {
        assert!(Dexp3Params::new(0.1, 9.0, 0.01, 2).is_ok());
        assert!(Dexp3Params::new(0.1, 10.0, 0.01, 2).is_err());
        assert!(Dexp3Params::new(0.1, 9.0, 0.11, 2).is_err());
        assert!(Dexp3Params::new(0.0, 1.0, 0.1, 2).is_err());
        assert!(Dexp3Params::new(0.1, 1.0, 1.0, 2).is_err());
        assert!(!Dexp3Params::without_safeguards(0.1, 2).satisfies_safeguard_conditions());
    }
}
