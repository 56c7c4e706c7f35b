/// Cumulative learner loss against a single fixed comparator, per slot.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    learner_cumulative: Vec<f64>,
    comparator_cumulative: Vec<f64>,
}

impl RegretTrace {
    /// Accumulates per-slot losses. Both inputs must have length `T`.
    pub fn from_losses(learner: &[f64], comparator: &[f64]) -> Self {
        assert_eq!(learner.len(), comparator.len(), "loss sequences differ in length");
        let running = |xs: &[f64]| {
            xs.iter()
                .scan(0.0, |acc, x| {
                    *acc += x;
                    Some(*acc)
                })
                .collect::<Vec<_>>()
        };
        Self {
            learner_cumulative: running(learner),
            comparator_cumulative: running(comparator),
        }
    }

    pub fn horizon(&self) -> usize {
        self.learner_cumulative.len()
    }

    pub fn learner_cumulative(&self) -> &[f64] {
        &self.learner_cumulative
    }

    pub fn comparator_cumulative(&self) -> &[f64] {
        &self.comparator_cumulative
    }

    /// Regret after slot `t` (1-indexed).
    pub fn regret_at(&self, slot: usize) -> f64 {
        self.learner_cumulative[slot - 1] - self.comparator_cumulative[slot - 1]
    }

    pub fn regret(&self) -> Vec<f64> {
        (1..=self.horizon()).map(|t| self.regret_at(t)).collect()
    }

    /// `Reg_T`.
    pub fn final_regret(&self) -> f64 {
        self.regret_at(self.horizon())
    }

    /// `Reg_t / T` for every slot.
    pub fn normalized_by_horizon(&self) -> Vec<f64> {
        let horizon = self.horizon() as f64;
        self.regret().into_iter().map(|r| r / horizon).collect()
    }

    /// `Reg_t / t` for every slot.
    pub fn normalized_by_slot(&self) -> Vec<f64> {
        self.regret()
            .into_iter()
            .enumerate()
            .map(|(i, r)| r / (i + 1) as f64)
            .collect()
    }
}
