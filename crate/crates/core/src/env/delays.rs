use rand::Rng;

use crate::delay::DelaySchedule;
use crate::error::{Error, Result};

/// Delay pattern used by the reference experiments.
pub const REFERENCE_PATTERN: [usize; 7] = [1, 2, 1, 0, 3, 0, 2];

/// Repeats `pattern` over the horizon, then clamps `d_t` to `T - t` so every
/// piece of feedback arrives by the last slot.
pub fn periodic_delays(horizon: usize, pattern: &[usize]) -> Result<DelaySchedule> {
    if pattern.is_empty() {
        return Err(Error::param("pattern", "must contain at least one delay"));
    }
    let delays = (0..horizon).map(|i| pattern[i % pattern.len()]).collect();
    Ok(DelaySchedule::clamped(delays))
}

/// Independent uniform delays in `0..=max_delay`, clamped to the horizon.
pub fn random_delays<R: Rng + ?Sized>(horizon: usize, max_delay: usize, rng: &mut R) -> DelaySchedule {
    let delays = (0..horizon).map(|_| rng.random_range(0..=max_delay)).collect();
    DelaySchedule::clamped(delays)
}
