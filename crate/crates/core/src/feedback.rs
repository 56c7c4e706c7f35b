//! Delayed feedback events and the arrival queue.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One delayed observation.
///
/// The origin slot exists for simulation bookkeeping and verification.
/// Unknown-delay learners are handed only the payload (see
/// [`FeedbackEvent::payload`]); the harness never passes them the event.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackEvent<P> {
    origin_slot: usize,
    arrival_slot: usize,
    payload: P,
}

impl<P> FeedbackEvent<P> {
    pub fn new(origin_slot: usize, arrival_slot: usize, payload: P) -> Self {
        debug_assert!(arrival_slot >= origin_slot);
        Self {
            origin_slot,
            arrival_slot,
            payload,
        }
    }

    pub fn origin_slot(&self) -> usize {
        self.origin_slot
    }

    pub fn arrival_slot(&self) -> usize {
        self.arrival_slot
    }

    pub fn payload(&self) -> &P {
        &self.payload
    }

    pub fn into_payload(self) -> P {
        self.payload
    }
}

/// Order in which feedback arriving in the same slot is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieOrder {
    #[default]
    OriginAscending,
    OriginDescending,
    /// Deterministic pseudo-random permutation per arrival slot.
    Shuffled { seed: u64 },
}

impl TieOrder {
    /// Reorders events that all arrive at `slot`. Input must be in
    /// ascending origin order.
    pub fn arrange<T>(&self, slot: usize, items: &mut [T]) {
        match *self {
            TieOrder::OriginAscending => {}
            TieOrder::OriginDescending => items.reverse(),
            TieOrder::Shuffled { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(slot as u64);
                items.shuffle(&mut rng);
            }
        }
    }
}

/// Events bucketed by arrival slot.
#[derive(Debug, Clone)]
pub struct FeedbackQueue<P> {
    buckets: Vec<Vec<FeedbackEvent<P>>>,
    tie_order: TieOrder,
}

impl<P> FeedbackQueue<P> {
    pub fn new(horizon: usize, tie_order: TieOrder) -> Self {
        Self {
            buckets: (0..=horizon).map(|_| Vec::new()).collect(),
            tie_order,
        }
    }

    /// Enqueues feedback produced at `origin` for delivery at the end of `arrival`.
    ///
    /// Origins must be pushed in ascending order.
    pub fn push(&mut self, origin: usize, arrival: usize, payload: P) {
        self.buckets[arrival].push(FeedbackEvent::new(origin, arrival, payload));
    }

    /// Removes and returns everything due at the end of `slot`, in tie order.
    pub fn drain_due(&mut self, slot: usize) -> Vec<FeedbackEvent<P>> {
        let mut due = std::mem::take(&mut self.buckets[slot]);
        self.tie_order.arrange(slot, &mut due);
        due
    }

    pub fn pending(&self) -> usize {
        self.buckets.iter().map(Vec::len).sum()
    }
}
