//! Online learning with bandit feedback under unknown, adversarial delays.
//!
//! The learners here never see when a piece of feedback was generated; the
//! simulator knows, and uses that knowledge only to check invariants.
//!
//! - [`mab`]: DEXP3 for multi-armed bandits, with EXP3 and BOLD baselines.
//! - [`bco`]: DBGD for bandit convex optimization, with OGD, SOLID and FKM.
//! - [`env`]: delay schedules, synthetic and dataset-backed environments,
//!   best-fixed-action comparators.
//! - [`harness`]: seeded runs, sweeps, invariant monitors and trace output.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bco;
pub mod delay;
pub mod env;
pub mod error;
pub mod feedback;
pub mod harness;
pub mod mab;
pub mod plot;
pub mod regret;
pub mod simplex;
pub mod virtual_map;

pub use delay::DelaySchedule;
pub use error::{Error, Result};
pub use feedback::{FeedbackEvent, FeedbackQueue, TieOrder};
pub use regret::RegretTrace;
pub use simplex::ProbabilityVector;
pub use virtual_map::{build_virtual_map, verify_slot_lemma, SlotLemmaReport, VirtualSlotMap};
