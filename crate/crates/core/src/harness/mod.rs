//! Seeded simulations, invariant monitors, sweeps and trace output.

mod config;
mod learner;
mod monitor;
mod output;
mod simulate;
mod sweep;

pub use config::{
    BcoAlgorithm, BcoEnvSpec, BcoRun, DbgdTuning, DelaySpec, Dexp3Tuning, MabAlgorithm, MabEnvSpec, MabRun,
    Rate, SeedStreams, Simulation, SimulationConfig, Stream,
};
pub use learner::{BcoLearner, BcoPayload, DelayKnowledge, Delivery, EstimatorKind, FeedbackKind, MabLearner};
pub use monitor::{
    monitor_invariants, BcoTelemetry, BcoUpdate, CheckOutcome, CheckStatus, MabTelemetry, MonitorReport,
    MonitorSet, Telemetry, BOUND_TOLERANCE, MONITOR_NAMES,
};
pub use output::{aggregate_csv, file_stem, trace_csv, write_atomic, AGGREGATE_HEADER, TRACE_HEADER};
pub use simulate::{run_bco, run_mab, simulate_bco, simulate_mab, BcoSimulation, MabSimulation, RunResult};
pub use sweep::{run_simulation, sweep, Aggregate, SweepEntry};
