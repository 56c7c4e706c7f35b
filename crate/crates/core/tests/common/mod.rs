#![allow(dead_code)]

use delayband::bco::FeasibleSet;
use delayband::env::REFERENCE_PATTERN;
use delayband::harness::{
    BcoAlgorithm, BcoEnvSpec, BcoRun, DelaySpec, MabAlgorithm, MabEnvSpec, MabRun, MonitorSet, Simulation,
    SimulationConfig,
};
use delayband::TieOrder;

/// Slot at which the synthetic bandit losses switch regime.
pub const CHANGE_SLOT: usize = 500;

pub fn mab_run(algorithm: MabAlgorithm, horizon: usize, monitors: MonitorSet) -> MabRun {
    MabRun {
        name: algorithm.label().into(),
        algorithm,
        environment: MabEnvSpec::Synthetic {
            horizon,
            arms: 5,
            change_slot: CHANGE_SLOT,
        },
        delays: DelaySpec::Periodic(REFERENCE_PATTERN.to_vec()),
        tie_order: TieOrder::default(),
        monitors,
    }
}

pub fn bco_run(algorithm: BcoAlgorithm, environment: BcoEnvSpec, monitors: MonitorSet) -> BcoRun {
    BcoRun {
        name: algorithm.label().into(),
        algorithm,
        environment,
        set: FeasibleSet::ball(1.0).unwrap(),
        delays: DelaySpec::Periodic(REFERENCE_PATTERN.to_vec()),
        tie_order: TieOrder::default(),
        monitors,
    }
}

pub fn mab_config(algorithm: MabAlgorithm, horizon: usize, seeds: u64) -> SimulationConfig {
    SimulationConfig {
        simulation: Simulation::Mab(mab_run(algorithm, horizon, MonitorSet::none())),
        seeds: (0..seeds).collect(),
    }
}

pub fn bco_config(algorithm: BcoAlgorithm, horizon: usize, seeds: u64) -> SimulationConfig {
    SimulationConfig {
        simulation: Simulation::Bco(bco_run(algorithm, BcoEnvSpec::Synthetic { horizon }, MonitorSet::none())),
        seeds: (0..seeds).collect(),
    }
}
