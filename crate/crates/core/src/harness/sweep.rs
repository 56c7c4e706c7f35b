use rayon::prelude::*;

use super::config::{Simulation, SimulationConfig};
use super::simulate::{run_bco, run_mab, RunResult};
use crate::error::Result;

/// Per-slot mean and standard deviation of `Reg_t / T` across seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub runs: usize,
    pub mean_normalized: Vec<f64>,
    /// Sample standard deviation; zero for a single run.
    pub std_normalized: Vec<f64>,
}

impl Aggregate {
    /// Returns `None` when there are no runs or their horizons differ.
    pub fn of(results: &[&RunResult]) -> Option<Self> {
        let horizon = results.first()?.horizon();
        if results.iter().any(|r| r.horizon() != horizon) {
            return None;
        }
        let traces: Vec<Vec<f64>> = results.iter().map(|r| r.regret.normalized_by_horizon()).collect();
        let n = traces.len() as f64;
        let mut mean_normalized = vec![0.0; horizon];
        let mut std_normalized = vec![0.0; horizon];
        for t in 0..horizon {
            let mean = traces.iter().map(|tr| tr[t]).sum::<f64>() / n;
            mean_normalized[t] = mean;
            if traces.len() > 1 {
                let ss: f64 = traces.iter().map(|tr| (tr[t] - mean).powi(2)).sum();
                std_normalized[t] = (ss / (n - 1.0)).sqrt();
            }
        }
        Some(Self {
            runs: traces.len(),
            mean_normalized,
            std_normalized,
        })
    }

    pub fn final_mean(&self) -> f64 {
        *self.mean_normalized.last().expect("aggregate over a nonempty horizon")
    }

    pub fn final_std(&self) -> f64 {
        *self.std_normalized.last().expect("aggregate over a nonempty horizon")
    }
}

/// All seeds of one configuration.
#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub name: String,
    pub runs: Vec<(u64, Result<RunResult>)>,
    /// Over the successful runs.
    pub aggregate: Option<Aggregate>,
}

impl SweepEntry {
    pub fn successes(&self) -> impl Iterator<Item = &RunResult> {
        self.runs.iter().filter_map(|(_, r)| r.as_ref().ok())
    }

    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|(_, r)| r.is_err()).count()
    }
}

pub fn run_simulation(simulation: &Simulation, seed: u64) -> Result<RunResult> {
    match simulation {
        Simulation::Mab(run) => run_mab(run, seed),
        Simulation::Bco(run) => run_bco(run, seed),
    }
}

/// Runs every (configuration, seed) pair in parallel. Results keep the input
/// order, and a failing run does not affect its siblings.
pub fn sweep(configs: &[SimulationConfig]) -> Vec<SweepEntry> {
    let jobs: Vec<(usize, u64)> = configs
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.seeds.iter().map(move |&s| (i, s)))
        .collect();
    let mut results: Vec<(usize, u64, Result<RunResult>)> = jobs
        .into_par_iter()
        .map(|(i, seed)| (i, seed, run_simulation(&configs[i].simulation, seed)))
        .collect();
    let mut entries: Vec<SweepEntry> = configs
        .iter()
        .map(|c| SweepEntry {
            name: c.simulation.name().to_string(),
            runs: Vec::with_capacity(c.seeds.len()),
            aggregate: None,
        })
        .collect();
    for (i, seed, result) in results.drain(..) {
        entries[i].runs.push((seed, result));
    }
    for entry in &mut entries {
        let ok: Vec<&RunResult> = entry.successes().collect();
        entry.aggregate = Aggregate::of(&ok);
    }
    entries
}
