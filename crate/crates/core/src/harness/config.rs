use std::path::PathBuf;
use std::sync::Arc;

use rand::SeedableRng;
use rand::RngCore;
use rand_chacha::ChaCha8Rng;

use super::learner::{BcoLearner, MabLearner};
use super::monitor::MonitorSet;
use crate::bco::{DbgdParams, DbgdState, FeasibleSet, Fkm, ProjectedGradient};
use crate::delay::DelaySchedule;
use crate::env::{
    load_ratings_dataset, load_regression_dataset, periodic_delays, random_delays, random_mab_losses,
    random_quadratic, synthetic_bco_functions, synthetic_mab_losses, BcoEnvironment, MabEnvironment,
};
use crate::error::{Error, Result};
use crate::feedback::TieOrder;
use crate::mab::{Bold, Dexp3, Dexp3Params, Exp3};

/// A step size given outright or derived from the run's `T`, `D` and `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    Auto { scale: f64 },
    Fixed(f64),
}

impl Default for Rate {
    fn default() -> Self {
        Rate::Auto { scale: 1.0 }
    }
}

impl Rate {
    fn resolve(self, auto: f64) -> f64 {
        match self {
            Rate::Auto { scale } => scale * auto,
            Rate::Fixed(eta) => eta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dexp3Tuning {
    /// The `√(K d̄ (T+D))` tuning with `η` scaled by `eta_scale`.
    Auto { eta_scale: f64 },
    Fixed { eta: f64, delta1: f64, delta2: f64 },
    /// Cap and floor disabled.
    Unsafeguarded { eta: Rate },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MabAlgorithm {
    Dexp3(Dexp3Tuning),
    Exp3(Rate),
    Bold(Rate),
}

impl MabAlgorithm {
    pub fn label(&self) -> &'static str {
        match self {
            MabAlgorithm::Dexp3(_) => "DEXP3",
            MabAlgorithm::Exp3(_) => "EXP3",
            MabAlgorithm::Bold(_) => "BOLD",
        }
    }

    /// Whether the run uses the configured delays; EXP3 is the non-delayed
    /// reference and always sees immediate feedback.
    pub fn is_delayed(&self) -> bool {
        !matches!(self, MabAlgorithm::Exp3(_))
    }

    /// Builds the learner for `K` arms against `schedule`.
    ///
    /// Auto rates: EXP3 uses `√((1+ln K)/(K T))`, BOLD `√((1+ln K)/(K (T+D)))`.
    /// DEXP3's tuning needs `d̄ > 0`; a zero-delay schedule is tuned as if
    /// `d̄ = 1`.
    pub fn build(&self, arms: usize, schedule: &DelaySchedule) -> Result<Box<dyn MabLearner + Send>> {
        let horizon = schedule.horizon();
        let k = arms as f64;
        let span = (horizon + schedule.total()) as f64;
        let exp3_rate = ((1.0 + k.ln()) / (k * horizon as f64)).sqrt();
        let bold_rate = ((1.0 + k.ln()) / (k * span)).sqrt();
        let positive = |eta: f64| {
            if eta.is_finite() && eta > 0.0 {
                Ok(eta)
            } else {
                Err(Error::param("eta", format!("{eta} is not a positive finite rate")))
            }
        };
        Ok(match *self {
            MabAlgorithm::Dexp3(tuning) => {
                let params = match tuning {
                    Dexp3Tuning::Auto { eta_scale } => Dexp3Params::theorem1_scaled(
                        horizon,
                        schedule.total(),
                        schedule.max_delay().max(1),
                        arms,
                        eta_scale,
                    )?,
                    Dexp3Tuning::Fixed { eta, delta1, delta2 } => Dexp3Params::new(eta, delta1, delta2, arms)?,
                    Dexp3Tuning::Unsafeguarded { eta } => {
                        Dexp3Params::without_safeguards(positive(eta.resolve(bold_rate))?, arms)
                    }
                };
                Box::new(Dexp3::new(params))
            }
            MabAlgorithm::Exp3(rate) => Box::new(Exp3::new(arms, positive(rate.resolve(exp3_rate))?)),
            MabAlgorithm::Bold(rate) => Box::new(Bold::new(arms, positive(rate.resolve(bold_rate))?)),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DbgdTuning {
    /// `δ = min{0.5, c_δ/(T+D)}`, `η = c_η/√(K(T+D))`.
    Auto { eta_scale: f64, delta_scale: f64 },
    Fixed { eta: f64, delta: f64 },
}

impl Default for DbgdTuning {
    fn default() -> Self {
        DbgdTuning::Auto {
            eta_scale: 1.0,
            delta_scale: 1.0,
        }
    }
}

impl DbgdTuning {
    fn params(self, horizon: usize, total_delay: usize, dim: usize) -> Result<DbgdParams> {
        match self {
            DbgdTuning::Auto { eta_scale, delta_scale } => {
                DbgdParams::theorem2_scaled(horizon, total_delay, dim, eta_scale, delta_scale)
            }
            DbgdTuning::Fixed { eta, delta } => DbgdParams::new(eta, delta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BcoAlgorithm {
    /// Unknown delays, `(K+1)`-point estimates.
    Dbgd(DbgdTuning),
    /// Same learner with immediate feedback.
    KPlusOneBgd(DbgdTuning),
    /// Exact gradients applied on arrival. `shrink` selects the set `X_shrink`.
    Solid { eta: Rate, shrink: f64 },
    /// Exact gradients with immediate feedback.
    Ogd { eta: Rate, shrink: f64 },
    /// One-point estimates with immediate feedback. Auto values:
    /// `δ = min{0.5, T^{-1/4}}`, `η = δ/(K√T)`.
    Fkm { eta: Option<f64>, delta: Option<f64> },
}

impl BcoAlgorithm {
    pub fn label(&self) -> &'static str {
        match self {
            BcoAlgorithm::Dbgd(_) => "DBGD",
            BcoAlgorithm::KPlusOneBgd(_) => "(K+1)-BGD",
            BcoAlgorithm::Solid { .. } => "SOLID",
            BcoAlgorithm::Ogd { .. } => "OGD",
            BcoAlgorithm::Fkm { .. } => "FKM",
        }
    }

    pub fn is_delayed(&self) -> bool {
        matches!(self, BcoAlgorithm::Dbgd(_) | BcoAlgorithm::Solid { .. })
    }

    /// Builds the learner over `set` (the unshrunk `X`) against `schedule`.
    ///
    /// Auto rates for the exact-gradient learners follow the same
    /// `1/√(K(T+D))` form as DBGD, with `D = 0` for OGD.
    pub fn build(&self, dim: usize, set: &FeasibleSet, schedule: &DelaySchedule) -> Result<Box<dyn BcoLearner + Send>> {
        let horizon = schedule.horizon();
        let total = schedule.total();
        let auto_rate = (1.0 / (dim as f64 * (horizon + total) as f64)).sqrt();
        Ok(match *self {
            BcoAlgorithm::Dbgd(tuning) | BcoAlgorithm::KPlusOneBgd(tuning) => {
                Box::new(DbgdState::new(tuning.params(horizon, total, dim)?, set, dim)?)
            }
            BcoAlgorithm::Solid { eta, shrink } | BcoAlgorithm::Ogd { eta, shrink } => {
                Box::new(ProjectedGradient::new(eta.resolve(auto_rate), set.shrunk(shrink)?, dim)?)
            }
            BcoAlgorithm::Fkm { eta, delta } => {
                let t = horizon as f64;
                let delta = delta.unwrap_or_else(|| t.powf(-0.25).min(0.5));
                let eta = eta.unwrap_or(delta / (dim as f64 * t.sqrt()));
                Box::new(Fkm::new(eta, delta, set, dim)?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MabEnvSpec {
    Synthetic { horizon: usize, arms: usize, change_slot: usize },
    /// Uniform random losses drawn from the run's environment stream.
    Random { horizon: usize, arms: usize },
    Ratings { path: PathBuf, arms: usize },
    Matrix(Arc<MabEnvironment>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum BcoEnvSpec {
    Synthetic { horizon: usize },
    RandomQuadratic { horizon: usize, dim: usize, curvature: (f64, f64), b_max: f64 },
    Regression { path: PathBuf, standardize: bool },
    Fixed(Arc<BcoEnvironment>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DelaySpec {
    Zero,
    Periodic(Vec<usize>),
    /// Uniform on `0..=max_delay` from the run's delay stream.
    Random { max_delay: usize },
    File(PathBuf),
    Fixed(DelaySchedule),
}

impl DelaySpec {
    pub fn resolve(&self, horizon: usize, streams: &SeedStreams) -> Result<DelaySchedule> {
        let schedule = match self {
            DelaySpec::Zero => DelaySchedule::zero(horizon),
            DelaySpec::Periodic(pattern) => periodic_delays(horizon, pattern)?,
            DelaySpec::Random { max_delay } => random_delays(horizon, *max_delay, &mut streams.rng(Stream::Delays)),
            DelaySpec::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                    path: path.display().to_string(),
                    reason: e.to_string(),
                })?;
                DelaySchedule::from_text(&text, &path.display().to_string())?
            }
            DelaySpec::Fixed(schedule) => schedule.clone(),
        };
        if schedule.horizon() != horizon {
            return Err(Error::ConfigMismatch(format!(
                "delay schedule covers {} slots but the environment has {horizon}",
                schedule.horizon()
            )));
        }
        Ok(schedule)
    }
}

impl MabEnvSpec {
    pub fn resolve(&self, streams: &SeedStreams) -> Result<Arc<MabEnvironment>> {
        Ok(match self {
            MabEnvSpec::Synthetic {
                horizon,
                arms,
                change_slot,
            } => Arc::new(synthetic_mab_losses(*horizon, *arms, *change_slot)?),
            MabEnvSpec::Random { horizon, arms } => Arc::new(random_mab_losses(
                *horizon,
                *arms,
                &mut streams.rng(Stream::Environment),
            )?),
            MabEnvSpec::Ratings { path, arms } => {
                Arc::new(load_ratings_dataset(path, *arms, streams.seed(Stream::MissingFill))?)
            }
            MabEnvSpec::Matrix(env) => Arc::clone(env),
        })
    }
}

impl BcoEnvSpec {
    pub fn resolve(&self, streams: &SeedStreams) -> Result<Arc<BcoEnvironment>> {
        Ok(match self {
            BcoEnvSpec::Synthetic { horizon } => Arc::new(synthetic_bco_functions(*horizon)?),
            BcoEnvSpec::RandomQuadratic {
                horizon,
                dim,
                curvature,
                b_max,
            } => Arc::new(random_quadratic(
                *horizon,
                *dim,
                *curvature,
                *b_max,
                &mut streams.rng(Stream::Environment),
            )?),
            BcoEnvSpec::Regression { path, standardize } => Arc::new(load_regression_dataset(path, *standardize)?),
            BcoEnvSpec::Fixed(env) => Arc::clone(env),
        })
    }
}

/// Independent random streams derived from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    ArmSampling = 0,
    MissingFill = 1,
    Environment = 2,
    Delays = 3,
    Directions = 4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStreams {
    master: u64,
}

impl SeedStreams {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn rng(&self, stream: Stream) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(stream as u64);
        rng
    }

    /// A 64-bit seed for consumers that seed their own generator.
    pub fn seed(&self, stream: Stream) -> u64 {
        self.rng(stream).next_u64()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MabRun {
    pub name: String,
    pub algorithm: MabAlgorithm,
    pub environment: MabEnvSpec,
    pub delays: DelaySpec,
    pub tie_order: TieOrder,
    pub monitors: MonitorSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BcoRun {
    pub name: String,
    pub algorithm: BcoAlgorithm,
    pub environment: BcoEnvSpec,
    /// The unshrunk feasible set `X`; also the comparator's domain.
    pub set: FeasibleSet,
    pub delays: DelaySpec,
    pub tie_order: TieOrder,
    pub monitors: MonitorSet,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Simulation {
    Mab(MabRun),
    Bco(BcoRun),
}

impl Simulation {
    pub fn name(&self) -> &str {
        match self {
            Simulation::Mab(r) => &r.name,
            Simulation::Bco(r) => &r.name,
        }
    }
}

/// One experiment: a run description repeated over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub simulation: Simulation,
    pub seeds: Vec<u64>,
}
