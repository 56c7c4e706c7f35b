//! Run configuration files.
//!
//! A config is TOML with four kinds of sections:
//!
//! ```toml
//! [run]          # kind = "mab" | "bco", seeds, tie_order, monitors
//! [environment]  # type = synthetic | random | ratings | random-quadratic | regression
//! [delay]        # type = zero | periodic | random | file
//! [set]          # BCO only: type = ball | box
//! [algorithm.dexp3]   # one table per algorithm to run
//! ```
//!
//! Every section rejects unknown keys, and keys that do not apply to the
//! chosen `type` are reported by name.

use std::path::{Path, PathBuf};

use delayband::bco::FeasibleSet;
use delayband::env::REFERENCE_PATTERN;
use delayband::harness::{
    BcoAlgorithm, BcoEnvSpec, BcoRun, DbgdTuning, DelaySpec, Dexp3Tuning, MabAlgorithm, MabEnvSpec, MabRun,
    MonitorSet, Rate, Simulation, SimulationConfig,
};
use delayband::TieOrder;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Mab,
    Bco,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Mab => "mab",
            Kind::Bco => "bco",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum TieName {
    Ascending,
    Descending,
    Shuffled,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    name: Option<String>,
    kind: Kind,
    seeds: Option<Seeds>,
    tie_order: Option<TieName>,
    tie_seed: Option<u64>,
    monitors: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvironmentSection {
    #[serde(rename = "type")]
    kind: String,
    horizon: Option<usize>,
    arms: Option<usize>,
    change_slot: Option<usize>,
    path: Option<PathBuf>,
    dim: Option<usize>,
    curvature: Option<[f64; 2]>,
    b_max: Option<f64>,
    standardize: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DelaySection {
    #[serde(rename = "type")]
    kind: Option<String>,
    pattern: Option<Vec<usize>>,
    max_delay: Option<usize>,
    path: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SetSection {
    #[serde(rename = "type")]
    kind: String,
    radius: Option<f64>,
    lower: Option<Vec<f64>>,
    upper: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Dexp3Section {
    name: Option<String>,
    eta: Option<f64>,
    eta_scale: Option<f64>,
    delta1: Option<f64>,
    delta2: Option<f64>,
    safeguards: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RateSection {
    name: Option<String>,
    eta: Option<f64>,
    eta_scale: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DbgdSection {
    name: Option<String>,
    eta: Option<f64>,
    delta: Option<f64>,
    eta_scale: Option<f64>,
    delta_scale: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GradientSection {
    name: Option<String>,
    eta: Option<f64>,
    eta_scale: Option<f64>,
    shrink: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FkmSection {
    name: Option<String>,
    eta: Option<f64>,
    delta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct AlgorithmSection {
    exp3: Option<RateSection>,
    bold: Option<RateSection>,
    dexp3: Option<Dexp3Section>,
    ogd: Option<GradientSection>,
    solid: Option<GradientSection>,
    k_plus_one_bgd: Option<DbgdSection>,
    dbgd: Option<DbgdSection>,
    fkm: Option<FkmSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    run: RunSection,
    environment: EnvironmentSection,
    #[serde(default)]
    delay: DelaySection,
    set: Option<SetSection>,
    #[serde(default)]
    algorithm: AlgorithmSection,
}

/// A validated config: one simulation per algorithm table.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub name: String,
    pub kind: Kind,
    pub configs: Vec<SimulationConfig>,
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

/// Errors if any listed key is set; used for keys a `type` does not take.
fn reject(section: &str, kind: &str, keys: &[(&str, bool)]) -> CliResult<()> {
    match keys.iter().find(|(_, set)| *set) {
        Some((key, _)) => Err(schema(format!("{section}.{key}: not used when type = \"{kind}\""))),
        None => Ok(()),
    }
}

fn require<T>(section: &str, key: &str, kind: &str, value: Option<T>) -> CliResult<T> {
    value.ok_or_else(|| schema(format!("{section}.{key}: required when type = \"{kind}\"")))
}

fn positive(field: &str, value: usize) -> CliResult<usize> {
    if value == 0 {
        Err(schema(format!("{field}: must be at least 1")))
    } else {
        Ok(value)
    }
}

fn resolve_path(base: &Path, path: PathBuf) -> PathBuf {
    if path.is_absolute() {
        path
    } else {
        base.join(path)
    }
}

fn rate(field: &str, eta: Option<f64>, eta_scale: Option<f64>) -> CliResult<Rate> {
    match (eta, eta_scale) {
        (Some(_), Some(_)) => Err(schema(format!("{field}: set either eta or eta_scale, not both"))),
        (Some(eta), None) => Ok(Rate::Fixed(eta)),
        (None, scale) => Ok(Rate::Auto {
            scale: scale.unwrap_or(1.0),
        }),
    }
}

fn dbgd_tuning(field: &str, s: &DbgdSection) -> CliResult<DbgdTuning> {
    match (s.eta, s.delta, s.eta_scale, s.delta_scale) {
        (Some(eta), Some(delta), None, None) => Ok(DbgdTuning::Fixed { eta, delta }),
        (None, None, eta_scale, delta_scale) => Ok(DbgdTuning::Auto {
            eta_scale: eta_scale.unwrap_or(1.0),
            delta_scale: delta_scale.unwrap_or(1.0),
        }),
        _ => Err(schema(format!(
            "{field}: give both eta and delta, or only the *_scale keys"
        ))),
    }
}

fn dexp3_tuning(s: &Dexp3Section) -> CliResult<Dexp3Tuning> {
    let field = "algorithm.dexp3";
    if s.safeguards == Some(false) {
        if s.delta1.is_some() || s.delta2.is_some() {
            return Err(schema(format!("{field}: delta1/delta2 are not used when safeguards = false")));
        }
        return Ok(Dexp3Tuning::Unsafeguarded {
            eta: rate(field, s.eta, s.eta_scale)?,
        });
    }
    match (s.eta, s.delta1, s.delta2, s.eta_scale) {
        (Some(eta), Some(delta1), Some(delta2), None) => Ok(Dexp3Tuning::Fixed { eta, delta1, delta2 }),
        (None, None, None, scale) => Ok(Dexp3Tuning::Auto {
            eta_scale: scale.unwrap_or(1.0),
        }),
        _ => Err(schema(format!(
            "{field}: give eta, delta1 and delta2 together, or only eta_scale"
        ))),
    }
}

fn seeds_list(seeds: Option<Seeds>) -> CliResult<Vec<u64>> {
    match seeds {
        None => Ok(vec![0]),
        Some(Seeds::Count(0)) => Err(schema("run.seeds: need at least one seed")),
        Some(Seeds::Count(n)) => Ok((0..n).collect()),
        Some(Seeds::List(list)) if list.is_empty() => Err(schema("run.seeds: need at least one seed")),
        Some(Seeds::List(list)) => Ok(list),
    }
}

fn tie_order(name: Option<TieName>, seed: Option<u64>) -> CliResult<TieOrder> {
    match name {
        Some(TieName::Shuffled) => Ok(TieOrder::Shuffled {
            seed: seed.unwrap_or(0),
        }),
        _ if seed.is_some() => Err(schema("run.tie_seed: only used when tie_order = \"shuffled\"")),
        None | Some(TieName::Ascending) => Ok(TieOrder::OriginAscending),
        Some(TieName::Descending) => Ok(TieOrder::OriginDescending),
    }
}

fn delay_spec(d: DelaySection, base: &Path) -> CliResult<DelaySpec> {
    let kind = d.kind.as_deref().unwrap_or("zero");
    let s = "delay";
    match kind {
        "zero" => {
            reject(s, kind, &[("pattern", d.pattern.is_some()), ("max_delay", d.max_delay.is_some()), ("path", d.path.is_some())])?;
            Ok(DelaySpec::Zero)
        }
        "periodic" => {
            reject(s, kind, &[("max_delay", d.max_delay.is_some()), ("path", d.path.is_some())])?;
            let pattern = d.pattern.unwrap_or_else(|| REFERENCE_PATTERN.to_vec());
            if pattern.is_empty() {
                return Err(schema("delay.pattern: must not be empty"));
            }
            Ok(DelaySpec::Periodic(pattern))
        }
        "random" => {
            reject(s, kind, &[("pattern", d.pattern.is_some()), ("path", d.path.is_some())])?;
            Ok(DelaySpec::Random {
                max_delay: require(s, "max_delay", kind, d.max_delay)?,
            })
        }
        "file" => {
            reject(s, kind, &[("pattern", d.pattern.is_some()), ("max_delay", d.max_delay.is_some())])?;
            Ok(DelaySpec::File(resolve_path(base, require(s, "path", kind, d.path)?)))
        }
        other => Err(schema(format!(
            "delay.type: unknown type \"{other}\" (expected zero, periodic, random or file)"
        ))),
    }
}

fn mab_environment(e: EnvironmentSection, base: &Path) -> CliResult<MabEnvSpec> {
    let s = "environment";
    let kind = e.kind.as_str();
    let bco_only = [
        ("dim", e.dim.is_some()),
        ("curvature", e.curvature.is_some()),
        ("b_max", e.b_max.is_some()),
        ("standardize", e.standardize.is_some()),
    ];
    reject(s, kind, &bco_only)?;
    match kind {
        "synthetic" => {
            reject(s, kind, &[("path", e.path.is_some())])?;
            Ok(MabEnvSpec::Synthetic {
                horizon: positive("environment.horizon", require(s, "horizon", kind, e.horizon)?)?,
                arms: positive("environment.arms", e.arms.unwrap_or(5))?,
                change_slot: e.change_slot.unwrap_or(500),
            })
        }
        "random" => {
            reject(s, kind, &[("path", e.path.is_some()), ("change_slot", e.change_slot.is_some())])?;
            Ok(MabEnvSpec::Random {
                horizon: positive("environment.horizon", require(s, "horizon", kind, e.horizon)?)?,
                arms: positive("environment.arms", require(s, "arms", kind, e.arms)?)?,
            })
        }
        "ratings" => {
            reject(s, kind, &[("horizon", e.horizon.is_some()), ("change_slot", e.change_slot.is_some())])?;
            Ok(MabEnvSpec::Ratings {
                path: resolve_path(base, require(s, "path", kind, e.path)?),
                arms: positive("environment.arms", require(s, "arms", kind, e.arms)?)?,
            })
        }
        other => Err(schema(format!(
            "environment.type: \"{other}\" is not a bandit environment (expected synthetic, random or ratings)"
        ))),
    }
}

fn bco_environment(e: EnvironmentSection, base: &Path) -> CliResult<BcoEnvSpec> {
    let s = "environment";
    let kind = e.kind.as_str();
    reject(s, kind, &[("arms", e.arms.is_some()), ("change_slot", e.change_slot.is_some())])?;
    match kind {
        "synthetic" => {
            reject(
                s,
                kind,
                &[
                    ("path", e.path.is_some()),
                    ("dim", e.dim.is_some()),
                    ("curvature", e.curvature.is_some()),
                    ("b_max", e.b_max.is_some()),
                    ("standardize", e.standardize.is_some()),
                ],
            )?;
            Ok(BcoEnvSpec::Synthetic {
                horizon: positive("environment.horizon", require(s, "horizon", kind, e.horizon)?)?,
            })
        }
        "random-quadratic" => {
            reject(s, kind, &[("path", e.path.is_some()), ("standardize", e.standardize.is_some())])?;
            let [lo, hi] = e.curvature.unwrap_or([0.5, 4.0]);
            Ok(BcoEnvSpec::RandomQuadratic {
                horizon: positive("environment.horizon", require(s, "horizon", kind, e.horizon)?)?,
                dim: positive("environment.dim", require(s, "dim", kind, e.dim)?)?,
                curvature: (lo, hi),
                b_max: e.b_max.unwrap_or(2.0),
            })
        }
        "regression" => {
            reject(
                s,
                kind,
                &[
                    ("horizon", e.horizon.is_some()),
                    ("dim", e.dim.is_some()),
                    ("curvature", e.curvature.is_some()),
                    ("b_max", e.b_max.is_some()),
                ],
            )?;
            Ok(BcoEnvSpec::Regression {
                path: resolve_path(base, require(s, "path", kind, e.path)?),
                standardize: e.standardize.unwrap_or(true),
            })
        }
        other => Err(schema(format!(
            "environment.type: \"{other}\" is not a BCO environment (expected synthetic, random-quadratic or regression)"
        ))),
    }
}

fn feasible_set(set: Option<SetSection>) -> CliResult<FeasibleSet> {
    let Some(set) = set else {
        return Ok(FeasibleSet::ball(1.0).expect("unit ball"));
    };
    let kind = set.kind.as_str();
    let result = match kind {
        "ball" => {
            reject("set", kind, &[("lower", set.lower.is_some()), ("upper", set.upper.is_some())])?;
            FeasibleSet::ball(set.radius.unwrap_or(1.0))
        }
        "box" => {
            reject("set", kind, &[("radius", set.radius.is_some())])?;
            FeasibleSet::boxed(
                require("set", "lower", kind, set.lower)?,
                require("set", "upper", kind, set.upper)?,
            )
        }
        other => return Err(schema(format!("set.type: unknown type \"{other}\" (expected ball or box)"))),
    };
    result.map_err(|e| schema(format!("set: {e}")))
}

/// Parses and validates config text. Relative paths resolve against `base`.
pub fn parse_config(text: &str, base: &Path, default_name: &str) -> CliResult<Experiment> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| schema(e.to_string()))?;
    let kind = file.run.kind;
    let name = file.run.name.clone().unwrap_or_else(|| default_name.to_string());
    let seeds = seeds_list(file.run.seeds)?;
    let tie = tie_order(file.run.tie_order, file.run.tie_seed)?;
    let monitors = match &file.run.monitors {
        Some(list) => MonitorSet::parse(list).map_err(|e| schema(format!("run.monitors: {e}")))?,
        None => MonitorSet::none(),
    };
    let delays = delay_spec(file.delay, base)?;
    let algorithms = file.algorithm;
    let wrong_kind = |present: &[(&str, bool)]| -> CliResult<()> {
        match present.iter().find(|(_, set)| *set) {
            Some((alg, _)) => Err(schema(format!(
                "algorithm.{alg}: not available when run.kind = \"{}\"",
                kind.as_str()
            ))),
            None => Ok(()),
        }
    };
    let mut simulations = Vec::new();
    match kind {
        Kind::Mab => {
            if file.set.is_some() {
                return Err(schema("set: only used when run.kind = \"bco\""));
            }
            wrong_kind(&[
                ("ogd", algorithms.ogd.is_some()),
                ("solid", algorithms.solid.is_some()),
                ("k-plus-one-bgd", algorithms.k_plus_one_bgd.is_some()),
                ("dbgd", algorithms.dbgd.is_some()),
                ("fkm", algorithms.fkm.is_some()),
            ])?;
            let environment = mab_environment(file.environment, base)?;
            let mut add = |label: Option<String>, algorithm: MabAlgorithm| {
                simulations.push(Simulation::Mab(MabRun {
                    name: label.unwrap_or_else(|| algorithm.label().to_string()),
                    algorithm,
                    environment: environment.clone(),
                    delays: delays.clone(),
                    tie_order: tie,
                    monitors,
                }));
            };
            if let Some(s) = algorithms.exp3 {
                add(s.name, MabAlgorithm::Exp3(rate("algorithm.exp3", s.eta, s.eta_scale)?));
            }
            if let Some(s) = algorithms.bold {
                add(s.name, MabAlgorithm::Bold(rate("algorithm.bold", s.eta, s.eta_scale)?));
            }
            if let Some(s) = algorithms.dexp3 {
                let tuning = dexp3_tuning(&s)?;
                add(s.name, MabAlgorithm::Dexp3(tuning));
            }
        }
        Kind::Bco => {
            wrong_kind(&[
                ("exp3", algorithms.exp3.is_some()),
                ("bold", algorithms.bold.is_some()),
                ("dexp3", algorithms.dexp3.is_some()),
            ])?;
            let environment = bco_environment(file.environment, base)?;
            let set = feasible_set(file.set)?;
            let mut add = |label: Option<String>, algorithm: BcoAlgorithm| {
                simulations.push(Simulation::Bco(BcoRun {
                    name: label.unwrap_or_else(|| algorithm.label().to_string()),
                    algorithm,
                    environment: environment.clone(),
                    set: set.clone(),
                    delays: delays.clone(),
                    tie_order: tie,
                    monitors,
                }));
            };
            if let Some(s) = algorithms.ogd {
                add(
                    s.name,
                    BcoAlgorithm::Ogd {
                        eta: rate("algorithm.ogd", s.eta, s.eta_scale)?,
                        shrink: s.shrink.unwrap_or(0.0),
                    },
                );
            }
            if let Some(s) = algorithms.solid {
                add(
                    s.name,
                    BcoAlgorithm::Solid {
                        eta: rate("algorithm.solid", s.eta, s.eta_scale)?,
                        shrink: s.shrink.unwrap_or(0.0),
                    },
                );
            }
            if let Some(s) = algorithms.k_plus_one_bgd {
                let tuning = dbgd_tuning("algorithm.k-plus-one-bgd", &s)?;
                add(s.name, BcoAlgorithm::KPlusOneBgd(tuning));
            }
            if let Some(s) = algorithms.dbgd {
                let tuning = dbgd_tuning("algorithm.dbgd", &s)?;
                add(s.name, BcoAlgorithm::Dbgd(tuning));
            }
            if let Some(s) = algorithms.fkm {
                add(
                    s.name,
                    BcoAlgorithm::Fkm {
                        eta: s.eta,
                        delta: s.delta,
                    },
                );
            }
        }
    }
    if simulations.is_empty() {
        return Err(schema("algorithm: at least one [algorithm.<name>] table is required"));
    }
    let mut names: Vec<&str> = simulations.iter().map(Simulation::name).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(schema(format!("algorithm: duplicate run name \"{}\"", w[0])));
    }
    Ok(Experiment {
        name,
        kind,
        configs: simulations
            .into_iter()
            .map(|simulation| SimulationConfig {
                simulation,
                seeds: seeds.clone(),
            })
            .collect(),
    })
}

/// Reads a config file; a missing file is reported separately from a bad one.
pub fn load_config(path: &Path) -> CliResult<Experiment> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::MissingConfig(path.to_path_buf()),
        _ => CliError::Io(format!("{}: {e}", path.display())),
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let stem = path.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
    parse_config(&text, base, &stem).map_err(|e| match e {
        CliError::Schema(msg) => CliError::Schema(format!("{}: {msg}", path.display())),
        other => other,
    })
}

impl Experiment {
    pub fn set_seeds(&mut self, seeds: &[u64]) {
        for c in &mut self.configs {
            c.seeds = seeds.to_vec();
        }
    }

    pub fn set_monitors(&mut self, monitors: MonitorSet) {
        for c in &mut self.configs {
            match &mut c.simulation {
                Simulation::Mab(r) => r.monitors = monitors,
                Simulation::Bco(r) => r.monitors = monitors,
            }
        }
    }

    /// Input files the runs will read, for an up-front existence check.
    pub fn input_files(&self) -> Vec<PathBuf> {
        let mut files = Vec::new();
        for c in &self.configs {
            let (env_path, delays) = match &c.simulation {
                Simulation::Mab(r) => match &r.environment {
                    MabEnvSpec::Ratings { path, .. } => (Some(path), &r.delays),
                    _ => (None, &r.delays),
                },
                Simulation::Bco(r) => match &r.environment {
                    BcoEnvSpec::Regression { path, .. } => (Some(path), &r.delays),
                    _ => (None, &r.delays),
                },
            };
            files.extend(env_path.cloned());
            if let DelaySpec::File(p) = delays {
                files.push(p.clone());
            }
        }
        files.sort();
        files.dedup();
        files
    }

    /// Prefixes every run name with the experiment name.
    pub fn qualified(&self) -> Vec<SimulationConfig> {
        self.configs
            .iter()
            .map(|c| {
                let mut c = c.clone();
                let name = format!("{}/{}", self.name, c.simulation.name());
                match &mut c.simulation {
                    Simulation::Mab(r) => r.name = name,
                    Simulation::Bco(r) => r.name = name,
                }
                c
            })
            .collect()
    }

    /// The same runs at horizon `horizon`, renamed with a `T=` suffix.
    /// Dataset environments have a fixed horizon and are rejected.
    pub fn with_horizon(&self, horizon: usize) -> CliResult<Vec<SimulationConfig>> {
        let fixed = || schema("sweep --horizons: dataset environments have a fixed horizon");
        self.configs
            .iter()
            .map(|c| {
                let mut c = c.clone();
                match &mut c.simulation {
                    Simulation::Mab(r) => {
                        match &mut r.environment {
                            MabEnvSpec::Synthetic { horizon: h, .. } | MabEnvSpec::Random { horizon: h, .. } => {
                                *h = horizon
                            }
                            _ => return Err(fixed()),
                        }
                        r.name = format!("{} T={horizon}", r.name);
                    }
                    Simulation::Bco(r) => {
                        match &mut r.environment {
                            BcoEnvSpec::Synthetic { horizon: h } | BcoEnvSpec::RandomQuadratic { horizon: h, .. } => {
                                *h = horizon
                            }
                            _ => return Err(fixed()),
                        }
                        r.name = format!("{} T={horizon}", r.name);
                    }
                }
                Ok(c)
            })
            .collect()
    }
}
