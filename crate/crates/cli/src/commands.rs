use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use delayband::env::{periodic_delays, REFERENCE_PATTERN};
use delayband::harness::{aggregate_csv, file_stem, sweep, trace_csv, write_atomic, SimulationConfig, SweepEntry};
use delayband::plot::{render_svg, Series};
use delayband::{build_virtual_map, DelaySchedule, TieOrder};

use crate::config::{Experiment, Kind};
use crate::error::{CliError, CliResult};
use crate::traces::read_series;

pub const SUMMARY_HEADER: &str = "name,algorithm,seeds,failures,final_normalized_regret_mean,final_normalized_regret_std,total_delay,max_delay";

/// How much to print besides the summary table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verbosity {
    Quiet,
    Normal,
    Verbose,
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    write_atomic(path, contents.as_bytes()).map_err(CliError::from)
}

fn check_inputs(experiments: &[Experiment]) -> CliResult<()> {
    for exp in experiments {
        for file in exp.input_files() {
            if !file.is_file() {
                return Err(CliError::Io(format!("{}: no such input file", file.display())));
            }
        }
    }
    Ok(())
}

/// Quotes a CSV field when it contains a delimiter or quote.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn summary_row(entry: &SweepEntry) -> String {
    let first = entry.successes().next();
    let (mean, std) = entry
        .aggregate
        .as_ref()
        .map_or((String::new(), String::new()), |a| (a.final_mean().to_string(), a.final_std().to_string()));
    format!(
        "{},{},{},{},{mean},{std},{},{}",
        csv_field(&entry.name),
        first.map_or("", |r| r.algorithm),
        entry.runs.len(),
        entry.failures(),
        first.map_or(String::new(), |r| r.total_delay.to_string()),
        first.map_or(String::new(), |r| r.max_delay.to_string()),
    )
}

fn aggregate_series(entries: &[SweepEntry]) -> Vec<Series> {
    entries
        .iter()
        .filter_map(|e| {
            let a = e.aggregate.as_ref()?;
            Some(Series {
                label: e.name.clone(),
                points: a
                    .mean_normalized
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| ((i + 1) as f64, v))
                    .collect(),
            })
        })
        .collect()
}

/// Runs `configs`, writes every output file under `out`, and reports.
fn execute(
    title: &str,
    configs: &[SimulationConfig],
    out: &Path,
    per_seed_traces: bool,
    verbosity: Verbosity,
) -> CliResult<()> {
    let entries = sweep(configs);
    let mut summary = format!("{SUMMARY_HEADER}\n");
    let mut monitor_text = String::new();
    let mut run_failures = Vec::new();
    let mut monitor_failures = Vec::new();
    let any_monitors = configs.iter().any(|c| match &c.simulation {
        delayband::harness::Simulation::Mab(r) => r.monitors.any(),
        delayband::harness::Simulation::Bco(r) => r.monitors.any(),
    });
    for entry in &entries {
        let stem = file_stem(&entry.name);
        for (seed, result) in &entry.runs {
            match result {
                Ok(run) => {
                    if per_seed_traces {
                        write(&out.join(format!("{stem}_seed{seed}.csv")), &trace_csv(&run.regret))?;
                    }
                    if any_monitors {
                        let _ = writeln!(monitor_text, "== {} seed {seed} ==\n{}", entry.name, run.monitors);
                    }
                    if !run.monitors.passed() {
                        monitor_failures.push(format!("{} seed {seed}", entry.name));
                    }
                    if verbosity >= Verbosity::Verbose {
                        eprintln!(
                            "{} seed {seed}: Reg_T/T = {:.6}, D = {}, d_bar = {}, {:.3}s",
                            entry.name,
                            run.normalized_final(),
                            run.total_delay,
                            run.max_delay,
                            run.wall_time.as_secs_f64()
                        );
                    }
                }
                Err(e) => run_failures.push(format!("{} seed {seed}: {e}", entry.name)),
            }
        }
        if let Some(aggregate) = &entry.aggregate {
            write(&out.join(format!("{stem}_aggregate.csv")), &aggregate_csv(aggregate))?;
        }
        summary.push_str(&summary_row(entry));
        summary.push('\n');
    }
    write(&out.join("summary.csv"), &summary)?;
    if any_monitors {
        write(&out.join("monitors.txt"), &monitor_text)?;
    }
    let series = aggregate_series(&entries);
    if !series.is_empty() {
        let svg = render_svg(&series, title, "slot", "normalized regret")?;
        write(&out.join("regret.svg"), &svg)?;
    }

    if verbosity >= Verbosity::Normal {
        let width = entries.iter().map(|e| e.name.chars().count()).max().unwrap_or(0).max(3);
        println!("{:<width$} {:>6} {:>9} {:>14} {:>12}", "run", "seeds", "failures", "mean Reg_T/T", "std");
        for e in &entries {
            let (mean, std) = e
                .aggregate
                .as_ref()
                .map_or((f64::NAN, f64::NAN), |a| (a.final_mean(), a.final_std()));
            println!(
                "{:<width$} {:>6} {:>9} {:>14.6} {:>12.6}",
                e.name,
                e.runs.len(),
                e.failures(),
                mean,
                std
            );
        }
        println!("outputs written to {}", out.display());
    }
    for f in &run_failures {
        eprintln!("run failed: {f}");
    }
    for f in &monitor_failures {
        eprintln!("monitor check failed: {f} (see monitors.txt)");
    }
    if run_failures.is_empty() && monitor_failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "{} run(s) failed, {} run(s) with failed monitor checks",
            run_failures.len(),
            monitor_failures.len()
        )))
    }
}

/// `run-mab` / `run-bco`.
pub fn run(experiment: &Experiment, expected: Kind, out: &Path, verbosity: Verbosity) -> CliResult<()> {
    if experiment.kind != expected {
        return Err(CliError::Schema(format!(
            "run.kind is \"{}\" but run-{} was invoked",
            experiment.kind.as_str(),
            expected.as_str()
        )));
    }
    check_inputs(std::slice::from_ref(experiment))?;
    execute(&experiment.name, &experiment.configs, out, true, verbosity)
}

/// `sweep`: several configs, optionally repeated over horizons, aggregates only.
pub fn sweep_command(
    experiments: &[Experiment],
    horizons: &[usize],
    out: &Path,
    verbosity: Verbosity,
) -> CliResult<()> {
    check_inputs(experiments)?;
    let mut configs = Vec::new();
    for exp in experiments {
        // Several configs may reuse algorithm names, so qualify them.
        let exp = if experiments.len() > 1 {
            Experiment {
                configs: exp.qualified(),
                ..exp.clone()
            }
        } else {
            exp.clone()
        };
        if horizons.is_empty() {
            configs.extend(exp.configs.iter().cloned());
        } else {
            for &t in horizons {
                configs.extend(exp.with_horizon(t)?);
            }
        }
    }
    let mut stems: Vec<String> = configs.iter().map(|c| file_stem(c.simulation.name())).collect();
    stems.sort_unstable();
    if let Some(w) = stems.windows(2).find(|w| w[0] == w[1]) {
        return Err(CliError::Schema(format!("two runs would write the same files ({})", w[0])));
    }
    let title = experiments.iter().map(|e| e.name.as_str()).collect::<Vec<_>>().join(" + ");
    execute(&title, &configs, out, false, verbosity)
}

/// Where a `verify` schedule comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleSource {
    /// The reference periodic pattern, or a custom one.
    Pattern(Vec<usize>),
    File(PathBuf),
}

/// Returns the report text and whether every lag property held.
pub fn verify(source: &ScheduleSource, horizon: Option<usize>, tie: TieOrder) -> CliResult<(String, bool)> {
    let (schedule, description) = match source {
        ScheduleSource::Pattern(pattern) => {
            let t = horizon.ok_or_else(|| CliError::Schema("--T is required with a periodic schedule".into()))?;
            if t == 0 {
                return Err(CliError::Schema("--T: must be at least 1".into()));
            }
            let label = if pattern.as_slice() == REFERENCE_PATTERN { "reference pattern" } else { "pattern" };
            (periodic_delays(t, pattern)?, format!("{label} {pattern:?}, clamped at the horizon"))
        }
        ScheduleSource::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let schedule = DelaySchedule::from_text(&text, &path.display().to_string())?;
            if let Some(t) = horizon {
                if t != schedule.horizon() {
                    return Err(CliError::Schema(format!(
                        "--T {t} does not match the {} slots in {}",
                        schedule.horizon(),
                        path.display()
                    )));
                }
            }
            (schedule, path.display().to_string())
        }
    };
    let map = build_virtual_map(&schedule, tie)?;
    let report = map.verify(&schedule);
    let mut text = String::new();
    let _ = writeln!(text, "schedule: {description}");
    let _ = writeln!(text, "T = {}", schedule.horizon());
    let _ = writeln!(text, "D = {}", schedule.total());
    let _ = writeln!(text, "d_bar = {}", schedule.max_delay());
    let _ = writeln!(text, "T + D = {}", schedule.horizon() + schedule.total());
    let _ = writeln!(text, "slot lemma ({tie:?}):");
    let _ = writeln!(text, "{report}");
    let _ = writeln!(text, "result: {}", if report.passed() { "pass" } else { "FAIL" });
    Ok((text, report.passed()))
}

pub fn plot(inputs: &[PathBuf], labels: &[String], title: &str, out: &Path) -> CliResult<()> {
    if !labels.is_empty() && labels.len() != inputs.len() {
        return Err(CliError::Schema(format!(
            "--label given {} times for {} input files",
            labels.len(),
            inputs.len()
        )));
    }
    let series = inputs
        .iter()
        .enumerate()
        .map(|(i, path)| {
            let label = labels.get(i).cloned().unwrap_or_else(|| {
                path.file_stem().map_or("trace".into(), |s| s.to_string_lossy().into_owned())
            });
            read_series(path, label)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let svg = render_svg(&series, title, "slot", "normalized regret")
        .map_err(|e| CliError::Schema(format!("{e}: the trace files contain no rows")))?;
    write(out, &svg)
}
