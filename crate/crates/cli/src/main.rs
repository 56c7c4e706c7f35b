//! `delayband`: run bandit simulations under unknown feedback delays.
//!
//! Exit codes: 0 success, 1 a run or monitor check failed, 2 usage error,
//! 3 config file missing, 4 invalid config or input data, 5 I/O failure.

mod commands;
mod config;
mod error;
mod traces;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use delayband::env::REFERENCE_PATTERN;
use delayband::harness::MonitorSet;
use delayband::TieOrder;

use commands::{ScheduleSource, Verbosity};
use config::{load_config, Kind};
use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "delayband", version, about = "Bandit learning under unknown, adversarial feedback delays")]
struct Cli {
    /// Print per-run details to stderr.
    #[arg(short, long, global = true, conflicts_with = "quiet")]
    verbose: bool,
    /// Print nothing but errors.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a bandit (MAB) config: per-seed traces, aggregates, chart, summary.
    RunMab(RunArgs),
    /// Run a bandit convex optimization config.
    RunBco(RunArgs),
    /// Report T, D, d_bar and the virtual-slot lag properties of a delay schedule.
    Verify(VerifyArgs),
    /// Run one or more configs and write aggregates only.
    Sweep(SweepArgs),
    /// Render trace or aggregate CSVs as an SVG line chart.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Debug, Clone)]
struct SeedList(Vec<u64>);

/// `N` (seeds 0..N), `A..B`, or a comma list.
fn parse_seeds(s: &str) -> Result<SeedList, String> {
    let bad = || format!("invalid seed list \"{s}\" (use N, A..B or a,b,c)");
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        (a..b).collect()
    } else if s.contains(',') {
        s.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    } else {
        (0..s.trim().parse::<u64>().map_err(|_| bad())?).collect()
    };
    if seeds.is_empty() {
        Err(format!("seed list \"{s}\" is empty"))
    } else {
        Ok(SeedList(seeds))
    }
}

fn parse_monitors(s: &str) -> Result<MonitorSet, String> {
    MonitorSet::parse(s).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output directory (default: $DELAYBAND_OUT, else ./out).
    #[arg(long, env = "DELAYBAND_OUT", default_value = "out")]
    out: PathBuf,
    /// Override the config's seeds: N, A..B, or a,b,c.
    #[arg(long, value_parser = parse_seeds)]
    seeds: Option<SeedList>,
    /// Override the config's monitors: all, none, or a comma list.
    #[arg(long, value_parser = parse_monitors)]
    monitors: Option<MonitorSet>,
    /// Output format for traces.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Config files; repeat for several.
    #[arg(long, required = true)]
    config: Vec<PathBuf>,
    /// Rerun every config at each horizon, e.g. 500,1000,2000,4000.
    #[arg(long, value_delimiter = ',')]
    horizons: Vec<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TieArg {
    Ascending,
    Descending,
    Shuffled,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// `paper_pattern` for the periodic pattern 1,2,1,0,3,0,2, or a delay file.
    #[arg(long)]
    schedule: String,
    /// Horizon for periodic schedules.
    #[arg(long = "T", value_name = "N")]
    horizon: Option<usize>,
    /// Custom periodic pattern used instead of the reference one.
    #[arg(long, value_delimiter = ',')]
    pattern: Option<Vec<usize>>,
    /// Order of feedback arriving in the same slot.
    #[arg(long, value_enum, default_value_t = TieArg::Ascending)]
    tie: TieArg,
    #[arg(long, default_value_t = 0)]
    tie_seed: u64,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Trace or aggregate CSV files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Output SVG path.
    #[arg(long)]
    out: PathBuf,
    /// Legend labels, one per input (default: file stems).
    #[arg(long)]
    label: Vec<String>,
    #[arg(long, default_value = "normalized regret")]
    title: String,
}

fn load(path: &Path, output: &OutputArgs) -> CliResult<config::Experiment> {
    // CSV is the only format; the flag exists so scripts can pin it.
    let Format::Csv = output.format;
    let mut experiment = load_config(path)?;
    if let Some(SeedList(seeds)) = &output.seeds {
        experiment.set_seeds(seeds);
    }
    if let Some(monitors) = output.monitors {
        experiment.set_monitors(monitors);
    }
    Ok(experiment)
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let verbosity = if cli.quiet {
        Verbosity::Quiet
    } else if cli.verbose {
        Verbosity::Verbose
    } else {
        Verbosity::Normal
    };
    match cli.command {
        Command::RunMab(args) => {
            let exp = load(&args.config, &args.output)?;
            commands::run(&exp, Kind::Mab, &args.output.out, verbosity)
        }
        Command::RunBco(args) => {
            let exp = load(&args.config, &args.output)?;
            commands::run(&exp, Kind::Bco, &args.output.out, verbosity)
        }
        Command::Sweep(args) => {
            let experiments = args
                .config
                .iter()
                .map(|p| load(p, &args.output))
                .collect::<CliResult<Vec<_>>>()?;
            let horizons = args.horizons;
            if horizons.contains(&0) {
                return Err(CliError::Schema("--horizons: every horizon must be at least 1".into()));
            }
            commands::sweep_command(&experiments, &horizons, &args.output.out, verbosity)
        }
        Command::Verify(args) => {
            let source = if args.schedule == "paper_pattern" {
                ScheduleSource::Pattern(args.pattern.unwrap_or_else(|| REFERENCE_PATTERN.to_vec()))
            } else if args.pattern.is_some() {
                return Err(CliError::Schema("--pattern only applies to --schedule paper_pattern".into()));
            } else {
                ScheduleSource::File(PathBuf::from(&args.schedule))
            };
            let tie = match args.tie {
                TieArg::Ascending => TieOrder::OriginAscending,
                TieArg::Descending => TieOrder::OriginDescending,
                TieArg::Shuffled => TieOrder::Shuffled { seed: args.tie_seed },
            };
            let (report, passed) = commands::verify(&source, args.horizon, tie)?;
            if verbosity > Verbosity::Quiet || !passed {
                print!("{report}");
            }
            if passed {
                Ok(())
            } else {
                Err(CliError::Failed("slot lemma violated".into()))
            }
        }
        Command::Plot(args) => {
            commands::plot(&args.inputs, &args.label, &args.title, &args.out)?;
            if verbosity > Verbosity::Quiet {
                println!("wrote {}", args.out.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
