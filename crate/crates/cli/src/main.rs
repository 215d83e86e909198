//! `anchorstream` command-line tool.

mod count;
mod error;
mod mean;
mod output;
mod plan;
mod records;
mod simulate;

use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use anchorstream::rng::fresh_seed;
use anchorstream::simlab::{CaseCountMode, DEFAULT_STRATA};
use anchorstream::{tabulate, BootstrapConfig, CellCounts, DesignContext, NonCaseTotal, PlanInputs, Series1Config, Series2Config};
use clap::{Args, Parser, Subcommand};

use crate::count::{count_report, CountOptions};
use crate::error::{CliError, Result};
use crate::mean::{mean_report, TargetArg};
use crate::output::OutputFormat;
use crate::records::{read_records, RecordFormat};
use crate::simulate::{simulate, SeriesConfig};

#[derive(Parser)]
#[command(name = "anchorstream", version, about = "Anchor-stream prevalence, case-count and mean estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Case-count estimates from cell counts or a record file.
    EstimateCount(EstimateCountArgs),
    /// Mean of a measurement with bootstrap intervals.
    EstimateMean(EstimateMeanArgs),
    /// Stream 2 sampling rate needed for a target precision.
    Plan(PlanArgs),
    /// Case-count simulation study.
    SimulateSeries1(SimulateArgs),
    /// Mean simulation study.
    SimulateSeries2(Series2Args),
    /// Runs the bundled worked example.
    #[command(name = "reproduce-appendix-c")]
    WorkedExample(WorkedExampleArgs),
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["n1", "input"])))]
struct EstimateCountArgs {
    #[arg(long, requires_all = ["n2", "n3", "n4", "n5", "n6", "n7"])]
    n1: Option<u64>,
    #[arg(long)]
    n2: Option<u64>,
    #[arg(long)]
    n3: Option<u64>,
    #[arg(long)]
    n4: Option<u64>,
    #[arg(long)]
    n5: Option<u64>,
    #[arg(long)]
    n6: Option<u64>,
    #[arg(long)]
    n7: Option<u64>,
    /// Record file (CSV or JSON).
    #[arg(long, conflicts_with = "n1", requires = "ntot")]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    input_format: Option<RecordFormat>,
    /// Population size; with inline cells it must match their sum.
    #[arg(long)]
    ntot: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Posterior draws for the credible intervals.
    #[arg(long, default_value_t = 10_000)]
    draws: usize,
    /// Do not raise lower limits to the number of identified cases.
    #[arg(long)]
    no_floor: bool,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
}

#[derive(Args)]
struct EstimateMeanArgs {
    /// Record file (CSV or JSON) with measurements.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    input_format: Option<RecordFormat>,
    #[arg(long)]
    ntot: u64,
    #[arg(long, value_enum, default_value_t = TargetArg::All)]
    target: TargetArg,
    /// Bootstrap replicates.
    #[arg(short = 'B', long = "bootstrap", default_value_t = 1_000)]
    bootstrap: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Estimate the non-case total as n_tot minus the case total.
    #[arg(long)]
    noncase_complement: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
}

#[derive(Args)]
struct PlanArgs {
    /// Assumed prevalence.
    #[arg(long)]
    p: f64,
    /// Assumed share of cases Stream 1 identifies.
    #[arg(long)]
    phi1: f64,
    #[arg(long)]
    ntot: u64,
    /// Target standard error of the prevalence estimate.
    #[arg(long)]
    sigma_p: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 500)]
    ntot: u64,
    #[arg(long, default_value_t = 0.1)]
    prev: f64,
    #[arg(long, default_value_t = 0.2)]
    psi: f64,
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Posterior draws per replicate.
    #[arg(long, default_value_t = 10_000)]
    draws: usize,
    /// Draw the case count from a binomial instead of fixing it.
    #[arg(long)]
    binomial_cases: bool,
    /// Worker threads; defaults to all cores.
    #[arg(long, env = "ANCHORSTREAM_THREADS")]
    threads: Option<usize>,
    /// Directory for CSV, JSON and manifest files.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
}

#[derive(Args)]
struct Series2Args {
    #[command(flatten)]
    common: SimulateArgs,
    /// Bootstrap replicates per simulated sample.
    #[arg(short = 'B', long = "bootstrap", default_value_t = 1_000)]
    bootstrap: usize,
}

#[derive(Args)]
struct WorkedExampleArgs {
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
}

/// Uses the given seed or draws one and reports it so the run can be
/// repeated.
fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let seed = fresh_seed();
        eprintln!("seed: {seed}");
        seed
    })
}

fn print_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn estimate_count(args: EstimateCountArgs) -> Result<()> {
    let (cells, ctx) = match (&args.input, args.n1) {
        (Some(path), _) => {
            let n_tot = args.ntot.ok_or_else(|| CliError::Input("--input needs --ntot".into()))?;
            tabulate(&read_records(path, args.input_format)?, n_tot)?
        }
        (None, Some(n1)) => {
            let need = |v: Option<u64>| v.ok_or_else(|| CliError::Input("all of --n1 .. --n7 are required".into()));
            let cells = CellCounts::new(n1, need(args.n2)?, need(args.n3)?, need(args.n4)?, need(args.n5)?, need(args.n6)?, need(args.n7)?);
            let ctx = match args.ntot {
                Some(n_tot) => DesignContext::from_cells_checked(&cells, n_tot)?,
                None => DesignContext::from_cells(&cells)?,
            };
            (cells, ctx)
        }
        (None, None) => return Err(CliError::Input("give either --n1 .. --n7 or --input".into())),
    };
    let opts = CountOptions { seed: resolve_seed(args.seed), draws: args.draws, floor: !args.no_floor, level: args.level };
    let report = count_report(&cells, &ctx, &opts)?;
    print_warnings(&report.warnings);
    count::write_report(&report, args.format, io::stdout().lock())
}

fn estimate_mean(args: EstimateMeanArgs) -> Result<()> {
    let records = read_records(&args.input, args.input_format)?;
    let cfg = BootstrapConfig {
        replicates: args.bootstrap,
        seed: resolve_seed(args.seed),
        level: args.level,
        noncase_total: if args.noncase_complement { NonCaseTotal::Complement } else { NonCaseTotal::Mirrored },
    };
    let report = mean_report(&records, args.ntot, args.target, &cfg)?;
    print_warnings(&report.warnings);
    mean::write_report(&report, args.format, io::stdout().lock())
}

fn run_plan(args: PlanArgs) -> Result<()> {
    let report = plan::plan(&PlanInputs { p: args.p, phi1: args.phi1, n_tot: args.ntot, sigma_p: args.sigma_p })?;
    plan::write_report(&report, args.format, io::stdout().lock())
}

fn series1_config(args: &SimulateArgs, seed: u64) -> Series1Config {
    Series1Config {
        n_tot: args.ntot,
        prevalence: args.prev,
        psi: args.psi,
        reps: args.reps,
        posterior_draws: args.draws,
        seed,
        case_mode: if args.binomial_cases { CaseCountMode::Binomial } else { CaseCountMode::Fixed },
        level: 0.95,
    }
}

fn run_simulation(args: &SimulateArgs, cfg: SeriesConfig, seed: u64) -> Result<()> {
    if args.threads == Some(0) {
        return Err(CliError::Input("--threads must be at least 1".into()));
    }
    simulate(&cfg, seed, args.threads, args.out_dir.as_deref(), args.format, io::stdout().lock())
}

fn worked_example(args: WorkedExampleArgs) -> Result<()> {
    let cells = CellCounts::new(6, 5, 100, 46, 33, 6, 304);
    let ctx = DesignContext::from_cells_checked(&cells, 500)?;
    let opts = CountOptions { seed: 1, draws: 10_000, floor: true, level: 0.95 };
    if args.format == OutputFormat::Text {
        println!("worked example: N_tot = 500, cells {cells}");
    }
    let report = count_report(&cells, &ctx, &opts)?;
    print_warnings(&report.warnings);
    count::write_report(&report, args.format, io::stdout().lock())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::EstimateCount(args) => estimate_count(args),
        Command::EstimateMean(args) => estimate_mean(args),
        Command::Plan(args) => run_plan(args),
        Command::SimulateSeries1(args) => {
            let seed = resolve_seed(args.seed);
            run_simulation(&args, SeriesConfig::One(series1_config(&args, seed)), seed)
        }
        Command::SimulateSeries2(args) => {
            let seed = resolve_seed(args.common.seed);
            let cfg = Series2Config {
                base: series1_config(&args.common, seed),
                bootstrap_b: args.bootstrap,
                strata: DEFAULT_STRATA,
            };
            run_simulation(&args.common, SeriesConfig::Two(cfg), seed)
        }
        Command::WorkedExample(args) => worked_example(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
