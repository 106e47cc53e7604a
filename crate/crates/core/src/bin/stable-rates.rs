use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use stable_rates::config::{parse_ladder, ConfigPatch, ExperimentConfig, ExperimentKind};
use stable_rates::experiments::{rate_fits_from_distances_csv, run, write_report, RunReport};
use stable_rates::functionals::WeightName;
use stable_rates::Error;

const EXIT_ASSERT: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "stable-rates", version, about = "Monte Carlo rates for stable limit theorems of Gaussian functionals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quadratic Ito functional of Brownian motion.
    QuadraticBm(RunArgs),
    /// Quadratic functional A_n of fractional Brownian motion.
    QuadraticFbm(RunArgs),
    /// Weighted quadratic variation.
    WeightedQv(RunArgs),
    /// Malliavin bound ingredients of the Brownian quadratic functional.
    BoundsProp36(RunArgs),
    /// Five-term bound of the weighted quadratic variation.
    WeightedBounds(RunArgs),
    /// Covariance sums of fBm increments.
    Lemma61(RunArgs),
    /// Multi-index enumeration and coefficient tables.
    Combinatorics(RunArgs),
    /// c_H and sigma_H over a Hurst grid.
    Constants(RunArgs),
    /// Log-log rate fits over an existing distances table.
    RateFit(RateFitArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    hurst: Option<f64>,
    /// Comma-separated ladder, e.g. 4,8,16.
    #[arg(long = "n")]
    n: Option<String>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<String>,
    /// Weight function: cos, one_plus_x2, one, zero, identity.
    #[arg(long)]
    weight: Option<String>,
    /// Bootstrap resamples for distance standard errors.
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// Wall-clock budget in seconds; remaining levels are skipped.
    #[arg(long)]
    time_budget: Option<f64>,
    /// Exit with status 1 when a check fails.
    #[arg(long)]
    assert: bool,
}

#[derive(Args)]
struct RateFitArgs {
    /// distances.csv produced by a previous run.
    input: PathBuf,
    /// Where to write the fits; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::QuadraticBm(a) => (ExperimentKind::QuadraticBm, a),
        Command::QuadraticFbm(a) => (ExperimentKind::QuadraticFbm, a),
        Command::WeightedQv(a) => (ExperimentKind::WeightedQv, a),
        Command::BoundsProp36(a) => (ExperimentKind::BoundsProp36, a),
        Command::WeightedBounds(a) => (ExperimentKind::WeightedBounds, a),
        Command::Lemma61(a) => (ExperimentKind::Lemma61, a),
        Command::Combinatorics(a) => (ExperimentKind::Combinatorics, a),
        Command::Constants(a) => (ExperimentKind::Constants, a),
        Command::RateFit(a) => return rate_fit(a),
    };
    let cfg = match resolve(kind, &args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let start = Instant::now();
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e @ Error::Config(_)) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let dir = PathBuf::from(&cfg.output_path);
    if let Err(e) = write_report(&dir, &cfg, &report, start.elapsed().as_secs_f64()) {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    summarize(&report, &dir);
    if args.assert && !report.all_pass() {
        return ExitCode::from(EXIT_ASSERT);
    }
    ExitCode::SUCCESS
}

fn resolve(kind: ExperimentKind, args: &RunArgs) -> stable_rates::Result<ExperimentConfig> {
    let file = args.config.as_deref().map(ConfigPatch::from_file).transpose()?;
    if let Some(f) = &file {
        if f.experiment.is_some_and(|e| e != kind) {
            return Err(Error::Config(format!(
                "experiment: file requests '{}' but the subcommand is '{}'",
                f.experiment.unwrap().as_str(),
                kind.as_str()
            )));
        }
    }
    let flags = ConfigPatch {
        experiment: Some(kind),
        hurst: args.hurst,
        n_ladder: args.n.as_deref().map(parse_ladder).transpose()?,
        replicas: args.replicas,
        grid_size: args.grid,
        seed: args.seed,
        weight: args.weight.as_deref().map(WeightName::parse).transpose()?,
        output_path: args.out.clone(),
        threads: args.threads,
        bootstrap: args.bootstrap,
        m: args.m,
        d: args.d,
        time_budget_secs: args.time_budget,
    };
    ExperimentConfig::resolve(file, flags)
}

fn summarize(report: &RunReport, dir: &std::path::Path) {
    for r in &report.rates {
        let status = match r.pass {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "-",
        };
        println!("{:<16} {:<24} slope {:>8.4}  r2 {:.3}  {status}", r.experiment, r.metric, r.slope, r.r2);
    }
    let failed = report.bounds.iter().filter(|b| b.pass == Some(false)).count();
    let checked = report.bounds.iter().filter(|b| b.pass.is_some()).count();
    if checked > 0 {
        println!("bound checks: {}/{} pass", checked - failed, checked);
    }
    if report.truncated {
        println!("time budget exhausted; results are partial");
    }
    println!("wrote {}", dir.display());
}

fn rate_fit(args: RateFitArgs) -> ExitCode {
    let text = match std::fs::read_to_string(&args.input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("configuration error: input: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let rows = match rate_fits_from_distances_csv(&text) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let report = RunReport { rates: rows, ..Default::default() };
    let body = match report.rates_csv() {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    match args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, body) {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
        }
        None => print!("{body}"),
    }
    ExitCode::SUCCESS
}
