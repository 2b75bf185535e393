use std::path::PathBuf;
use std::process::ExitCode;

use chrono::{NaiveDate, TimeZone, Utc};
use clap::{Args, Parser, Subcommand};
use pvcomb::eval::Pair;
use pvcomb_cli::{CliError, RunConfig};

#[derive(Parser)]
#[command(name = "pvcomb", version, about = "Multi-resolution PV forecasting with weighted combinations")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Comma-separated pairs such as `1h-1d,5min-1h`.
    #[arg(long, global = true, value_delimiter = ',')]
    pairs: Option<Vec<Pair>>,
    /// Comma-separated house ids.
    #[arg(long, global = true, value_delimiter = ',')]
    houses: Option<Vec<String>>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate inputs and write cleaned copies.
    Ingest,
    /// Run the full evaluation.
    Run,
    /// Re-aggregate tables from cached per-house results.
    Report,
    /// Draw SVG charts from the report tables.
    Plot,
    /// Write a synthetic cohort and a matching config.
    Synth {
        #[arg(long, default_value_t = 2)]
        n_houses: usize,
        #[arg(long, default_value_t = 122)]
        days: usize,
        #[arg(long, default_value = "2021-03-01")]
        start: NaiveDate,
        /// Directory to write into.
        dir: PathBuf,
    },
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(pairs) = &common.pairs {
        cfg.pairs = pairs.clone();
    }
    if let Some(houses) = &common.houses {
        cfg.select_houses(houses)?;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if common.jobs.is_some() {
        cfg.jobs = common.jobs;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn output_dir(common: &Common) -> Result<PathBuf, CliError> {
    match &common.out {
        Some(out) => Ok(out.clone()),
        None => load(common).map(|c| c.output_dir),
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest => {
            let dir = pvcomb_cli::ingest(&load(&cli.common)?)?;
            println!("{}", dir.display());
        }
        Command::Run => {
            let cfg = load(&cli.common)?;
            let report = pvcomb_cli::run(&cfg)?;
            for f in &report.failures {
                eprintln!("warning: {} {}: {}", f.house_id, f.pair, f.error);
            }
            println!("{}", cfg.output_dir.display());
        }
        Command::Report => {
            pvcomb_cli::report(&output_dir(&cli.common)?)?;
        }
        Command::Plot => {
            for p in pvcomb_cli::plot::plot(&output_dir(&cli.common)?)? {
                println!("{}", p.display());
            }
        }
        Command::Synth {
            n_houses,
            days,
            start,
            dir,
        } => {
            let start = Utc.from_utc_datetime(&start.and_hms_opt(0, 0, 0).expect("midnight"));
            let seed = cli.common.seed.unwrap_or(0);
            let path = pvcomb_cli::synth::write_cohort(&dir, n_houses, start, days, seed)?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let summary = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{summary}");
            ExitCode::FAILURE
        }
    }
}
