use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use seapartners::pipeline::{self, PipelineConfig};
use seapartners::{Error, Result};

/// Identify partner vessels from position logs.
#[derive(Parser)]
#[command(name = "seapartners", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the mixture on the training fleet and report on it.
    Fit(Common),
    /// Classify every fleet with a fitted model.
    Classify(Common),
    /// Rebuild networks and reports from an earlier run's tables.
    Report(Common),
    /// Generate a synthetic dataset from a scenario file.
    Synth(Common),
    /// Generate a scenario, run the pipeline on it and score the result.
    Benchmark(Common),
}

#[derive(Args)]
struct Common {
    /// Pipeline configuration, or scenario file for synth and benchmark.
    #[arg(short, long)]
    config: PathBuf,
    #[arg(short, long)]
    output_dir: Option<PathBuf>,
    /// error, warn, info, debug or trace.
    #[arg(short, long)]
    verbosity: Option<String>,
    #[arg(short, long)]
    seed: Option<u64>,
}

fn init_logging(level: &str) {
    env_logger::Builder::new()
        .parse_filters(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
}

fn load_pipeline(args: &Common) -> Result<PipelineConfig> {
    let mut config = PipelineConfig::load(&args.config)?;
    if let Some(dir) = &args.output_dir {
        config.output_dir = dir.clone();
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(v) = &args.verbosity {
        config.verbosity = v.clone();
    }
    config.validate()?;
    init_logging(&config.verbosity);
    Ok(config)
}

fn print_reports(summary: &pipeline::RunSummary) {
    for r in &summary.reports {
        let loyalty = r.network.loyalty_index.map_or("undefined".to_string(), |l| format!("{l:.2}"));
        println!(
            "{}: {} vessels, {} dyads, {} partner vessels, loyalty {}",
            r.fleet, r.vessels, r.dyads, r.network.nodes, loyalty
        );
    }
    println!("outputs in {}", summary.output_dir.display());
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(args) => {
            let summary = pipeline::run_fit(&load_pipeline(&args)?)?;
            print_reports(&summary);
        }
        Command::Classify(args) => {
            let summary = pipeline::run_classify(&load_pipeline(&args)?)?;
            print_reports(&summary);
        }
        Command::Report(args) => {
            let summary = pipeline::run_report(&load_pipeline(&args)?)?;
            print_reports(&summary);
        }
        Command::Synth(args) | Command::Benchmark(args) if args.output_dir.is_none() => {
            return Err(Error::config("synth and benchmark need --output-dir"));
        }
        Command::Synth(args) => {
            init_logging(args.verbosity.as_deref().unwrap_or("info"));
            let mut spec = pipeline::load_scenario(&args.config)?;
            if let Some(seed) = args.seed {
                spec.seed = seed;
            }
            let out = args.output_dir.expect("checked");
            let summary = pipeline::run_synth(&spec, &out)?;
            println!("{summary}");
            println!("dataset in {}", out.display());
        }
        Command::Benchmark(args) => {
            init_logging(args.verbosity.as_deref().unwrap_or("info"));
            let mut spec = pipeline::load_scenario(&args.config)?;
            if let Some(seed) = args.seed {
                spec.seed = seed;
            }
            let out = args.output_dir.expect("checked");
            let report = pipeline::run_benchmark(&spec, &out)?;
            print!("{}", report.to_toml());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
