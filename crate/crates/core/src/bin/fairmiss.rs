use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fairmiss::harness::{evaluate_request, run, summarize_file, write_outputs, ExperimentConfig};
use fairmiss::Error;

#[derive(Parser)]
#[command(
    name = "fairmiss",
    version,
    about = "Accuracy parity gap estimation from incomplete data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for repeats and sweep points.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write results.csv, summary.json and manifest.json.
    Run { config: PathBuf },
    /// Recompute summary.json from a results.csv.
    Summarize { results: PathBuf },
    /// Evaluate both bounds for a BoundInputs JSON document.
    Bounds { inputs: PathBuf },
    /// Check a config without running it.
    Validate { config: PathBuf },
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_config_error() { 2 } else { 3 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => exit_for(&e),
    }
}

fn read(path: &PathBuf) -> fairmiss::Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn load_config(path: &PathBuf) -> fairmiss::Result<ExperimentConfig> {
    ExperimentConfig::load(path).map_err(|e| match e {
        Error::Io { path, source } => {
            Error::Config(format!("cannot read {}: {source}", path.display()))
        }
        other => other,
    })
}

fn execute(cli: &Cli) -> fairmiss::Result<()> {
    match &cli.command {
        Command::Run { config } => {
            let mut cfg = load_config(config)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let dir = cli
                .output
                .clone()
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("results"));
            let workers = cli
                .workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let out = run(&cfg, workers)?;
            for path in write_outputs(&dir, &cfg, workers, &out)? {
                println!("{}", path.display());
            }
            if out.summary.failures > 0 {
                eprintln!("{} of {} rows failed", out.summary.failures, out.rows.len());
            }
        }
        Command::Summarize { results } => {
            let summary = summarize_file(results)?;
            let text = serde_json::to_string_pretty(&summary)?;
            match &cli.output {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
                        path: dir.clone(),
                        source: e,
                    })?;
                    let path = dir.join("summary.json");
                    std::fs::write(&path, text).map_err(|e| Error::Io {
                        path: path.clone(),
                        source: e,
                    })?;
                    println!("{}", path.display());
                }
                None => println!("{text}"),
            }
        }
        Command::Bounds { inputs } => {
            let report = evaluate_request(&read(inputs)?)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Validate { config } => {
            let cfg = load_config(config)?;
            println!(
                "ok: {} with {} point(s) x {} repeat(s)",
                cfg.experiment.id(),
                cfg.points().len(),
                cfg.repeats
            );
        }
    }
    Ok(())
}
