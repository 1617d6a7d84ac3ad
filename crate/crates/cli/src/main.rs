mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::{ensure_exists, Command, Run};
use config::Config;

const THREADS_ENV: &str = "SMOOTHERLAB_THREADS";

/// Smoother experiments: fits, parameter sweeps and effective-parameter studies.
#[derive(Debug, Parser)]
#[command(name = "smootherlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (JSON).
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Override a config value, e.g. `--set shared.learning_rate=0.3`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Run a single seed instead of the configured list.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (also read from SMOOTHERLAB_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Use 10000 training points.
    #[arg(long, global = true)]
    full_scale: bool,

    /// Also write SVG charts.
    #[arg(long, global = true)]
    svg: bool,
}

fn threads(cli: &Cli) -> Result<Option<usize>, String> {
    if let Some(t) = cli.threads {
        return Ok(Some(t));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("{THREADS_ENV}={v} is not a thread count")),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> smootherlab::Result<String> {
    let path = cli.config.clone().ok_or_else(|| {
        smootherlab::Error::Argument("--config <FILE> is required".into())
    })?;
    ensure_exists(&path)?;
    let mut cfg = Config::load(&path, &cli.overrides)?;
    if cli.full_scale {
        cfg.set_full_scale();
    }
    if let Some(o) = cli.out {
        cfg.output_dir = o;
    }
    if let Some(s) = cli.seed {
        cfg.seeds = vec![s];
    }
    Run { cfg, svg: cli.svg }.execute(cli.command)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match threads(&cli) {
        Ok(Some(t)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
                eprintln!("error: thread pool: {e}");
                return ExitCode::from(1);
            }
        }
        Ok(None) => {}
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
