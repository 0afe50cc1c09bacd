use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hashcount::harness::validate::{run_suite, Check};
use hashcount::harness::{cmd_run, cmd_sweep, ExperimentConfig, SweepAxis};
use hashcount::Error;

#[derive(Parser)]
#[command(name = "hashcount", version, about = "Count-based exploration experiments with hashed state counts")]
struct Cli {
    /// Master seed; overrides `master_seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for CSV and summary files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads for seeds and sweep cells (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed of a config.
    Run { config: PathBuf },
    /// Run a config once per value of one axis.
    Sweep {
        config: PathBuf,
        /// One of k, beta, backend, count_mode.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Run the lsh, sketch or gradcheck self-checks, or all of them.
    Validate { suite: String },
}

// Like `println!`, but a closed pipe (e.g. `| head`) is not a panic.
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    Ok(cfg)
}

fn use_color() -> bool {
    std::io::stdout().is_terminal() && std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty())
}

fn print_checks(checks: &[Check]) {
    let color = use_color();
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in checks {
        let status = match (c.passed, color) {
            (true, true) => "\x1b[32mPASS\x1b[0m",
            (false, true) => "\x1b[31mFAIL\x1b[0m",
            (true, false) => "PASS",
            (false, false) => "FAIL",
        };
        say!("{status}  {:<9} {:<width$}  {}", c.suite, c.name, c.detail);
    }
}

fn execute(cli: Cli) -> Result<bool, Failure> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::Config("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    match cli.command {
        Command::Run { config } => {
            let cfg = load_config(&config, cli.seed)?;
            let summary = cmd_run(&cfg, &cli.out_dir)?;
            say!("{}: {}", cfg.output, summary.line());
            say!("wrote {}", cli.out_dir.join(format!("{}.csv", cfg.output)).display());
            Ok(true)
        }
        Command::Sweep { config, axis, values } => {
            let cfg = load_config(&config, cli.seed)?;
            let axis = SweepAxis::parse(&axis)?;
            let cells = cmd_sweep(&cfg, axis, &values, &cli.out_dir)?;
            say!("{:<14} {:>12} {:>14} {:>12}", axis.name(), "beta", "final mean", "final std");
            let mut ok = true;
            for c in &cells {
                match &c.outcome {
                    Ok(s) => say!(
                        "{:<14} {:>12.6} {:>14.6} {:>12.6}",
                        c.value, c.config.beta, s.final_mean, s.final_std
                    ),
                    Err(e) => {
                        ok = false;
                        say!("{:<14} failed: {e}", c.value);
                    }
                }
            }
            say!(
                "wrote {}",
                cli.out_dir
                    .join(format!("{}.sweep-{}.csv", cfg.output, axis.name()))
                    .display()
            );
            Ok(ok)
        }
        Command::Validate { suite } => {
            let checks = run_suite(&suite, cli.seed.unwrap_or(0))?;
            print_checks(&checks);
            let failed = checks.iter().filter(|c| !c.passed).count();
            say!("{} checks, {failed} failed", checks.len());
            Ok(failed == 0)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
