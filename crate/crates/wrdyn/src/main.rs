use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::LevelFilter;
use wrdyn::commands::{cmd_check, cmd_run};
use wrdyn::spec::Overrides;
use wrdyn::sweep::{cmd_sweep, SweepOptions};

#[derive(Parser, Debug)]
#[command(name = "wrdyn", version, about = "Weighted residual dynamics: run, check and sweep")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct Tol {
    /// Relative rank threshold
    #[arg(long, global = true)]
    rank_tol: Option<f64>,
    /// Convergence tolerance
    #[arg(long, global = true)]
    conv_tol: Option<f64>,
    /// Iteration cap
    #[arg(long, global = true)]
    max_iter: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Iterate one instance and write its trace and report
    Run {
        spec: PathBuf,
        #[command(flatten)]
        tol: Tol,
    },
    /// Iterate one instance and audit every identity
    Check {
        spec: PathBuf,
        /// Corrupt one trace record before auditing
        #[arg(long)]
        inject_fault: bool,
        #[command(flatten)]
        tol: Tol,
    },
    /// Run a batch over a random ensemble
    Sweep {
        spec: PathBuf,
        /// Output directory
        #[arg(long, default_value = "sweep-out")]
        out: PathBuf,
        /// Worker threads (0 = all cores)
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Write 0 for wall_time so outputs are reproducible
        #[arg(long)]
        no_timing: bool,
        #[command(flatten)]
        tol: Tol,
    },
}

impl From<Tol> for Overrides {
    fn from(t: Tol) -> Self {
        Overrides { rank_tol: t.rank_tol, conv_tol: t.conv_tol, max_iter: t.max_iter }
    }
}

fn init_logging() {
    let level = match std::env::var("WRDYN_LOG").as_deref() {
        Ok("quiet") => LevelFilter::Off,
        Ok("info") => LevelFilter::Info,
        Ok("debug") => LevelFilter::Debug,
        _ => LevelFilter::Warn,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { spec, tol } => cmd_run(&spec, &tol.into()),
        Command::Check { spec, inject_fault, tol } => cmd_check(&spec, &tol.into(), inject_fault),
        Command::Sweep { spec, out, workers, no_timing, tol } => {
            cmd_sweep(&spec, &tol.into(), &SweepOptions { out, workers, no_timing })
        }
    };
    ExitCode::from(code as u8)
}
