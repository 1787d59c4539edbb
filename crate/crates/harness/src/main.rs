use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use strobo_harness::convergence::cmd_convergence;
use strobo_harness::trajectory::cmd_trajectory;
use strobo_harness::verify::cmd_verify;
use strobo_harness::{HarnessError, RunConfig, Study};

#[derive(Parser)]
#[command(name = "avg", about = "Stroboscopic averaging studies on the forced toggle switch")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Stroboscopic error of the averaged systems over a list of frequencies.
    Convergence {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides `out` of the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Long-time trajectories of the oscillatory and averaged systems, with timings.
    Trajectory {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Identity suite; exits with status 1 if any check fails.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(path: Option<PathBuf>, study: Study) -> Result<RunConfig, HarnessError> {
    match path {
        Some(p) => RunConfig::from_file(&p, study),
        None => Ok(RunConfig::defaults(study)),
    }
}

fn run(cli: Cli) -> Result<bool, HarnessError> {
    match cli.cmd {
        Cmd::Convergence { config, out } => {
            let cfg = load(config, Study::Convergence)?;
            let dir = out.unwrap_or_else(|| cfg.out.clone());
            let report = cmd_convergence(&cfg, &dir)?;
            print!("{}", report.summary());
            println!("wrote {}", dir.join("convergence.csv").display());
            Ok(true)
        }
        Cmd::Trajectory { config, out } => {
            let cfg = load(config, Study::Trajectory)?;
            let dir = out.unwrap_or_else(|| cfg.out.clone());
            let report = cmd_trajectory(&cfg, &dir)?;
            print!("{}", report.timing_text());
            println!("wrote trajectory_*.csv and timing.txt to {}", dir.display());
            Ok(true)
        }
        Cmd::Verify { config, seed } => {
            let mut cfg = load(config, Study::Verify)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let report = cmd_verify(&cfg)?;
            print!("{}", report.text());
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("avg: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
