//! `pinnbench`: run, sweep, and inspect seeded PINN sampling experiments.
//!
//! Exit codes: 0 on success, 1 when every attempt of some seed diverged,
//! 2 on configuration or input errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pinnbench::bench::{export_snapshots, gendata, run_experiment, run_sweep, ExperimentConfig, SweepSpec};
use pinnbench::evaluation::aggregate;
use pinnbench::pde::{ProblemKind, ProblemParams};

#[derive(Parser, Debug)]
#[command(name = "pinnbench", version, about = "Seeded PINN collocation-sampling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train every seed of an experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Run this single seed instead of the config's seed list.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Runs executed at the same time.
        #[arg(long, env = "PINNBENCH_JOBS", default_value_t = 1)]
        jobs: usize,
    },
    /// Run one experiment per value of a swept config field.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, env = "PINNBENCH_JOBS", default_value_t = 1)]
        jobs: usize,
    },
    /// Write the reference or observation data of a problem.
    Gendata {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Observation rows (navier_stokes only; default 7000).
        #[arg(long)]
        rows: Option<usize>,
    },
    /// Export one collocation-set CSV per resampling event of a finished run.
    Snapshots {
        #[arg(long)]
        run: PathBuf,
    },
}

enum Failure {
    Diverged(String),
    Config(String),
}

impl From<pinnbench::Error> for Failure {
    fn from(e: pinnbench::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, seed, out, jobs } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seeds = vec![s];
            }
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            let outcome = run_experiment(&cfg, jobs)?;
            for row in outcome.final_rows() {
                println!("{}\t{}\tl2={:.6e}\t{:.1}s", row.run_id, row.status, row.l2, row.wall_time_s);
            }
            if let Ok(s) = aggregate(outcome.final_rows()) {
                println!("mean l2 {:.6e} sd {:.3e} over {} runs", s.mean, s.sd, s.count);
            }
            println!("results in {}", outcome.output_dir.display());
            if !outcome.exhausted.is_empty() {
                return Err(Failure::Diverged(format!("every attempt diverged for seeds {:?}", outcome.exhausted)));
            }
        }
        Command::Sweep { spec, jobs } => {
            let spec = SweepSpec::load(&spec)?;
            let cells = run_sweep(&spec, jobs)?;
            let mut exhausted = Vec::new();
            for c in &cells {
                match aggregate(c.outcome.final_rows()) {
                    Ok(s) => {
                        println!("{} = {}\tmean l2 {:.6e} sd {:.3e} n {}", spec.path, c.label, s.mean, s.sd, s.count)
                    }
                    Err(_) => println!("{} = {}\tno successful runs", spec.path, c.label),
                }
                exhausted.extend(c.outcome.exhausted.iter().map(|s| format!("{}={} seed {s}", spec.path, c.label)));
            }
            println!("results in {}", spec.root()?.display());
            if !exhausted.is_empty() {
                return Err(Failure::Diverged(format!("every attempt diverged for {}", exhausted.join(", "))));
            }
        }
        Command::Gendata { problem, out, seed, rows } => {
            let kind: ProblemKind = problem.parse()?;
            gendata(kind, ProblemParams::default(), &out, seed, rows)?;
            println!("wrote {}", out.display());
        }
        Command::Snapshots { run } => {
            for e in export_snapshots(&run)? {
                let how = if e.rerun { "rerun" } else { "stored" };
                println!("{}\t{} events ({how})", e.run_id, e.files.len());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Diverged(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
