//! `sachem` - run, resume and analyze artificial chemistry simulations.
//!
//! Data goes to stdout, progress and diagnostics to stderr. Exit codes:
//! 0 success, 1 usage/config/validation error, 2 runtime or I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sachem_core::output::{self, load_snapshot_with_config, out_dir_of_snapshot, run_to_dir};
use sachem_core::{
    enumerate_pool, init_population, load_config, pca_project_flat, reconstruction_error,
    ConfigError, Engine, EvalStream, MoleculeKind, RunError,
};

#[derive(Parser)]
#[command(name = "sachem", version, about = "Artificial chemistry of convolutional catalysts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Start a fresh run from a config file
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the number of steps
        #[arg(long)]
        steps: Option<u64>,
        /// Override the output directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = all cores); results do not depend on it
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Continue a run from one of its snapshots
    Resume {
        #[arg(long)]
        snapshot: PathBuf,
        /// Total step count to run to (default: the run's configured steps)
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Analyze a snapshot
    #[command(subcommand)]
    Analyze(Analyze),
    /// Reaction network tools
    #[command(subcommand)]
    Network(NetworkCmd),
    /// Brute-force reference computations for small populations
    #[command(subcommand)]
    Oracle(OracleCmd),
}

#[derive(Subcommand)]
enum Analyze {
    /// Write a PCA table for one kind
    Pca {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        kind: MoleculeKind,
        #[arg(long, default_value_t = 3)]
        dims: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the reconstruction error of one pathway
    Reconstruct {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        pathway: String,
        /// Originals to evaluate (default: the run's metrics.sample_size)
        #[arg(long)]
        sample: Option<usize>,
    },
}

#[derive(Subcommand)]
enum NetworkCmd {
    /// Check every rule's length arithmetic
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Dump the full reaction pool of the initial population
    Pool {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Largest per-kind count `oracle pool` will enumerate.
const ORACLE_MAX_COUNT: usize = 16;

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Config(c) => c.into(),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run {
            config,
            seed,
            steps,
            out,
            workers,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(steps) = steps {
                cfg.steps = steps;
            }
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            let out_dir = cfg.output_dir.clone();
            let until = cfg.steps;
            let engine = Engine::new(cfg, workers)?;
            eprintln!(
                "run: seed {} for {until} steps on {} workers -> {}",
                engine.config().seed,
                engine.workers(),
                out_dir.display()
            );
            let start = engine.initial_state().map_err(RunError::from)?;
            let end = run_to_dir(&engine, start, until, &out_dir)?;
            println!("{}", output::snapshot_path(&out_dir, end.step).display());
            Ok(())
        }
        Command::Resume {
            snapshot,
            steps,
            workers,
        } => {
            let (snap, cfg) = load_snapshot_with_config(&snapshot)?;
            let until = steps.unwrap_or(cfg.steps);
            if until < snap.state.step {
                return Err(Failure::Usage(format!(
                    "--steps {until} is before the snapshot step {}",
                    snap.state.step
                )));
            }
            let out_dir = out_dir_of_snapshot(&snapshot);
            let engine = Engine::new(cfg, workers)?;
            eprintln!(
                "resume: step {} -> {until} in {}",
                snap.state.step,
                out_dir.display()
            );
            let end = run_to_dir(&engine, snap.state, until, &out_dir)?;
            println!("{}", output::snapshot_path(&out_dir, end.step).display());
            Ok(())
        }
        Command::Analyze(Analyze::Pca {
            snapshot,
            kind,
            dims,
            out,
        }) => {
            let (snap, _) = load_snapshot_with_config(&snapshot)?;
            let pool = snap.state.population.pool(kind);
            let proj = pca_project_flat(pool.as_flat(), kind.len(), dims)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            output::write_pca_table(&out, &proj)
                .map_err(|e| Failure::Runtime(format!("{}: {e}", out.display())))?;
            let ratios: Vec<String> = proj.explained.iter().map(|v| v.to_string()).collect();
            println!("explained_variance={}", ratios.join(","));
            Ok(())
        }
        Command::Analyze(Analyze::Reconstruct {
            snapshot,
            pathway,
            sample,
        }) => {
            let (snap, cfg) = load_snapshot_with_config(&snapshot)?;
            let index = cfg
                .pathways
                .iter()
                .position(|p| p.name == pathway)
                .ok_or_else(|| {
                    let names: Vec<&str> = cfg.pathways.iter().map(|p| p.name.as_str()).collect();
                    Failure::Usage(format!(
                        "unknown pathway {pathway:?} (configured: {})",
                        names.join(", ")
                    ))
                })?;
            let sample = sample.unwrap_or(cfg.metrics.sample_size);
            let stream = EvalStream {
                seed: snap.state.seed,
                step: snap.state.step,
                index,
            };
            let re = reconstruction_error(
                &snap.state.population,
                &cfg.pathways[index],
                &cfg.network,
                sample,
                stream,
            )
            .map_err(|e| Failure::Runtime(e.to_string()))?;
            println!(
                "pathway={pathway} step={} sample={sample} re={re} catalyst_seed={}",
                snap.state.step, snap.state.seed
            );
            Ok(())
        }
        Command::Network(NetworkCmd::Validate { config }) => {
            let cfg = load_config(&config)?;
            println!("OK ({} rules)", cfg.network.len());
            Ok(())
        }
        Command::Oracle(OracleCmd::Pool { config }) => oracle_pool(&config),
    }
}

fn oracle_pool(config: &Path) -> Result<(), Failure> {
    let cfg = load_config(config)?;
    if cfg.counts.iter().any(|&n| n > ORACLE_MAX_COUNT) {
        return Err(Failure::Usage(format!(
            "oracle pool enumerates every pair; keep each population at most {ORACLE_MAX_COUNT}"
        )));
    }
    let pop = init_population(cfg.counts, cfg.seed).map_err(|e| Failure::Usage(e.to_string()))?;
    println!("target,rule,substrate,catalyst,product");
    for kind in MoleculeKind::ALL {
        for entry in enumerate_pool(&pop, kind, &cfg.network) {
            let product = sachem_core::sampler::react_entry(&pop, &cfg.network, entry)
                .map_err(|e| Failure::Runtime(e.to_string()))?;
            let values: Vec<String> = product.iter().map(|v| v.to_string()).collect();
            println!(
                "{},{},{},{},{}",
                kind,
                cfg.network.rules[entry.rule].id,
                entry.substrate,
                entry.catalyst,
                values.join(" ")
            );
        }
    }
    Ok(())
}
