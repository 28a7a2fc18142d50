//! `maxiset` command-line front end.
//!
//! Exit status: 0 on success, 2 on a validation error, 3 on a runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use maxiset::function_zoo::ZOO_KEYS;
use maxiset::kernels::KERNEL_KEYS;
use maxiset::report::{emit_report, RunManifest};
use maxiset::{maxiset_verdict, mc_risk, Error, RunConfig};

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "MAXISET_OUT_DIR";
const FALLBACK_OUT_DIR: &str = "maxiset-out";

#[derive(Parser)]
#[command(name = "maxiset", version, about = "Sup-norm kernel estimation and maxiset experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every experiment of a config and write CSV, JSON and manifest files.
    Run {
        config: PathBuf,
        /// Output directory; overrides the config and the environment.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Also write a log-log SVG plot per experiment.
        #[arg(long)]
        svg: bool,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Kernel registry.
    Kernels {
        #[command(subcommand)]
        action: ListAction,
    },
    /// Test-function registry.
    Zoo {
        #[command(subcommand)]
        action: ListAction,
    },
}

#[derive(Subcommand)]
enum ListAction {
    List,
}

enum Failure {
    Validation(Error),
    Runtime(Error),
}

impl Failure {
    fn report(self) -> ExitCode {
        match self {
            Failure::Validation(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
            Failure::Runtime(e) => {
                eprintln!("error: {e}");
                ExitCode::from(3)
            }
        }
    }
}

fn load(path: &PathBuf, seed: Option<u64>) -> Result<(RunConfig, Vec<maxiset::ExperimentConfig>), Failure> {
    let mut cfg = RunConfig::load(path).map_err(Failure::Validation)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let experiments = cfg.experiments().map_err(Failure::Validation)?;
    Ok((cfg, experiments))
}

fn run(
    config: PathBuf,
    out: Option<PathBuf>,
    seed: Option<u64>,
    threads: Option<usize>,
    svg: bool,
) -> Result<(), Failure> {
    let (cfg, experiments) = load(&config, seed)?;
    if let Some(t) = threads {
        if t == 0 {
            return Err(Failure::Validation(Error::Validation("--threads must be >= 1".into())));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Runtime(Error::Io(e.to_string())))?;
    }
    let dir = out
        .or_else(|| cfg.outputs.dir.clone().map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(FALLBACK_OUT_DIR));
    std::fs::create_dir_all(&dir)
        .map_err(|e| Failure::Runtime(Error::Io(format!("cannot create {}: {e}", dir.display()))))?;

    let mut manifest = RunManifest::new(cfg.hash());
    let outcome = experiments.iter().try_for_each(|exp| {
        let report = mc_risk(exp)?;
        let channels = if report.rows.len() >= 4 {
            Some(maxiset_verdict(exp, &report)?)
        } else {
            None
        };
        let paths = emit_report(&report, channels.as_ref(), &dir, svg)?;
        let verdict = channels
            .as_ref()
            .map(|c| c.verdict)
            .or(report.verdict)
            .map_or("n/a".to_string(), |v| v.to_string());
        match report.fitted_exponent {
            Some(fit) => println!(
                "{}: fitted exponent {fit:.4} (target {:.4}), verdict {verdict} -> {}",
                exp.name,
                report.target_exponent,
                paths.csv.display()
            ),
            None => println!("{}: {} rows -> {}", exp.name, report.rows.len(), paths.csv.display()),
        }
        manifest.experiments.push(paths);
        Ok::<_, Error>(())
    });
    match outcome {
        Ok(()) => {
            manifest.status = "ok".into();
            manifest.write(&dir).map_err(Failure::Runtime)?;
            Ok(())
        }
        Err(e) => {
            manifest.status = "error".into();
            manifest.message = Some(e.to_string());
            let _ = manifest.write(&dir);
            Err(match e {
                Error::Validation(_) | Error::UnknownName { .. } => Failure::Validation(e),
                other => Failure::Runtime(other),
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            seed,
            threads,
            svg,
        } => run(config, out, seed, threads, svg),
        Command::Validate { config } => load(&config, None).map(|(cfg, ex)| {
            println!("ok: {} experiment(s), config hash {}", ex.len(), cfg.hash());
        }),
        Command::Kernels { action: ListAction::List } => {
            KERNEL_KEYS.iter().for_each(|k| println!("{k}"));
            Ok(())
        }
        Command::Zoo { action: ListAction::List } => {
            ZOO_KEYS.iter().for_each(|k| println!("{k}"));
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
