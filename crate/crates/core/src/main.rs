use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;

use eegprint::biometric::evaluate;
use eegprint::edf::catalog_dataset;
use eegprint::pipeline::{
    populate_cache, report_distributions, run_sweep, write_results, PipelineError, SweepConfig,
};
use eegprint::selftest;
use eegprint::stats::mean_std;
use eegprint::{Band, CellKey, Condition, Method, WindowGrid};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_SELFTEST: u8 = 3;

/// EEG phase-connectivity fingerprinting.
#[derive(Parser, Debug)]
#[command(name = "eegprint", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List usable recordings and exclusions under a dataset root.
    Scan { root: PathBuf },
    /// Compute and cache feature tables for every configured cell.
    Features {
        root: PathBuf,
        #[command(flatten)]
        opts: SweepOpts,
        /// Restrict to one band (high_beta, gamma).
        #[arg(long)]
        band: Option<Band>,
        /// Restrict to one method (PLI, PLV).
        #[arg(long)]
        method: Option<Method>,
        /// Restrict to one window length in seconds.
        #[arg(long)]
        window: Option<f64>,
        /// Restrict to one condition (EO, EC).
        #[arg(long)]
        condition: Option<Condition>,
    },
    /// Run the full sweep and write results.csv.
    Sweep {
        root: PathBuf,
        #[command(flatten)]
        opts: SweepOpts,
        /// Directory receiving results.csv.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Dump the genuine and impostor scores of one cell, e.g. EO/gamma/PLV/10.5.
    Report {
        cell: CellKey,
        #[arg(long)]
        root: Option<PathBuf>,
        #[command(flatten)]
        opts: SweepOpts,
        /// Score dump path (default: <output_dir>/scores_<cell>.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the dataset-free property checks.
    Selftest,
}

#[derive(Args, Debug, Default)]
struct SweepOpts {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Feature cache directory (overrides the config and EEGPRINT_CACHE_DIR).
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Impostor pair cap, or `exhaustive`.
    #[arg(long)]
    impostor_cap: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Usage(String),
    Data(String),
    Selftest,
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        if e.is_data_error() {
            Failure::Data(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn load_config(opts: &SweepOpts, root: Option<PathBuf>) -> Result<SweepConfig, Failure> {
    let mut cfg = match &opts.config {
        Some(path) => SweepConfig::from_file(path)?,
        None => SweepConfig::default(),
    }
    .with_env_cache();
    if let Some(root) = root {
        cfg.dataset_root = root;
    }
    if let Some(dir) = &opts.cache_dir {
        cfg.cache_dir = Some(dir.clone());
    }
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(cap) = &opts.impostor_cap {
        cfg.impostor_cap = if cap.eq_ignore_ascii_case("exhaustive") {
            None
        } else {
            match cap.parse::<usize>() {
                Ok(n) if n > 0 => Some(n),
                _ => return Err(Failure::Usage(format!("bad --impostor-cap {cap:?}"))),
            }
        };
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Scan { root } => {
            let catalog = catalog_dataset(&root).map_err(|e| Failure::Data(e.to_string()))?;
            for e in &catalog.entries {
                println!("{}\t{}\t{}", e.subject_id, e.condition, e.path.display());
            }
            for x in &catalog.excluded {
                println!("excluded\t{}\t{}", x.path.display(), x.reason);
            }
            eprintln!(
                "{} recordings from {} subjects, {} excluded",
                catalog.entries.len(),
                catalog.subjects().len(),
                catalog.excluded.len()
            );
        }
        Command::Features {
            root,
            opts,
            band,
            method,
            window,
            condition,
        } => {
            let mut cfg = load_config(&opts, Some(root))?;
            if let Some(b) = band {
                cfg.bands = vec![b];
            }
            if let Some(m) = method {
                cfg.methods = vec![m];
            }
            if let Some(c) = condition {
                cfg.conditions = vec![c];
            }
            if let Some(w) = window {
                cfg.window_grid =
                    WindowGrid::new(vec![w]).map_err(|e| Failure::Usage(e.to_string()))?;
            }
            let served = populate_cache(&cfg)?;
            println!(
                "{served} recordings cached under {}",
                cfg.cache_dir
                    .as_deref()
                    .unwrap_or(std::path::Path::new(""))
                    .display()
            );
        }
        Command::Sweep {
            root,
            opts,
            output_dir,
        } => {
            let mut cfg = load_config(&opts, Some(root))?;
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            let start = Instant::now();
            let rows = run_sweep(&cfg)?;
            let path = write_results(&rows, &cfg.output_dir)?;
            info!("sweep finished in {:.1} s", start.elapsed().as_secs_f64());
            println!("{} rows written to {}", rows.len(), path.display());
        }
        Command::Report {
            cell,
            root,
            opts,
            out,
        } => {
            let cfg = load_config(&opts, root)?;
            let out = out.unwrap_or_else(|| {
                cfg.output_dir
                    .join(format!("scores_{}.csv", cell.to_string().replace('/', "_")))
            });
            let scores = report_distributions(&cfg, cell, &out)?;
            let perf = evaluate(&scores).map_err(|e| Failure::Data(e.to_string()))?;
            let (gm, gs) = mean_std(&scores.genuine);
            let (im, is) = mean_std(&scores.impostor);
            println!("cell      {cell}");
            println!(
                "genuine   n={} mean={gm:.6} std={gs:.6}",
                scores.genuine.len()
            );
            println!(
                "impostor  n={} mean={im:.6} std={is:.6} ({})",
                scores.impostor.len(),
                scores.impostor_sampling
            );
            println!("EER       {:.6}", perf.eer);
            println!("AUC       {:.6} (1-AUC {:.6})", perf.auc, 1.0 - perf.auc);
            println!("scores    {}", out.display());
        }
        Command::Selftest => {
            let checks = selftest::run_all();
            for c in &checks {
                println!("{c}");
            }
            if checks.iter().any(|c| !c.passed) {
                return Err(Failure::Selftest);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DATA)
        }
        Err(Failure::Selftest) => ExitCode::from(EXIT_SELFTEST),
    }
}
