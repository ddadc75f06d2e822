use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cpc_cli::experiment::{
    self, load_columns, load_config, load_instance, CliError, ExperimentConfig,
};

#[derive(Parser)]
#[command(name = "cpc", version, about = "Cutting-plane consensus experiment runner")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment config; writes trace CSVs, summary.json and
    /// plot_data.csv into the output directory.
    Run {
        /// Experiment config (JSON).
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Check a config (schema and semantics) without running it.
    Validate {
        /// Experiment config (JSON).
        config: PathBuf,
    },
    /// Solve an instance centrally and print the reference optimizer.
    Reference {
        /// Instance spec (JSON).
        instance: PathBuf,
    },
    /// Rebuild a primal point from a run's column log.
    Recover {
        /// columns_*.json artifact written by `run`.
        runlog: PathBuf,
        /// Instance spec (JSON) the run was built from.
        instance: PathBuf,
        /// Output directory for recovered.json and schedule.csv.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Overrides {
    /// Replace the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the config's out_dir, then
    /// $CPC_OUT_DIR, then ./cpc-out.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Replace the config's stop.max_rounds.
    #[arg(long)]
    max_rounds: Option<u64>,
    /// Replace the config's stop.eps.
    #[arg(long)]
    eps: Option<f64>,
}

/// Print without panicking when stdout is a closed pipe (`cpc ... | head`).
fn emit(line: &str) {
    use std::io::Write as _;
    let _ = writeln!(std::io::stdout(), "{line}");
}

fn env_out_dir() -> Option<PathBuf> {
    std::env::var_os("CPC_OUT_DIR").map(PathBuf::from)
}

fn pick_out_dir(flag: Option<PathBuf>, from_config: Option<PathBuf>) -> PathBuf {
    flag.or(from_config)
        .or_else(env_out_dir)
        .unwrap_or_else(|| PathBuf::from("cpc-out"))
}

fn config_base(path: &Path) -> PathBuf {
    path.parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn apply_overrides(cfg: &mut ExperimentConfig, ov: &Overrides) {
    if let Some(seed) = ov.seed {
        cfg.seed = seed;
    }
    if let Some(max_rounds) = ov.max_rounds {
        cfg.stop.max_rounds = max_rounds;
    }
    if let Some(eps) = ov.eps {
        cfg.stop.eps = eps;
    }
}

fn run(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Run { config, overrides } => {
            let mut cfg = load_config(&config)?;
            apply_overrides(&mut cfg, &overrides);
            let out_dir = pick_out_dir(overrides.out_dir, cfg.out_dir.clone());
            let report = experiment::run_experiment(&cfg, &config_base(&config), &out_dir)?;
            for p in &report.points {
                emit(&format!(
                    "n={}: mean rounds {:.1} (95% CI [{:.1}, {:.1}]), {}/{} converged",
                    p.n, p.mean_rounds, p.ci95_lo, p.ci95_hi, p.converged, p.repetitions
                ));
            }
            emit(&format!("artifacts in {}", out_dir.display()));
            Ok(())
        }
        Cmd::Validate { config } => {
            let cfg = load_config(&config)?;
            let problems = experiment::validate(&cfg, &config_base(&config));
            if problems.is_empty() {
                emit(&format!("OK: {}", config.display()));
                Ok(())
            } else {
                Err(CliError::Config(problems.join("\n")))
            }
        }
        Cmd::Reference { instance } => {
            let spec = load_instance(&instance)?;
            let report = experiment::reference_report(&spec)?;
            emit(&serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(())
        }
        Cmd::Recover { runlog, instance, out_dir } => {
            let artifact = load_columns(&runlog)?;
            let spec = load_instance(&instance)?;
            let out_dir = pick_out_dir(out_dir, None);
            let report = experiment::recover_report(&artifact, &spec, &out_dir)?;
            emit(&serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
