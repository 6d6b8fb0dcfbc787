mod commands;
mod config;

use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{DetectSpec, GridSpec};
use config::{ConfigError, ScenarioConfig};

/// Quantum vs classical illumination detection and rangefinding experiments.
/// Every command prints CSV, preceded by `#` metadata lines.
#[derive(Parser)]
#[command(name = "qirange", version)]
struct Cli {
    /// JSON scenario file; built-in reference values are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config field, e.g. `--set detectors.bg_s=0.1`. Repeatable.
    #[arg(long = "set", value_name = "PATH=VALUE", global = true)]
    overrides: Vec<String>,
    /// Shorthand for `--set protocol.seed=N`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the CSV here instead of stdout.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Click probabilities and LLV coefficients.
    Probs,
    /// Shots to threshold distinguishability per distance and regime.
    Nt {
        /// Report rows outside the Gaussian regime instead of failing.
        #[arg(long)]
        allow_non_gaussian: bool,
    },
    /// Quantum advantage over a log-spaced (mean photons, signal background) grid.
    QaGrid {
        #[arg(long, default_value_t = 1e-3)]
        nbar_min: f64,
        #[arg(long, default_value_t = 1e-1)]
        nbar_max: f64,
        #[arg(long, default_value_t = 1e-2)]
        bg_min: f64,
        #[arg(long, default_value_t = 2e-1)]
        bg_max: f64,
        #[arg(long, default_value_t = 5)]
        size: usize,
    },
    /// ROC curves of both regimes.
    Roc {
        #[arg(long, default_value_t = 200)]
        thresholds: usize,
        /// Shots per LLV; defaults to the quantum N_t.
        #[arg(long)]
        shots: Option<f64>,
    },
    /// Rolling-window LLV trace with the object appearing mid-stream.
    DetectSim {
        /// Stream length in N_t windows.
        #[arg(long, default_value_t = 4)]
        windows: u64,
        /// Object onset in N_t windows.
        #[arg(long, default_value_t = 2)]
        onset_windows: u64,
        /// Shots between emitted rows; defaults to N_t / 100.
        #[arg(long)]
        stride: Option<u64>,
    },
    /// One simulated scan: running sample means and decisions.
    Rangefind {
        /// `absent` or the object distance in m; defaults to the channel geometry.
        #[arg(long)]
        truth: Option<String>,
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Monte-Carlo probability of a correct per-distance decision.
    Pcorrect {
        #[arg(long)]
        truth: Option<String>,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut overrides = cli.overrides;
    if let Some(seed) = cli.seed {
        overrides.push(format!("protocol.seed={seed}"));
    }
    let cfg = ScenarioConfig::load(cli.config.as_deref(), &overrides)?;
    let truth = |t: &Option<String>| t.as_deref().map(commands::parse_truth).transpose();
    let table = match &cli.command {
        Command::Probs => commands::probs(&cfg)?,
        Command::Nt { allow_non_gaussian } => commands::nt(&cfg, *allow_non_gaussian)?,
        Command::QaGrid {
            nbar_min,
            nbar_max,
            bg_min,
            bg_max,
            size,
        } => commands::qa_grid(
            &cfg,
            &GridSpec {
                nbar: (*nbar_min, *nbar_max),
                bg_s: (*bg_min, *bg_max),
                size: *size,
            },
        )?,
        Command::Roc { thresholds, shots } => commands::roc(&cfg, *thresholds, *shots)?,
        Command::DetectSim {
            windows,
            onset_windows,
            stride,
        } => commands::detect_sim(
            &cfg,
            &DetectSpec {
                windows: *windows,
                onset_windows: *onset_windows,
                stride: *stride,
            },
        )?,
        Command::Rangefind { truth: t, trial } => commands::rangefind(&cfg, truth(t)?, *trial)?,
        Command::Pcorrect { truth: t } => commands::pcorrect(&cfg, truth(t)?)?,
    };
    match cli.out {
        Some(path) => table.write(BufWriter::new(File::create(&path)?))?,
        None => table.write(io::stdout().lock())?,
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> (u8, Option<&'static str>) {
    use qirange_core::Error as E;
    if err.downcast_ref::<ConfigError>().is_some() {
        return (2, None);
    }
    match err.chain().find_map(|e| e.downcast_ref::<E>()) {
        Some(E::Degenerate { .. } | E::Indistinguishable(_)) => (
            3,
            Some("the hypotheses cannot be separated: check that bg_s > 0, xi > 0 and every probability lies strictly inside (0, 1)"),
        ),
        Some(E::GaussianRegime { .. }) => (
            4,
            Some("too few clicks for the Gaussian treatment: raise the shot count, mean photons or efficiencies (nt accepts --allow-non-gaussian)"),
        ),
        Some(E::InvalidParameter { .. } | E::Setup(_) | E::Counts { .. } | E::OutOfBounds { .. }) => (2, None),
        _ => (1, None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let (code, hint) = exit_code(&e);
            if let Some(h) = hint {
                eprintln!("hint: {h}");
            }
            ExitCode::from(code)
        }
    }
}
