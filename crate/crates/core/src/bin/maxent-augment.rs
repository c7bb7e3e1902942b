//! Batch augmentation CLI.
//!
//! Exit status: 0 on success, 1 when some images were skipped or a run
//! failed, 2 for an invalid config or manifest.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use maxent_augment::dataset::{self, AugmentJob};
use maxent_augment::{load_config, preset, AugmentError, Family, PipelineConfig};

#[derive(Parser)]
#[command(
    name = "maxent-augment",
    version,
    about = "Max-entropy image augmentation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Config file (`key = value` lines)
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset: S1, S2, S3 or default
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Augment every image of a manifest into an output directory
    Augment {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Augmented copies written per manifest entry
        #[arg(long, default_value_t = 1)]
        copies: usize,
    },
    /// Write a 2x4 grid of one family over seven smoothness values
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        family: Family,
        /// Comma-separated smoothness values (defaults depend on the family)
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<usize>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure decode and augmentation throughput
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        manifest: PathBuf,
        /// Seconds to run
        #[arg(long, default_value_t = 5.0)]
        duration: f64,
        /// Write the JSON report here as well as to stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a preset (or a loaded config) in config-file form
    PresetDump {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Input(AugmentError),
    Run(anyhow::Error),
}

impl From<AugmentError> for Failure {
    fn from(e: AugmentError) -> Self {
        match e {
            AugmentError::Config { .. }
            | AugmentError::ConfigSyntax { .. }
            | AugmentError::UnknownPreset(_)
            | AugmentError::Manifest { .. } => Failure::Input(e),
            other => Failure::Run(other.into()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(e.into())
    }
}

fn resolve_config(common: &Common) -> Result<(PipelineConfig, String), Failure> {
    match (&common.config, &common.preset) {
        (Some(path), _) => {
            let cfg = load_config(path).map_err(|e| match e {
                AugmentError::Io(io) => Failure::Input(AugmentError::config(
                    "file",
                    format!("{}: {io}", path.display()),
                )),
                other => other.into(),
            })?;
            Ok((cfg, path.display().to_string()))
        }
        (None, name) => {
            let name = name.clone().unwrap_or_else(|| "default".to_string());
            Ok((preset(&name)?, name))
        }
    }
}

fn load_entries(path: &PathBuf) -> Result<Vec<dataset::ManifestEntry>, Failure> {
    dataset::load_manifest(path).map_err(|e| match e {
        AugmentError::Io(io) => Failure::Input(AugmentError::Manifest {
            line: 0,
            message: format!("{}: {io}", path.display()),
        }),
        other => other.into(),
    })
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Augment {
            common,
            manifest,
            out,
            copies,
        } => {
            let (cfg, _) = resolve_config(&common)?;
            let entries = load_entries(&manifest)?;
            let summary = dataset::run_augment(&AugmentJob {
                entries: &entries,
                config: &cfg,
                out_dir: &out,
                seed: common.seed,
                workers: common.workers,
                copies,
            })?;
            for (path, err) in &summary.skipped {
                eprintln!("skipped {}: {err}", path.display());
            }
            println!(
                "processed {} of {} entries, wrote {} images, {} failed",
                summary.processed, summary.entries, summary.outputs, summary.failed
            );
            Ok(if summary.is_complete() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Sweep {
            common,
            image,
            family,
            values,
            out,
        } => {
            let (cfg, _) = resolve_config(&common)?;
            dataset::run_sweep(&image, family, values.as_deref(), &out, &cfg, common.seed)?;
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench {
            common,
            manifest,
            duration,
            out,
        } => {
            let (cfg, name) = resolve_config(&common)?;
            let entries = load_entries(&manifest)?;
            let report = dataset::run_bench(
                &entries,
                &cfg,
                common.workers,
                Duration::from_secs_f64(duration.max(0.0)),
                &name,
            )?;
            let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Run(e.into()))?;
            println!("{text}");
            if let Some(path) = out {
                std::fs::write(path, format!("{text}\n"))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::PresetDump { common, out } => {
            let (cfg, _) = resolve_config(&common)?;
            let text = cfg.to_config_string();
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
