//! Command-line front end. `main` only parses arguments and maps errors to
//! an exit status; everything else lives here so it can be driven from tests.

mod config;
mod experiment;
mod scaling;
mod tools;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{
    CentralizedSection, DatasetSection, DatasetSource, ExperimentConfig, FederationSection, FusionSection,
    OutputSection, ScalingSection, Splits, SyntheticSection, TrainSection, TransferSection,
};
pub use experiment::{
    fuse_models, run_experiment, write_artifacts, BaselineSummary, DataSummary, Experiment, FusionSummary,
    ModelSummary, Summary, TransferModelSummary, TransferSummary, ROUND_LOG_FILE, SUMMARY_FILE,
};
pub use scaling::{run_scaling, HostInfo, ScalingReport, ScalingRow, SCALING_CSV, SCALING_JSON, SCALING_ROUNDS_CSV};
pub use tools::{cmd_fuse, cmd_latency, cmd_metrics, latency_report, read_predictions, score_predictions};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "fedfuse", version, about = "Federated learning simulator with evidence fusion")]
pub struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Root seed; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Maximum number of clients trained concurrently.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the federation, fuse the global models and write reports.
    Federate,
    /// Time the federation for several client counts.
    Scaling {
        /// Client counts, e.g. 10,20,30; overrides the config.
        #[arg(long, value_delimiter = ',')]
        clients: Vec<usize>,
        /// Ratio threshold; overrides the config.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Combine mass files with Dempster's rule and decide by max belief.
    Fuse {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Normalize once over all sources instead of folding pairwise.
        #[arg(long)]
        joint: bool,
    },
    /// Response-time breakdown of a pipeline file.
    Latency { file: PathBuf },
    /// Score a `true,predicted` CSV.
    Metrics {
        file: PathBuf,
        /// Number of classes; defaults to the largest index seen plus one.
        #[arg(long)]
        classes: Option<usize>,
    },
}

impl Cli {
    fn experiment_config(&self) -> Result<ExperimentConfig> {
        let path = self
            .config
            .as_deref()
            .ok_or_else(|| Error::Config("this command needs --config".into()))?;
        let mut cfg = ExperimentConfig::load(path)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn threads(&self) -> Result<usize> {
        match self.threads {
            Some(0) => Err(Error::Config("--threads must be at least 1".into())),
            Some(n) => Ok(n),
            None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
        }
    }
}

fn print(out: &mut dyn Write, text: std::fmt::Arguments<'_>) -> Result<()> {
    out.write_fmt(text).map_err(|e| Error::io(Path::new("<stdout>"), e))
}

/// Executes a parsed command line, writing human-readable output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Federate => {
            let cfg = cli.experiment_config()?;
            let exp = run_experiment(&cfg, cli.threads()?)?;
            write_artifacts(&cfg.output.dir, &exp.artifacts)?;
            let s = &exp.summary;
            print(out, format_args!("{:<16} {:>10} {:>10}\n", "model", "accuracy", "macro_f1"))?;
            for m in &s.models {
                print(
                    out,
                    format_args!("{:<16} {:>10.4} {:>10.4}\n", m.name, m.test_accuracy, m.metrics.macro_avg.f1),
                )?;
            }
            if let Some(f) = &s.fusion {
                print(
                    out,
                    format_args!(
                        "{:<16} {:>10.4} {:>10.4}\n",
                        "fused",
                        f.metrics.macro_avg.accuracy,
                        f.metrics.macro_avg.f1
                    ),
                )?;
            }
            print(out, format_args!("reports written to {}\n", cfg.output.dir.display()))
        }
        Command::Scaling { clients, threshold } => {
            let mut cfg = cli.experiment_config()?;
            if !clients.is_empty() {
                cfg.scaling.client_counts = clients.clone();
            }
            if let Some(t) = threshold {
                cfg.scaling.threshold = *t;
            }
            let report = run_scaling(&cfg, cli.threads()?)?;
            write_artifacts(&cfg.output.dir, &report.artifacts()?)?;
            report
                .print_table(out)
                .map_err(|e| Error::io(Path::new("<stdout>"), e))
        }
        Command::Fuse { files, joint } => {
            let paths: Vec<&Path> = files.iter().map(PathBuf::as_path).collect();
            cmd_fuse(&paths, *joint, out)
        }
        Command::Latency { file } => cmd_latency(file, out),
        Command::Metrics { file, classes } => {
            let csv = cmd_metrics(file, *classes, out)?;
            if let Some(dir) = &cli.out {
                write_artifacts(dir, &[(PathBuf::from("metrics.csv"), csv)])?;
            }
            Ok(())
        }
    }
}
