//! The `aqf` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error (I/O, parsing,
//! cleaning), 3 numeric failure (non-finite loss, singular regression).

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use commands::execute;
pub use config::RunConfig;

use crate::aqi::AqiError;
use crate::metrics::MetricsError;
use crate::nn::NnError;
use crate::preprocess::PreprocessError;
use crate::stats::StatsError;
use crate::synth::SynthError;
use crate::timeseries::FrameError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<FrameError> for CliError {
    fn from(e: FrameError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<PreprocessError> for CliError {
    fn from(e: PreprocessError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::SingularRegression => CliError::Numeric(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<NnError> for CliError {
    fn from(e: NnError) -> Self {
        match e {
            NnError::NonFiniteLoss { .. } | NnError::NonFiniteValue => CliError::Numeric(e.to_string()),
            NnError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<AqiError> for CliError {
    fn from(e: AqiError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Input CSV (date, wd, ws, temp, rh, rfall, pm25, pm10)
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// Model file (default: <out>/model.json)
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON file with RunConfig fields; flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the schema and report what cleaning removes
    Validate,
    /// Correlation matrix, ADF stationarity report and grouped means
    Analyze {
        #[arg(long)]
        adf_threshold: Option<f64>,
    },
    /// Train the Bi-LSTM forecaster
    Train {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        shuffle: bool,
    },
    /// One-step forecast metrics on the chronological test split
    Evaluate {
        #[arg(long)]
        train_fraction: Option<f64>,
        /// Report metrics on scaled values instead of µg/m³
        #[arg(long)]
        scaled: bool,
    },
    /// Recursive multi-step forecast with AQI per step
    Forecast {
        #[arg(long, default_value_t = 24)]
        steps: usize,
        /// instant | trailing24h
        #[arg(long)]
        aqi_mode: Option<String>,
        #[arg(long)]
        breakpoints: Option<PathBuf>,
    },
    /// AQI for a single pair of concentrations (µg/m³)
    Aqi {
        #[arg(long)]
        pm25: f64,
        #[arg(long)]
        pm10: f64,
        #[arg(long)]
        breakpoints: Option<PathBuf>,
    },
    /// Write a deterministic synthetic dataset to <out>/synth.csv
    Synth {
        #[arg(long)]
        rows: Option<usize>,
        /// First timestamp, "YYYY-MM-DD HH:MM:SS"
        #[arg(long)]
        start: Option<String>,
        #[arg(long)]
        diurnal_amplitude: Option<f64>,
        #[arg(long)]
        daytime_boost: Option<f64>,
        #[arg(long)]
        noise_scale: Option<f64>,
        #[arg(long)]
        pm_ratio: Option<f64>,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub lookback: Option<usize>,
    /// Comma-separated input columns
    #[arg(long, value_delimiter = ',')]
    pub features: Option<Vec<String>>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
}

#[derive(Debug, Parser)]
#[command(
    name = "aqf",
    version,
    about = "Hourly PM2.5/PM10 analysis, AQI and Bi-LSTM forecasting"
)]
struct Invocation {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

/// Result of running the CLI in-process.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let inv = match Invocation::try_parse_from(args) {
        Ok(inv) => inv,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: 1,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    match execute(&inv.common, &inv.command) {
        Ok(stdout) => Outcome {
            code: 0,
            stdout,
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}
