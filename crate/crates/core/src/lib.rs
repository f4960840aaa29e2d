//! Hourly air-quality forecasting toolkit.
//!
//! The crate covers the whole pipeline for particulate-matter forecasting from
//! hourly sensor records:
//!
//! * [`timeseries`]: CSV ingestion, cleaning and the derived `pm25/pm10` ratio.
//! * [`preprocess`]: min-max scaling, chronological splits and sliding windows.
//! * [`stats`]: Pearson correlation, augmented Dickey-Fuller tests and grouped means.
//! * [`aqi`]: EPA air quality index from PM2.5/PM10 breakpoint tables.
//! * [`nn`]: a bidirectional LSTM forecaster trained with Adam, written from scratch.
//! * [`metrics`]: MSE, RMSE, MAE and R².
//! * [`synth`]: a seeded generator of realistic hourly records.
//! * [`cli`]: the `aqf` command-line front end.

pub mod aqi;
pub mod cli;
pub mod linalg;
pub mod metrics;
pub mod nn;
pub mod preprocess;
pub mod stats;
pub mod synth;
pub mod timeseries;

pub use aqi::{AqiResult, BreakpointTable, Category, Pollutant};
pub use metrics::{evaluate, Metrics, MetricsReport};
pub use nn::{BiLstmNetwork, NetworkConfig, TrainingConfig, TrainingLog};
pub use preprocess::{ScaledFrame, ScalerParams, WindowedDataset};
pub use timeseries::{CleanReport, Column, ObservationFrame, ObservationRecord};
