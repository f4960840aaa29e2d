//! Exploratory statistics: correlation, stationarity and grouped means.

mod adf;
mod correlation;
mod grouped;
pub mod mackinnon;

use thiserror::Error;

pub use adf::{adf_report, adf_test, default_max_lag, AdfReportEntry, AdfResult, Verdict, DEFAULT_SIGNIFICANCE};
pub use correlation::{pearson, pearson_corr_matrix, CorrelationMatrix};
pub use grouped::{grouped_means, wind_sector, GroupStat, GroupedMeans, Grouping};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} rows, got {actual}")]
    TooFewRows { needed: usize, actual: usize },
    #[error("series is constant")]
    ConstantSeries,
    #[error("series of length {len} is too short for max lag {max_lag}")]
    SeriesTooShort { len: usize, max_lag: usize },
    #[error("regression design is singular or fits exactly")]
    SingularRegression,
    #[error("frame has no rows")]
    EmptyFrame,
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
}
