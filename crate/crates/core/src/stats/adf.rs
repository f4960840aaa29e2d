use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::mackinnon::mackinnon_p_constant;
use super::StatsError;
use crate::linalg::{ols, Matrix, OlsFit};
use crate::timeseries::{Column, ObservationFrame, DATE_COLUMN};

pub const DEFAULT_SIGNIFICANCE: f64 = 0.05;
/// Label used for the ratio column in ADF reports.
pub const RATIO_LABEL: &str = "pm25/pm10";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Stationary,
    NonStationary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdfResult {
    /// t-ratio of the lagged-level coefficient.
    pub statistic: f64,
    pub p_value: f64,
    #[serde(rename = "lags")]
    pub lags_used: usize,
    pub n_obs: usize,
    /// Best AIC found during lag selection.
    pub ic_best: f64,
    pub verdict: Verdict,
}

/// Schwert's rule, capped so the regression keeps enough observations.
///
/// Returns `None` when the series is too short for any lag.
pub fn default_max_lag(n: usize) -> Option<usize> {
    let schwert = (12.0 * (n as f64 / 100.0).powf(0.25)).ceil() as usize;
    let cap = (n / 2).checked_sub(2)?;
    Some(schwert.min(cap))
}

/// Regresses `Δy_t` on a constant, `y_{t-1}` and `lags` lagged differences
/// using the last `nobs` available differences.
fn adf_regression(series: &[f64], diffs: &[f64], lags: usize, nobs: usize) -> Option<OlsFit> {
    let start = diffs.len() - nobs;
    let k = 2 + lags;
    let mut design = Matrix::zeros(nobs, k);
    let mut y = Vec::with_capacity(nobs);
    for (row, t) in (start..diffs.len()).enumerate() {
        let r = design.row_mut(row);
        r[0] = series[t];
        r[1] = 1.0;
        for j in 1..=lags {
            r[1 + j] = diffs[t - j];
        }
        y.push(diffs[t]);
    }
    ols(&y, &design)
}

/// Augmented Dickey-Fuller test with intercept and AIC lag selection.
///
/// Lag orders `0..=max_lag` are compared on a common sample; the chosen order
/// is then refit on all observations it permits. `max_lag` defaults to
/// [`default_max_lag`].
pub fn adf_test(series: &[f64], max_lag: Option<usize>, threshold: f64) -> Result<AdfResult, StatsError> {
    let n = series.len();
    if n < 2 {
        return Err(StatsError::TooFewRows { needed: 2, actual: n });
    }
    let (lo, hi) = series.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    if lo == hi {
        return Err(StatsError::ConstantSeries);
    }
    let max_lag = match max_lag {
        Some(m) => m,
        None => default_max_lag(n).ok_or(StatsError::SeriesTooShort { len: n, max_lag: 0 })?,
    };
    if n < 10 + max_lag || max_lag + 2 > n / 2 {
        return Err(StatsError::SeriesTooShort { len: n, max_lag });
    }

    let diffs: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    let common = diffs.len() - max_lag;
    let mut best: Option<(f64, usize)> = None;
    for lags in 0..=max_lag {
        let fit = adf_regression(series, &diffs, lags, common).ok_or(StatsError::SingularRegression)?;
        let aic = fit.aic();
        if best.is_none_or(|(b, _)| aic < b) {
            best = Some((aic, lags));
        }
    }
    let (ic_best, lags_used) = best.expect("at least one lag order");

    let nobs = diffs.len() - lags_used;
    let fit = adf_regression(series, &diffs, lags_used, nobs).ok_or(StatsError::SingularRegression)?;
    let statistic = fit.t_value(0);
    if !statistic.is_finite() {
        return Err(StatsError::SingularRegression);
    }
    let p_value = mackinnon_p_constant(statistic);
    let verdict = if p_value <= threshold {
        Verdict::Stationary
    } else {
        Verdict::NonStationary
    };
    Ok(AdfResult {
        statistic,
        p_value,
        lags_used,
        n_obs: nobs,
        ic_best,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdfReportEntry {
    pub column: String,
    pub result: Result<AdfResult, StatsError>,
}

impl Serialize for AdfReportEntry {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("AdfReportEntry", 6)?;
        st.serialize_field("column", &self.column)?;
        match &self.result {
            Ok(r) => {
                st.serialize_field("statistic", &r.statistic)?;
                st.serialize_field("p_value", &r.p_value)?;
                st.serialize_field("lags", &r.lags_used)?;
                st.serialize_field("verdict", &r.verdict)?;
                st.serialize_field("error", &Option::<String>::None)?;
            }
            Err(e) => {
                st.serialize_field("statistic", &Option::<f64>::None)?;
                st.serialize_field("p_value", &Option::<f64>::None)?;
                st.serialize_field("lags", &Option::<usize>::None)?;
                st.serialize_field("verdict", &Option::<Verdict>::None)?;
                st.serialize_field("error", &Some(e.to_string()))?;
            }
        }
        st.end()
    }
}

/// One ADF result per column: the timestamp as epoch seconds, the seven
/// measured columns, then the pm25/pm10 ratio. Failures are reported per
/// column without aborting the rest.
pub fn adf_report(frame: &ObservationFrame, threshold: f64) -> Vec<AdfReportEntry> {
    let mut series: Vec<(String, Option<Vec<f64>>)> = Vec::with_capacity(9);
    series.push((
        DATE_COLUMN.to_string(),
        Some(
            frame
                .timestamps()
                .iter()
                .map(|t| t.and_utc().timestamp() as f64)
                .collect(),
        ),
    ));
    for c in Column::BASE {
        series.push((c.name().to_string(), frame.column(c).map(<[f64]>::to_vec)));
    }
    series.push((
        RATIO_LABEL.to_string(),
        frame.column(Column::Pm25Pm10Ratio).map(<[f64]>::to_vec),
    ));

    series
        .into_par_iter()
        .map(|(column, values)| {
            let result = match values {
                Some(v) => adf_test(&v, None, threshold),
                None => Err(StatsError::UnknownColumn(column.clone())),
            };
            AdfReportEntry { column, result }
        })
        .collect()
}
