use chrono::{Duration, NaiveDateTime};
use rayon::prelude::*;
use serde::Serialize;

use super::network::BiLstmNetwork;
use super::NnError;
use crate::aqi::{trailing_24h_means, AqiMode, AqiResult, BreakpointTable};
use crate::linalg::Matrix;
use crate::preprocess::{ScalerParams, TARGET_COLUMNS};
use crate::timeseries::ObservationFrame;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Forecast {
    pub timestamp: NaiveDateTime,
    /// µg/m³
    pub pm25: f64,
    pub pm10: f64,
    pub aqi: AqiResult,
    pub aqi_basis: AqiMode,
}

/// Scaled predictions for many windows; safe to call concurrently.
pub fn predict_scaled(net: &BiLstmNetwork, windows: &[Matrix]) -> Result<Vec<[f64; 2]>, NnError> {
    windows.par_iter().map(|w| net.predict_window(w)).collect()
}

fn target_indices(scaler: &ScalerParams) -> Result<[usize; 2], NnError> {
    let find = |name: &str| {
        scaler
            .index_of(name)
            .ok_or_else(|| NnError::ShapeMismatch(format!("scaler has no `{name}` column")))
    };
    Ok([find(TARGET_COLUMNS[0].name())?, find(TARGET_COLUMNS[1].name())?])
}

/// Maps scaled `(pm25, pm10)` pairs back to µg/m³ with the network's scaler.
pub fn unscale_targets(net: &BiLstmNetwork, scaled: &[[f64; 2]]) -> Result<Vec<[f64; 2]>, NnError> {
    let scaler = net.scaler.as_ref().ok_or(NnError::MissingScaler)?;
    let [i25, i10] = target_indices(scaler)?;
    Ok(scaled
        .iter()
        .map(|p| [scaler.unscale(i25, p[0]), scaler.unscale(i10, p[1])])
        .collect())
}

/// Forecasts `steps` hours past the end of `frame`, with a trailing-24h AQI
/// on the bundled breakpoint table.
pub fn predict(net: &BiLstmNetwork, frame: &ObservationFrame, steps: usize) -> Result<Vec<Forecast>, NnError> {
    predict_with(net, frame, steps, &BreakpointTable::default(), AqiMode::default())
}

/// Forecasts `steps` hours past the end of `frame`.
///
/// The first step uses the last `lookback` rows. Later steps feed the
/// predicted pm25/pm10 back into their input slots and hold every other
/// feature at its last observed value.
pub fn predict_with(
    net: &BiLstmNetwork,
    frame: &ObservationFrame,
    steps: usize,
    table: &BreakpointTable,
    mode: AqiMode,
) -> Result<Vec<Forecast>, NnError> {
    let scaler = net.scaler.as_ref().ok_or(NnError::MissingScaler)?;
    let lookback = net.lookback();
    if frame.len() < lookback {
        return Err(NnError::InsufficientHistory {
            needed: lookback,
            available: frame.len(),
        });
    }
    let features = net.features();
    let start = frame.len() - lookback;
    let mut window = Matrix::zeros(lookback, features.len());
    for (k, name) in features.iter().enumerate() {
        let column = frame
            .column_by_name(name)
            .ok_or_else(|| NnError::ShapeMismatch(format!("frame has no `{name}` column")))?;
        let idx = scaler
            .index_of(name)
            .ok_or_else(|| NnError::ShapeMismatch(format!("scaler has no `{name}` column")))?;
        for t in 0..lookback {
            window.set(t, k, scaler.scale(idx, column[start + t]));
        }
    }
    let [i25, i10] = target_indices(scaler)?;
    let slot = |c: usize| features.iter().position(|f| f == TARGET_COLUMNS[c].name());
    let feedback = [slot(0), slot(1)];

    let last_ts = *frame.timestamps().last().expect("non-empty");
    let mut out = Vec::with_capacity(steps);
    for step in 1..=steps {
        let y = net.predict_window(&window)?;
        out.push((
            last_ts + Duration::hours(step as i64),
            scaler.unscale(i25, y[0]),
            scaler.unscale(i10, y[1]),
        ));

        let mut next = window.row(lookback - 1).to_vec();
        for (c, s) in feedback.iter().enumerate() {
            if let Some(k) = *s {
                next[k] = y[c];
            }
        }
        let mut shifted = Matrix::zeros(lookback, features.len());
        for t in 0..lookback - 1 {
            shifted.row_mut(t).copy_from_slice(window.row(t + 1));
        }
        shifted.row_mut(lookback - 1).copy_from_slice(&next);
        window = shifted;
    }

    let (means25, means10) = match mode {
        AqiMode::Instant => (out.iter().map(|o| o.1).collect(), out.iter().map(|o| o.2).collect()),
        AqiMode::Trailing24h => {
            let tail = frame.len().saturating_sub(24);
            let mut ts: Vec<NaiveDateTime> = frame.timestamps()[tail..].to_vec();
            let mut pm25: Vec<f64> = frame.column_by_name("pm25").expect("base column")[tail..].to_vec();
            let mut pm10: Vec<f64> = frame.column_by_name("pm10").expect("base column")[tail..].to_vec();
            for o in &out {
                ts.push(o.0);
                pm25.push(o.1);
                pm10.push(o.2);
            }
            let history = ts.len() - out.len();
            (
                trailing_24h_means(&ts, &pm25)[history..].to_vec(),
                trailing_24h_means(&ts, &pm10)[history..].to_vec(),
            )
        }
    };
    out.into_iter()
        .zip(means25.into_iter().zip(means10))
        .map(|((timestamp, pm25, pm10), (c25, c10))| {
            let aqi = table.composite(c25.max(0.0), c10.max(0.0))?;
            Ok(Forecast {
                timestamp,
                pm25,
                pm10,
                aqi,
                aqi_basis: mode,
            })
        })
        .collect()
}
