//! Regression metrics for the forecaster: MSE, RMSE, MAE and R².

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("predictions ({predictions}) and truths ({truths}) differ in length")]
    LengthMismatch { predictions: usize, truths: usize },
    #[error("no samples to evaluate")]
    EmptyInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    /// `NaN` (serialized as `null`) when the truth vector is constant.
    pub r2: f64,
    pub n: usize,
}

pub fn regression_metrics(predictions: &[f64], truths: &[f64]) -> Result<Metrics, MetricsError> {
    if predictions.len() != truths.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: predictions.len(),
            truths: truths.len(),
        });
    }
    if truths.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let n = truths.len() as f64;
    let mean = truths.iter().sum::<f64>() / n;
    let (mut ss_res, mut abs, mut ss_tot) = (0.0, 0.0, 0.0);
    for (p, y) in predictions.iter().zip(truths) {
        let e = p - y;
        ss_res += e * e;
        abs += e.abs();
        ss_tot += (y - mean) * (y - mean);
    }
    let mse = ss_res / n;
    let r2 = if ss_tot == 0.0 { f64::NAN } else { 1.0 - ss_res / ss_tot };
    Ok(Metrics {
        mse,
        rmse: mse.sqrt(),
        mae: abs / n,
        r2,
        n: truths.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub pooled: Metrics,
    pub pm25: Metrics,
    pub pm10: Metrics,
    pub n: usize,
    /// `"ug/m3"` for original units, `"scaled"` for [0, 1] values.
    pub units: String,
}

/// Per-pollutant and pooled metrics over `(pm25, pm10)` pairs.
pub fn evaluate(predictions: &[[f64; 2]], truths: &[[f64; 2]]) -> Result<MetricsReport, MetricsError> {
    evaluate_with_units(predictions, truths, "ug/m3")
}

pub fn evaluate_with_units(
    predictions: &[[f64; 2]],
    truths: &[[f64; 2]],
    units: &str,
) -> Result<MetricsReport, MetricsError> {
    let col = |v: &[[f64; 2]], k: usize| v.iter().map(|p| p[k]).collect::<Vec<_>>();
    let flat = |v: &[[f64; 2]]| v.iter().flatten().copied().collect::<Vec<_>>();
    Ok(MetricsReport {
        pooled: regression_metrics(&flat(predictions), &flat(truths))?,
        pm25: regression_metrics(&col(predictions, 0), &col(truths, 0))?,
        pm10: regression_metrics(&col(predictions, 1), &col(truths, 1))?,
        n: truths.len(),
        units: units.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction() {
        let m = regression_metrics(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((m.mse, m.mae, m.r2), (0.0, 0.0, 1.0));
    }

    #[test]
    fn hand_case() {
        let m = regression_metrics(&[1.0, 2.0, 4.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((m.mse - 1.0 / 3.0).abs() < 1e-12);
        assert!((m.rmse - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((m.mae - 1.0 / 3.0).abs() < 1e-12);
        assert!((m.r2 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mean_predictor_has_zero_r2() {
        let m = regression_metrics(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.r2, 0.0);
    }

    #[test]
    fn constant_truth_r2_undefined() {
        assert!(regression_metrics(&[1.0, 2.0], &[2.0, 2.0]).unwrap().r2.is_nan());
    }

    #[test]
    fn errors() {
        assert_eq!(
            regression_metrics(&[1.0], &[1.0, 2.0]),
            Err(MetricsError::LengthMismatch {
                predictions: 1,
                truths: 2
            })
        );
        assert_eq!(regression_metrics(&[], &[]), Err(MetricsError::EmptyInput));
    }

    #[test]
    fn pooled_mse_is_mean_of_parts() {
        let p = [[1.0, 5.0], [2.0, 7.0], [0.5, 9.0]];
        let t = [[1.5, 4.0], [2.0, 8.0], [1.0, 10.0]];
        let r = evaluate(&p, &t).unwrap();
        assert!((r.pooled.mse - (r.pm25.mse + r.pm10.mse) / 2.0).abs() < 1e-12);
    }
}
