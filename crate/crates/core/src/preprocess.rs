//! Min-max scaling, chronological splitting and sliding-window framing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::timeseries::{Column, ObservationFrame};

/// Default lookback: one day of hourly data.
pub const DEFAULT_LOOKBACK: usize = 24;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;
/// Forecast targets, in output order.
pub const TARGET_COLUMNS: [Column; 2] = [Column::Pm25, Column::Pm10];

#[derive(Debug, Error, PartialEq)]
pub enum PreprocessError {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("frame has no rows")]
    EmptyFrame,
    #[error("shape mismatch: expected {expected} columns, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("split leaves an empty side (train {train}, test {test})")]
    DegenerateSplit { train: usize, test: usize },
    #[error("series of length {len} is too short for lookback {lookback}")]
    SeriesTooShort { len: usize, lookback: usize },
}

/// Per-column minimum and maximum, in a fixed column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub columns: Vec<String>,
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl ScalerParams {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Scales one value of column `idx` into `[0, 1]` (for in-range input).
    pub fn scale(&self, idx: usize, x: f64) -> f64 {
        let span = self.maxs[idx] - self.mins[idx];
        if span == 0.0 {
            0.0
        } else {
            (x - self.mins[idx]) / span
        }
    }

    pub fn unscale(&self, idx: usize, v: f64) -> f64 {
        self.mins[idx] + v * (self.maxs[idx] - self.mins[idx])
    }
}

/// Column-ordered scaled values (rows × columns).
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledFrame {
    pub columns: Vec<String>,
    pub values: Matrix,
}

impl ScaledFrame {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

fn resolve(frame: &ObservationFrame, name: &str) -> Result<Vec<f64>, PreprocessError> {
    frame
        .column_by_name(name)
        .map(<[f64]>::to_vec)
        .ok_or_else(|| PreprocessError::UnknownColumn(name.to_string()))
}

/// Records the extrema of each named column over the frame's rows.
pub fn fit_scaler<S: AsRef<str>>(frame: &ObservationFrame, columns: &[S]) -> Result<ScalerParams, PreprocessError> {
    if frame.is_empty() {
        return Err(PreprocessError::EmptyFrame);
    }
    let mut params = ScalerParams {
        columns: Vec::new(),
        mins: Vec::new(),
        maxs: Vec::new(),
    };
    for name in columns {
        let name = name.as_ref();
        let values = resolve(frame, name)?;
        let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        params.columns.push(name.to_string());
        params.mins.push(lo);
        params.maxs.push(hi);
    }
    Ok(params)
}

/// Scales the parameter columns of `frame`. Constant columns map to 0.
pub fn transform(params: &ScalerParams, frame: &ObservationFrame) -> Result<ScaledFrame, PreprocessError> {
    let cols = params
        .columns
        .iter()
        .map(|name| resolve(frame, name))
        .collect::<Result<Vec<_>, _>>()?;
    let mut values = Matrix::zeros(frame.len(), params.len());
    for (c, col) in cols.iter().enumerate() {
        for (r, &x) in col.iter().enumerate() {
            values.set(r, c, params.scale(c, x));
        }
    }
    Ok(ScaledFrame {
        columns: params.columns.clone(),
        values,
    })
}

/// Scales a raw matrix whose columns follow `params.columns`.
pub fn transform_matrix(params: &ScalerParams, raw: &Matrix) -> Result<Matrix, PreprocessError> {
    map_matrix(params, raw, ScalerParams::scale)
}

/// Maps scaled values back to original units.
pub fn inverse_transform(params: &ScalerParams, scaled: &Matrix) -> Result<Matrix, PreprocessError> {
    map_matrix(params, scaled, ScalerParams::unscale)
}

fn map_matrix(
    params: &ScalerParams,
    m: &Matrix,
    f: impl Fn(&ScalerParams, usize, f64) -> f64,
) -> Result<Matrix, PreprocessError> {
    if m.cols() != params.len() {
        return Err(PreprocessError::ShapeMismatch {
            expected: params.len(),
            actual: m.cols(),
        });
    }
    let mut out = m.clone();
    for r in 0..m.rows() {
        for (c, v) in out.row_mut(r).iter_mut().enumerate() {
            *v = f(params, c, *v);
        }
    }
    Ok(out)
}

/// First `⌊n·fraction⌋` rows train, the rest test. No shuffling.
pub fn chrono_split(
    frame: &ObservationFrame,
    train_fraction: f64,
) -> Result<(ObservationFrame, ObservationFrame), PreprocessError> {
    let n = frame.len();
    let train = split_point(n, train_fraction)?;
    Ok((frame.slice(0..train), frame.slice(train..n)))
}

/// Row index where the test portion begins.
pub fn split_point(n: usize, train_fraction: f64) -> Result<usize, PreprocessError> {
    let train = if train_fraction.is_finite() && train_fraction > 0.0 {
        ((n as f64 * train_fraction).floor() as usize).min(n)
    } else {
        0
    };
    if train == 0 || train == n {
        return Err(PreprocessError::DegenerateSplit { train, test: n - train });
    }
    Ok(train)
}

/// Supervised windows: `lookback × features` inputs and the next-step
/// `(pm25, pm10)` pair as target, all scaled.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    pub inputs: Vec<Matrix>,
    pub targets: Vec<[f64; 2]>,
    pub feature_order: Vec<String>,
    pub lookback: usize,
}

impl WindowedDataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Samples `range` of the dataset, e.g. the windows whose targets fall in a test span.
    pub fn subset(&self, range: std::ops::Range<usize>) -> WindowedDataset {
        WindowedDataset {
            inputs: self.inputs[range.clone()].to_vec(),
            targets: self.targets[range].to_vec(),
            feature_order: self.feature_order.clone(),
            lookback: self.lookback,
        }
    }
}

/// Window `i` covers rows `[i, i + lookback)`; its target is the
/// `(pm25, pm10)` pair at row `i + lookback`.
pub fn make_windows<S: AsRef<str>>(
    scaled: &ScaledFrame,
    features: &[S],
    lookback: usize,
) -> Result<WindowedDataset, PreprocessError> {
    let n = scaled.values.rows();
    if lookback == 0 || n <= lookback {
        return Err(PreprocessError::SeriesTooShort { len: n, lookback });
    }
    let idx = |name: &str| {
        scaled
            .index_of(name)
            .ok_or_else(|| PreprocessError::UnknownColumn(name.to_string()))
    };
    let feature_idx = features
        .iter()
        .map(|f| idx(f.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    let target_idx = [idx(TARGET_COLUMNS[0].name())?, idx(TARGET_COLUMNS[1].name())?];

    let f = feature_idx.len();
    let mut inputs = Vec::with_capacity(n - lookback);
    let mut targets = Vec::with_capacity(n - lookback);
    for i in 0..n - lookback {
        let mut w = Matrix::zeros(lookback, f);
        for t in 0..lookback {
            let src = scaled.values.row(i + t);
            for (dst, &c) in w.row_mut(t).iter_mut().zip(&feature_idx) {
                *dst = src[c];
            }
        }
        inputs.push(w);
        let row = scaled.values.row(i + lookback);
        targets.push([row[target_idx[0]], row[target_idx[1]]]);
    }
    Ok(WindowedDataset {
        inputs,
        targets,
        feature_order: features.iter().map(|s| s.as_ref().to_string()).collect(),
        lookback,
    })
}

/// Columns the scaler covers: the features plus both targets.
pub fn scaled_columns<S: AsRef<str>>(features: &[S]) -> Vec<String> {
    let mut cols: Vec<String> = features.iter().map(|f| f.as_ref().to_string()).collect();
    for t in TARGET_COLUMNS {
        if !cols.iter().any(|c| c == t.name()) {
            cols.push(t.name().to_string());
        }
    }
    cols
}

/// Windows whose target row lies in the test span, with those targets in
/// original units. Inputs may reach back into the training span.
pub fn held_out_windows<S: AsRef<str>>(
    frame: &ObservationFrame,
    scaler: &ScalerParams,
    features: &[S],
    lookback: usize,
    train_fraction: f64,
) -> Result<(WindowedDataset, Vec<[f64; 2]>), PreprocessError> {
    let split = split_point(frame.len(), train_fraction)?;
    let all = make_windows(&transform(scaler, frame)?, features, lookback)?;
    let first = split.saturating_sub(lookback);
    let pm25 = frame.column(TARGET_COLUMNS[0]).expect("base column");
    let pm10 = frame.column(TARGET_COLUMNS[1]).expect("base column");
    let truths = (first..all.len())
        .map(|i| [pm25[i + lookback], pm10[i + lookback]])
        .collect();
    Ok((all.subset(first..all.len()), truths))
}

/// Chronological split, scaler fitted on the training rows only, and the
/// training windows.
pub fn training_windows<S: AsRef<str>>(
    frame: &ObservationFrame,
    features: &[S],
    lookback: usize,
    train_fraction: f64,
) -> Result<(ScalerParams, WindowedDataset), PreprocessError> {
    let (train, _) = chrono_split(frame, train_fraction)?;
    let scaler = fit_scaler(&train, &scaled_columns(features))?;
    let data = make_windows(&transform(&scaler, &train)?, features, lookback)?;
    Ok((scaler, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::{parse_csv, parse_timestamp, ObservationRecord};

    fn frame_from(values: &[(f64, f64, f64)]) -> ObservationFrame {
        let t0 = parse_timestamp("2018-10-05 00:00:00").unwrap();
        let recs: Vec<_> = values
            .iter()
            .enumerate()
            .map(|(i, &(temp, pm25, pm10))| ObservationRecord {
                timestamp: t0 + chrono::Duration::hours(i as i64),
                wd: 90.0,
                ws: 1.0,
                temp,
                rh: 50.0,
                rfall: 0.0,
                pm25,
                pm10,
            })
            .collect();
        ObservationFrame::from_records(&recs)
    }

    #[test]
    fn fit_extrema() {
        let f = frame_from(&[(0.0, 1.0, 1.0), (10.0, 1.0, 2.0)]);
        let p = fit_scaler(&f, &["temp", "pm25"]).unwrap();
        assert_eq!((p.mins[0], p.maxs[0]), (0.0, 10.0));
        assert_eq!((p.mins[1], p.maxs[1]), (1.0, 1.0));
    }

    #[test]
    fn fit_errors() {
        let f = frame_from(&[(0.0, 1.0, 1.0)]);
        assert_eq!(
            fit_scaler(&f, &["nope"]),
            Err(PreprocessError::UnknownColumn("nope".into()))
        );
        assert_eq!(
            fit_scaler(&ObservationFrame::default(), &["temp"]),
            Err(PreprocessError::EmptyFrame)
        );
    }

    #[test]
    fn sample_rows_temp_extrema() {
        let text = include_str!("../tests/data/sample_rows.csv");
        let f = parse_csv(text).unwrap();
        let p = fit_scaler(&f, &["temp"]).unwrap();
        assert_eq!((p.mins[0], p.maxs[0]), (24.3, 29.7));
    }

    #[test]
    fn scale_points() {
        let p = ScalerParams {
            columns: vec!["x".into()],
            mins: vec![0.0],
            maxs: vec![10.0],
        };
        assert_eq!(p.scale(0, 5.0), 0.5);
        assert_eq!(p.scale(0, 0.0), 0.0);
        assert_eq!(p.scale(0, 10.0), 1.0);
        let c = ScalerParams {
            columns: vec!["x".into()],
            mins: vec![5.0],
            maxs: vec![5.0],
        };
        assert_eq!(c.scale(0, 5.0), 0.0);
    }

    #[test]
    fn roundtrip_temp_values() {
        let p = ScalerParams {
            columns: vec!["temp".into()],
            mins: vec![24.3],
            maxs: vec![29.7],
        };
        let raw = Matrix::from_vec(3, 1, vec![24.3, 29.7, 26.0]).unwrap();
        let back = inverse_transform(&p, &transform_matrix(&p, &raw).unwrap()).unwrap();
        for (a, b) in raw.as_slice().iter().zip(back.as_slice()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn inverse_shape_mismatch() {
        let p = ScalerParams {
            columns: vec!["x".into()],
            mins: vec![0.0],
            maxs: vec![1.0],
        };
        let m = Matrix::zeros(2, 2);
        assert_eq!(
            inverse_transform(&p, &m),
            Err(PreprocessError::ShapeMismatch { expected: 1, actual: 2 })
        );
    }

    #[test]
    fn split_counts() {
        assert_eq!(split_point(10, 0.8), Ok(8));
        assert_eq!(split_point(10, 0.99), Ok(9));
        assert_eq!(
            split_point(10, 1.0),
            Err(PreprocessError::DegenerateSplit { train: 10, test: 0 })
        );
        assert!(split_point(10, 0.0).is_err());
        assert!(split_point(10, f64::NAN).is_err());
        let f = frame_from(&[(1.0, 1.0, 1.0); 10]);
        let (tr, te) = chrono_split(&f, 0.8).unwrap();
        assert_eq!((tr.len(), te.len()), (8, 2));
        assert!(tr.timestamps().last() < te.timestamps().first());
    }

    fn scaled_series(n: usize) -> ScaledFrame {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| vec![i as f64, 100.0 + i as f64, 200.0 + i as f64])
            .collect();
        ScaledFrame {
            columns: vec!["temp".into(), "pm25".into(), "pm10".into()],
            values: Matrix::from_rows(&rows).unwrap(),
        }
    }

    #[test]
    fn window_counts_and_targets() {
        let s = scaled_series(5);
        let ds = make_windows(&s, &["temp", "pm25", "pm10"], 2).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.targets, vec![[102.0, 202.0], [103.0, 203.0], [104.0, 204.0]]);
        assert_eq!(
            make_windows(&s, &["temp"], 5),
            Err(PreprocessError::SeriesTooShort { len: 5, lookback: 5 })
        );
        assert!(make_windows(&s, &["temp"], 0).is_err());
    }

    #[test]
    fn unit_lookback() {
        let s = scaled_series(3);
        let ds = make_windows(&s, &["temp"], 1).unwrap();
        assert_eq!(
            ds.inputs.iter().map(|w| w.as_slice().to_vec()).collect::<Vec<_>>(),
            vec![vec![0.0], vec![1.0]]
        );
        assert_eq!(ds.targets, vec![[101.0, 201.0], [102.0, 202.0]]);
    }
}
