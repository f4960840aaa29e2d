//! Hourly observation records: CSV ingestion, cleaning, and the derived
//! `pm25/pm10` ratio column.
//!
//! Missing values are represented as `NaN` until [`clean`] removes them.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDateTime;
use serde::Serialize;
use thiserror::Error;

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%d %H:%M:%S";
pub const DATE_COLUMN: &str = "date";

#[derive(Debug, Error, PartialEq)]
pub enum FrameError {
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("input contains no data rows")]
    EmptyInput,
    #[error("line {line}: cannot parse timestamp `{value}` (expected YYYY-MM-DD HH:MM:SS)")]
    BadTimestamp { line: usize, value: String },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("cleaning removed every row")]
    AllRowsDropped,
}

/// Numeric columns of the base schema, in schema order, plus the derived ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Column {
    Wd,
    Ws,
    Temp,
    Rh,
    Rfall,
    Pm25,
    Pm10,
    Pm25Pm10Ratio,
}

impl Column {
    /// The seven measured columns.
    pub const BASE: [Column; 7] = [
        Column::Wd,
        Column::Ws,
        Column::Temp,
        Column::Rh,
        Column::Rfall,
        Column::Pm25,
        Column::Pm10,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Column::Wd => "wd",
            Column::Ws => "ws",
            Column::Temp => "temp",
            Column::Rh => "rh",
            Column::Rfall => "rfall",
            Column::Pm25 => "pm25",
            Column::Pm10 => "pm10",
            Column::Pm25Pm10Ratio => "pm25_pm10_ratio",
        }
    }

    /// Valid physical range, inclusive.
    pub fn valid_range(self) -> (f64, f64) {
        match self {
            Column::Wd => (0.0, 360.0),
            Column::Rh => (0.0, 100.0),
            Column::Temp => (f64::NEG_INFINITY, f64::INFINITY),
            Column::Ws | Column::Rfall | Column::Pm25 | Column::Pm10 | Column::Pm25Pm10Ratio => (0.0, f64::INFINITY),
        }
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Column {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lowered = s.trim().to_ascii_lowercase();
        match lowered.as_str() {
            "wd" => Ok(Column::Wd),
            "ws" => Ok(Column::Ws),
            "temp" => Ok(Column::Temp),
            "rh" => Ok(Column::Rh),
            "rfall" => Ok(Column::Rfall),
            "pm25" => Ok(Column::Pm25),
            "pm10" => Ok(Column::Pm10),
            "pm25_pm10_ratio" | "pm25/pm10" => Ok(Column::Pm25Pm10Ratio),
            _ => Err(format!("unknown column `{s}`")),
        }
    }
}

/// One hourly observation. Missing readings are `NaN`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservationRecord {
    pub timestamp: NaiveDateTime,
    pub wd: f64,
    pub ws: f64,
    pub temp: f64,
    pub rh: f64,
    pub rfall: f64,
    pub pm25: f64,
    pub pm10: f64,
}

impl ObservationRecord {
    pub fn value(&self, column: Column) -> Option<f64> {
        Some(match column {
            Column::Wd => self.wd,
            Column::Ws => self.ws,
            Column::Temp => self.temp,
            Column::Rh => self.rh,
            Column::Rfall => self.rfall,
            Column::Pm25 => self.pm25,
            Column::Pm10 => self.pm10,
            Column::Pm25Pm10Ratio => return None,
        })
    }

    fn values(&self) -> [f64; 7] {
        [self.wd, self.ws, self.temp, self.rh, self.rfall, self.pm25, self.pm10]
    }
}

/// Column-addressable table of hourly records.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObservationFrame {
    timestamps: Vec<NaiveDateTime>,
    base: [Vec<f64>; 7],
    ratio: Option<Vec<f64>>,
}

impl ObservationFrame {
    pub fn from_records(records: &[ObservationRecord]) -> Self {
        let mut frame = ObservationFrame::default();
        for r in records {
            frame.push(r);
        }
        frame
    }

    fn push(&mut self, r: &ObservationRecord) {
        self.timestamps.push(r.timestamp);
        for (col, v) in self.base.iter_mut().zip(r.values()) {
            col.push(v);
        }
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn timestamps(&self) -> &[NaiveDateTime] {
        &self.timestamps
    }

    pub fn has_ratio(&self) -> bool {
        self.ratio.is_some()
    }

    /// Column values, or `None` for the ratio column before it has been derived.
    pub fn column(&self, column: Column) -> Option<&[f64]> {
        match column {
            Column::Pm25Pm10Ratio => self.ratio.as_deref(),
            c => Some(&self.base[c as usize]),
        }
    }

    pub fn column_by_name(&self, name: &str) -> Option<&[f64]> {
        name.parse::<Column>().ok().and_then(|c| self.column(c))
    }

    /// Columns currently present, in schema order.
    pub fn columns(&self) -> Vec<Column> {
        let mut cols = Column::BASE.to_vec();
        if self.has_ratio() {
            cols.push(Column::Pm25Pm10Ratio);
        }
        cols
    }

    pub fn record(&self, i: usize) -> ObservationRecord {
        let b = &self.base;
        ObservationRecord {
            timestamp: self.timestamps[i],
            wd: b[0][i],
            ws: b[1][i],
            temp: b[2][i],
            rh: b[3][i],
            rfall: b[4][i],
            pm25: b[5][i],
            pm10: b[6][i],
        }
    }

    pub fn records(&self) -> impl Iterator<Item = ObservationRecord> + '_ {
        (0..self.len()).map(|i| self.record(i))
    }

    /// New frame holding the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        ObservationFrame {
            timestamps: rows.iter().map(|&i| self.timestamps[i]).collect(),
            base: std::array::from_fn(|c| rows.iter().map(|&i| self.base[c][i]).collect()),
            ratio: self.ratio.as_ref().map(|r| rows.iter().map(|&i| r[i]).collect()),
        }
    }

    /// Contiguous row range.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        ObservationFrame {
            timestamps: self.timestamps[range.clone()].to_vec(),
            base: std::array::from_fn(|c| self.base[c][range.clone()].to_vec()),
            ratio: self.ratio.as_ref().map(|r| r[range.clone()].to_vec()),
        }
    }

    /// Serializes to CSV with the same header names [`parse_csv`] reads.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(DATE_COLUMN);
        for c in self.columns() {
            out.push(',');
            out.push_str(c.name());
        }
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&self.timestamps[i].format(TIMESTAMP_FORMAT).to_string());
            for c in self.columns() {
                out.push(',');
                out.push_str(&format_value(self.column(c).unwrap()[i]));
            }
            out.push('\n');
        }
        out
    }
}

fn format_value(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        // `Display` for f64 is the shortest representation that parses back exactly.
        v.to_string()
    }
}

fn parse_value(cell: &str) -> f64 {
    let cell = cell.trim();
    if cell.is_empty() || cell.eq_ignore_ascii_case("nan") {
        return f64::NAN;
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => v,
        _ => f64::NAN,
    }
}

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    NaiveDateTime::parse_from_str(s.trim(), TIMESTAMP_FORMAT).ok()
}

/// Parses hourly records from CSV text.
///
/// Columns are located by header name (case-insensitive); an unnamed or
/// unrelated leading index column is ignored. Empty, `NaN`, or unparseable
/// numeric cells become missing values.
pub fn parse_csv(text: &str) -> Result<ObservationFrame, FrameError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| FrameError::Malformed {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));

    let date_idx = find(DATE_COLUMN).ok_or_else(|| FrameError::MissingColumn(DATE_COLUMN.into()))?;
    let mut base_idx = [0usize; 7];
    for (slot, col) in base_idx.iter_mut().zip(Column::BASE) {
        *slot = find(col.name()).ok_or_else(|| FrameError::MissingColumn(col.name().into()))?;
    }
    let ratio_idx = find(Column::Pm25Pm10Ratio.name());

    let mut frame = ObservationFrame::default();
    let mut ratio = Vec::new();
    for (row, result) in reader.records().enumerate() {
        // Header is line 1.
        let line = row + 2;
        let record = result.map_err(|e| FrameError::Malformed {
            line,
            message: e.to_string(),
        })?;
        if record.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        let raw_ts = record.get(date_idx).unwrap_or("");
        let timestamp = parse_timestamp(raw_ts).ok_or_else(|| FrameError::BadTimestamp {
            line,
            value: raw_ts.to_string(),
        })?;
        let v: [f64; 7] = std::array::from_fn(|k| parse_value(record.get(base_idx[k]).unwrap_or("")));
        frame.push(&ObservationRecord {
            timestamp,
            wd: v[0],
            ws: v[1],
            temp: v[2],
            rh: v[3],
            rfall: v[4],
            pm25: v[5],
            pm10: v[6],
        });
        if let Some(ri) = ratio_idx {
            ratio.push(parse_value(record.get(ri).unwrap_or("")));
        }
    }
    if frame.is_empty() {
        return Err(FrameError::EmptyInput);
    }
    if ratio_idx.is_some() {
        frame.ratio = Some(ratio);
    }
    Ok(frame)
}

/// Row counts removed by [`clean`], per reason.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CleanReport {
    pub input_rows: usize,
    pub kept: usize,
    /// Rows with at least one missing value.
    pub missing: usize,
    /// Rows with a value outside its physical range.
    pub out_of_range: usize,
    /// Later rows repeating an already-kept timestamp.
    pub duplicate: usize,
}

/// Drops incomplete and out-of-range rows, removes duplicate timestamps
/// (first occurrence wins), and sorts by timestamp.
pub fn clean(frame: &ObservationFrame) -> Result<(ObservationFrame, CleanReport), FrameError> {
    let mut report = CleanReport {
        input_rows: frame.len(),
        ..Default::default()
    };
    let columns = frame.columns();

    let mut seen = std::collections::HashSet::new();
    let mut keep = Vec::with_capacity(frame.len());
    for i in 0..frame.len() {
        let values: Vec<(Column, f64)> = columns.iter().map(|&c| (c, frame.column(c).unwrap()[i])).collect();
        if values.iter().any(|(_, v)| !v.is_finite()) {
            report.missing += 1;
            continue;
        }
        if values.iter().any(|&(c, v)| {
            let (lo, hi) = c.valid_range();
            v < lo || v > hi
        }) {
            report.out_of_range += 1;
            continue;
        }
        if !seen.insert(frame.timestamps[i]) {
            report.duplicate += 1;
            continue;
        }
        keep.push(i);
    }
    // Stable sort keeps input order among equal keys, though none remain.
    keep.sort_by_key(|&i| frame.timestamps[i]);
    report.kept = keep.len();
    if keep.is_empty() {
        return Err(FrameError::AllRowsDropped);
    }
    Ok((frame.select_rows(&keep), report))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RatioReport {
    /// Rows removed because pm10 was zero.
    pub zero_pm10_dropped: usize,
}

/// Adds `pm25_pm10_ratio = pm25 / pm10`, dropping rows where pm10 is zero.
pub fn add_ratio_column(frame: &ObservationFrame) -> (ObservationFrame, RatioReport) {
    let pm25 = frame.column(Column::Pm25).unwrap();
    let pm10 = frame.column(Column::Pm10).unwrap();
    let keep: Vec<usize> = (0..frame.len()).filter(|&i| pm10[i] > 0.0).collect();
    let report = RatioReport {
        zero_pm10_dropped: frame.len() - keep.len(),
    };
    let mut out = frame.select_rows(&keep);
    out.ratio = Some(keep.iter().map(|&i| pm25[i] / pm10[i]).collect());
    (out, report)
}
