//! EPA Air Quality Index for particulate matter.
//!
//! Sub-indices are piecewise-linear interpolations over a breakpoint table:
//!
//! ```text
//! I = (i_hi - i_lo) / (c_hi - c_lo) * (C - c_lo) + i_lo
//! ```
//!
//! PM2.5 is truncated to one decimal and PM10 to an integer before lookup,
//! and the result is rounded half-up. The default table ships with the crate
//! (`data/epa_pm_breakpoints.json`) and can be replaced at runtime.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{Duration, NaiveDateTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

const DEFAULT_TABLE_JSON: &str = include_str!("../data/epa_pm_breakpoints.json");
pub const MAX_INDEX: i64 = 500;

#[derive(Debug, Error)]
pub enum AqiError {
    #[error("negative or non-finite concentration {0}")]
    NegativeConcentration(f64),
    #[error("unknown pollutant `{0}`")]
    UnknownPollutant(String),
    #[error("index {0} outside 0..=500")]
    OutOfRange(i64),
    #[error("invalid breakpoint table: {0}")]
    InvalidTable(String),
    #[error("reading breakpoint table: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pollutant {
    #[serde(rename = "pm25")]
    Pm25,
    #[serde(rename = "pm10")]
    Pm10,
}

impl Pollutant {
    pub fn name(self) -> &'static str {
        match self {
            Pollutant::Pm25 => "pm25",
            Pollutant::Pm10 => "pm10",
        }
    }

    /// Truncation applied to concentrations before lookup.
    fn truncate(self, c: f64) -> f64 {
        // The small offset absorbs binary representation error (e.g. 35.4 * 10).
        match self {
            Pollutant::Pm25 => ((c * 10.0) + 1e-9).floor() / 10.0,
            Pollutant::Pm10 => (c + 1e-9).floor(),
        }
    }
}

impl fmt::Display for Pollutant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pollutant {
    type Err = AqiError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['.', '_'], "").as_str() {
            "pm25" => Ok(Pollutant::Pm25),
            "pm10" => Ok(Pollutant::Pm10),
            _ => Err(AqiError::UnknownPollutant(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Category {
    Good,
    Moderate,
    UnhealthySensitive,
    Unhealthy,
    VeryUnhealthy,
    Hazardous,
}

impl Category {
    pub fn label(self) -> &'static str {
        match self {
            Category::Good => "Good",
            Category::Moderate => "Moderate",
            Category::UnhealthySensitive => "Unhealthy for Sensitive Groups",
            Category::Unhealthy => "Unhealthy",
            Category::VeryUnhealthy => "Very Unhealthy",
            Category::Hazardous => "Hazardous",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

pub fn categorize(index: i64) -> Result<Category, AqiError> {
    Ok(match index {
        0..=50 => Category::Good,
        51..=100 => Category::Moderate,
        101..=150 => Category::UnhealthySensitive,
        151..=200 => Category::Unhealthy,
        201..=300 => Category::VeryUnhealthy,
        301..=500 => Category::Hazardous,
        _ => return Err(AqiError::OutOfRange(index)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub c_lo: f64,
    pub c_hi: f64,
    pub i_lo: i64,
    pub i_hi: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BreakpointTable {
    segments: BTreeMap<Pollutant, Vec<Segment>>,
}

impl Default for BreakpointTable {
    fn default() -> Self {
        BreakpointTable::from_json(DEFAULT_TABLE_JSON).expect("bundled breakpoint table is valid")
    }
}

/// A sub-index and whether the concentration exceeded the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubIndex {
    pub index: i64,
    pub above_scale: bool,
}

impl BreakpointTable {
    pub fn from_json(text: &str) -> Result<Self, AqiError> {
        let table: BreakpointTable = serde_json::from_str(text).map_err(|e| AqiError::InvalidTable(e.to_string()))?;
        table.validate()?;
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, AqiError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn segments(&self, pollutant: Pollutant) -> Option<&[Segment]> {
        self.segments.get(&pollutant).map(Vec::as_slice)
    }

    fn validate(&self) -> Result<(), AqiError> {
        for (p, segs) in &self.segments {
            let bad = |msg: String| Err(AqiError::InvalidTable(format!("{p}: {msg}")));
            let (Some(first), Some(last)) = (segs.first(), segs.last()) else {
                return bad("no segments".into());
            };
            if first.c_lo != 0.0 || first.i_lo != 0 {
                return bad("first segment must start at concentration 0, index 0".into());
            }
            if last.i_hi != MAX_INDEX {
                return bad(format!("last segment must end at index {MAX_INDEX}"));
            }
            for s in segs {
                if s.c_lo.partial_cmp(&s.c_hi) != Some(Ordering::Less) || s.i_lo >= s.i_hi {
                    return bad(format!("segment {s:?} is not strictly increasing"));
                }
            }
            for w in segs.windows(2) {
                if w[1].c_lo.partial_cmp(&w[0].c_hi) != Some(Ordering::Greater) || w[1].i_lo != w[0].i_hi + 1 {
                    return bad(format!("segments {:?} and {:?} are not contiguous", w[0], w[1]));
                }
            }
        }
        Ok(())
    }

    pub fn sub_index(&self, pollutant: Pollutant, concentration: f64) -> Result<SubIndex, AqiError> {
        if !concentration.is_finite() || concentration < 0.0 {
            return Err(AqiError::NegativeConcentration(concentration));
        }
        let segs = self
            .segments(pollutant)
            .ok_or_else(|| AqiError::UnknownPollutant(pollutant.name().to_string()))?;
        let c = pollutant.truncate(concentration);
        let last = segs.last().expect("validated non-empty");
        if c > last.c_hi + 1e-9 {
            return Ok(SubIndex {
                index: last.i_hi,
                above_scale: true,
            });
        }
        // Last segment whose lower bound does not exceed the concentration.
        let seg = segs.iter().rev().find(|s| s.c_lo <= c + 1e-9).unwrap_or(&segs[0]);
        let c = c.min(seg.c_hi);
        let raw = (seg.i_hi - seg.i_lo) as f64 / (seg.c_hi - seg.c_lo) * (c - seg.c_lo) + seg.i_lo as f64;
        let index = (raw + 0.5).floor() as i64;
        Ok(SubIndex {
            index: index.clamp(seg.i_lo, seg.i_hi),
            above_scale: false,
        })
    }

    pub fn composite(&self, pm25: f64, pm10: f64) -> Result<AqiResult, AqiError> {
        let a = self.sub_index(Pollutant::Pm25, pm25)?;
        let b = self.sub_index(Pollutant::Pm10, pm10)?;
        let (composite, dominant) = if a.index >= b.index {
            (a.index, Pollutant::Pm25)
        } else {
            (b.index, Pollutant::Pm10)
        };
        Ok(AqiResult {
            sub_index_pm25: a.index,
            sub_index_pm10: b.index,
            composite,
            dominant,
            category: categorize(composite)?,
            above_scale: a.above_scale || b.above_scale,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AqiResult {
    pub sub_index_pm25: i64,
    pub sub_index_pm10: i64,
    pub composite: i64,
    pub dominant: Pollutant,
    pub category: Category,
    /// A concentration exceeded the table and was clamped to 500.
    pub above_scale: bool,
}

/// Sub-index on the bundled table.
pub fn sub_index(pollutant: Pollutant, concentration: f64) -> Result<i64, AqiError> {
    default_table().sub_index(pollutant, concentration).map(|s| s.index)
}

/// Composite AQI on the bundled table. Ties resolve the dominant pollutant to PM2.5.
pub fn composite_aqi(pm25: f64, pm10: f64) -> Result<AqiResult, AqiError> {
    default_table().composite(pm25, pm10)
}

fn default_table() -> &'static BreakpointTable {
    static TABLE: std::sync::OnceLock<BreakpointTable> = std::sync::OnceLock::new();
    TABLE.get_or_init(BreakpointTable::default)
}

/// Concentrations the AQI is computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AqiMode {
    /// Each hourly value on its own.
    Instant,
    /// Mean over the trailing 24 hours, inclusive of the current hour.
    #[default]
    #[serde(rename = "trailing24h")]
    Trailing24h,
}

impl FromStr for AqiMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "instant" => Ok(AqiMode::Instant),
            "trailing24h" | "trailing-24h" => Ok(AqiMode::Trailing24h),
            _ => Err(format!("unknown aqi mode `{s}` (expected instant or trailing24h)")),
        }
    }
}

impl fmt::Display for AqiMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AqiMode::Instant => "instant",
            AqiMode::Trailing24h => "trailing24h",
        })
    }
}

/// For each row, the mean of all rows with timestamps in `(t - 24h, t]`.
/// Timestamps must be sorted.
pub fn trailing_24h_means(timestamps: &[NaiveDateTime], values: &[f64]) -> Vec<f64> {
    let window = Duration::hours(24);
    let mut out = Vec::with_capacity(values.len());
    let mut start = 0;
    for i in 0..values.len() {
        while timestamps[i] - timestamps[start] >= window {
            start += 1;
        }
        let sum: f64 = values[start..=i].iter().sum();
        out.push(sum / (i + 1 - start) as f64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_interior() {
        assert_eq!(sub_index(Pollutant::Pm25, 12.0).unwrap(), 50);
        assert_eq!(sub_index(Pollutant::Pm25, 25.0).unwrap(), 78);
        assert_eq!(sub_index(Pollutant::Pm10, 154.0).unwrap(), 100);
        assert_eq!(sub_index(Pollutant::Pm25, 0.0).unwrap(), 0);
    }

    #[test]
    fn truncation_before_lookup() {
        // 12.09 truncates to 12.0, not into the next segment.
        assert_eq!(sub_index(Pollutant::Pm25, 12.09).unwrap(), 50);
        assert_eq!(sub_index(Pollutant::Pm10, 54.9).unwrap(), 50);
        assert_eq!(sub_index(Pollutant::Pm25, 35.4).unwrap(), 100);
    }

    #[test]
    fn sample_row_composites() {
        let r = composite_aqi(5.0, 22.0).unwrap();
        assert_eq!((r.sub_index_pm25, r.sub_index_pm10, r.composite), (21, 20, 21));
        assert_eq!(r.category, Category::Good);
        assert_eq!(r.dominant, Pollutant::Pm25);

        let r = composite_aqi(75.0, 197.0).unwrap();
        // 49 / 94.9 * 19.5 + 151 = 161.07; PM10 gives 49 / 99 * 42 + 101 = 121.79.
        assert_eq!((r.sub_index_pm25, r.sub_index_pm10, r.composite), (161, 122, 161));
        assert_eq!(r.category, Category::Unhealthy);
    }

    #[test]
    fn zero_and_clamp() {
        let r = composite_aqi(0.0, 0.0).unwrap();
        assert_eq!((r.composite, r.category), (0, Category::Good));
        let r = composite_aqi(900.0, 10.0).unwrap();
        assert_eq!(r.composite, 500);
        assert!(r.above_scale);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            sub_index(Pollutant::Pm25, -1.0),
            Err(AqiError::NegativeConcentration(_))
        ));
        assert!(matches!("co".parse::<Pollutant>(), Err(AqiError::UnknownPollutant(_))));
        assert!(matches!(categorize(501), Err(AqiError::OutOfRange(501))));
        assert!(matches!(categorize(-1), Err(AqiError::OutOfRange(-1))));
    }

    #[test]
    fn categories() {
        assert_eq!(categorize(0).unwrap(), Category::Good);
        assert_eq!(categorize(100).unwrap(), Category::Moderate);
        assert_eq!(categorize(101).unwrap(), Category::UnhealthySensitive);
        assert_eq!(categorize(500).unwrap(), Category::Hazardous);
    }

    #[test]
    fn table_validation() {
        let gap = r#"{"pm25":[{"c_lo":0,"c_hi":10,"i_lo":0,"i_hi":50},{"c_lo":11,"c_hi":20,"i_lo":52,"i_hi":500}]}"#;
        assert!(matches!(
            BreakpointTable::from_json(gap),
            Err(AqiError::InvalidTable(_))
        ));
        let ok = r#"{"pm25":[{"c_lo":0,"c_hi":10,"i_lo":0,"i_hi":50},{"c_lo":10.1,"c_hi":20,"i_lo":51,"i_hi":500}]}"#;
        let t = BreakpointTable::from_json(ok).unwrap();
        assert!(matches!(
            t.sub_index(Pollutant::Pm10, 3.0),
            Err(AqiError::UnknownPollutant(_))
        ));
    }

    #[test]
    fn trailing_means_respect_gaps() {
        let t0 = crate::timeseries::parse_timestamp("2018-10-05 00:00:00").unwrap();
        let ts = [t0, t0 + Duration::hours(1), t0 + Duration::hours(30)];
        let m = trailing_24h_means(&ts, &[10.0, 20.0, 40.0]);
        assert_eq!(m, vec![10.0, 15.0, 40.0]);
    }
}
