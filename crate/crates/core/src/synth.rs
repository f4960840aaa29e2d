//! Deterministic generator of hourly records shaped like a tropical urban
//! monitoring site.
//!
//! Construction, with `h` the hour of day and `N(0, s)` seeded Gaussian noise:
//!
//! ```text
//! temp  = 27 + 3·sin(2π(h - 9)/24) + N(0, 0.3)                 peaks mid-afternoon
//! rh    = clamp(80 - 4·(temp - 27) + N(0, 2), 0, 100)          anti-correlated with temp
//! wd    = U[0, 360)
//! ws    = |1.5 + 0.8·sin(2π(h - 10)/24) + N(0, 0.3)|
//! rfall = 0, or Exp(mean 2 mm) with probability 0.05
//! pm10  = max(1, 60 + A·sin(2π(h - 8)/24) + B·[6 ≤ h < 18] + N(0, σ))
//! pm25  = max(0, r·pm10 + N(0, r·σ))
//! ```
//!
//! `A` (diurnal amplitude), `B` (daytime boost), `σ` (noise scale) and `r`
//! (pm25/pm10 ratio) come from [`SynthSpec`]. Consequences the analysis tests
//! rely on: daytime mean pm10 exceeds night-time mean pm10, the pm25–pm10
//! correlation exceeds 0.9, pm10 is strictly positive, and every column is
//! stationary. Values are rounded to one decimal, like the sensor exports.

use std::f64::consts::PI;

use chrono::{Duration, NaiveDateTime, Timelike};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::timeseries::{parse_timestamp, ObservationFrame, ObservationRecord};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid synth spec: {0}")]
    BadSpec(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub rows: usize,
    pub seed: u64,
    pub start: NaiveDateTime,
    pub diurnal_amplitude: f64,
    pub daytime_boost: f64,
    pub noise_scale: f64,
    pub pm_ratio: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            rows: 5000,
            seed: 7,
            start: parse_timestamp("2018-05-01 00:00:00").expect("valid literal"),
            diurnal_amplitude: 25.0,
            daytime_boost: 15.0,
            noise_scale: 2.0,
            pm_ratio: 0.4,
        }
    }
}

const BASE_PM10: f64 = 60.0;

fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

pub fn synth_generate(spec: &SynthSpec) -> Result<ObservationFrame, SynthError> {
    if spec.rows < 100 {
        return Err(SynthError::BadSpec(format!(
            "rows must be at least 100, got {}",
            spec.rows
        )));
    }
    let finite_nonneg = [
        spec.diurnal_amplitude,
        spec.daytime_boost,
        spec.noise_scale,
        spec.pm_ratio,
    ]
    .iter()
    .all(|v| v.is_finite() && *v >= 0.0);
    if !finite_nonneg || spec.pm_ratio > 1.0 {
        return Err(SynthError::BadSpec(
            "amplitude, boost and noise must be finite and non-negative; ratio must lie in [0, 1]".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let rain = Exp::new(0.5).expect("valid rate");
    let phase = |h: f64, peak_shift: f64| (2.0 * PI * (h - peak_shift) / 24.0).sin();

    let mut records = Vec::with_capacity(spec.rows);
    for k in 0..spec.rows {
        let timestamp = spec.start + Duration::hours(k as i64);
        let hour = timestamp.hour();
        let h = hour as f64;

        let temp = 27.0 + 3.0 * phase(h, 9.0) + 0.3 * unit.sample(&mut rng);
        let rh = (80.0 - 4.0 * (temp - 27.0) + 2.0 * unit.sample(&mut rng)).clamp(0.0, 100.0);
        let wd = rng.gen_range(0.0..360.0);
        let ws = (1.5 + 0.8 * phase(h, 10.0) + 0.3 * unit.sample(&mut rng)).abs();
        let rfall = if rng.gen_bool(0.05) { rain.sample(&mut rng) } else { 0.0 };

        let day = if (6..18).contains(&hour) {
            spec.daytime_boost
        } else {
            0.0
        };
        let pm10 =
            (BASE_PM10 + spec.diurnal_amplitude * phase(h, 8.0) + day + spec.noise_scale * unit.sample(&mut rng))
                .max(1.0);
        let pm25 = (spec.pm_ratio * pm10 + spec.pm_ratio * spec.noise_scale * unit.sample(&mut rng)).max(0.0);

        records.push(ObservationRecord {
            timestamp,
            // 359.96 would round up to 360.0, which is still in range.
            wd: round1(wd),
            ws: round1(ws),
            temp: round1(temp),
            rh: round1(rh),
            rfall: round1(rfall),
            pm25: round1(pm25),
            pm10: round1(pm10).max(1.0),
        });
    }
    Ok(ObservationFrame::from_records(&records))
}
