use chrono::Timelike;
use serde::Serialize;

use super::StatsError;
use crate::timeseries::{Column, ObservationFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    /// Relative humidity bins of width 20; the last bin includes 100.
    RhBins,
    /// Eight 45° compass sectors centred on N, NE, …, NW.
    WdSectors,
    /// Hours 6–17 are Day, the rest Night.
    DayNight,
}

const RH_LABELS: [&str; 5] = ["[0,20)", "[20,40)", "[40,60)", "[60,80)", "[80,100]"];
const SECTOR_LABELS: [&str; 8] = ["N", "NE", "E", "SE", "S", "SW", "W", "NW"];
const DAY_NIGHT_LABELS: [&str; 2] = ["Day", "Night"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupStat {
    pub label: String,
    pub count: usize,
    /// `NaN` (serialized as `null`) for empty groups.
    pub mean_pm25: f64,
    pub mean_pm10: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupedMeans {
    pub grouping: Grouping,
    pub groups: Vec<GroupStat>,
}

impl GroupedMeans {
    pub fn group(&self, label: &str) -> Option<&GroupStat> {
        self.groups.iter().find(|g| g.label == label)
    }
}

/// Compass sector index (0 = N) for a wind direction in degrees.
pub fn wind_sector(wd: f64) -> usize {
    ((wd + 22.5).rem_euclid(360.0) / 45.0).floor() as usize % 8
}

fn rh_bin(rh: f64) -> usize {
    ((rh / 20.0).floor() as i64).clamp(0, 4) as usize
}

pub fn grouped_means(frame: &ObservationFrame, grouping: Grouping) -> Result<GroupedMeans, StatsError> {
    if frame.is_empty() {
        return Err(StatsError::EmptyFrame);
    }
    let labels: &[&str] = match grouping {
        Grouping::RhBins => &RH_LABELS,
        Grouping::WdSectors => &SECTOR_LABELS,
        Grouping::DayNight => &DAY_NIGHT_LABELS,
    };
    let pm25 = frame.column(Column::Pm25).unwrap();
    let pm10 = frame.column(Column::Pm10).unwrap();
    let rh = frame.column(Column::Rh).unwrap();
    let wd = frame.column(Column::Wd).unwrap();

    let mut sums = vec![(0usize, 0.0f64, 0.0f64); labels.len()];
    for i in 0..frame.len() {
        let g = match grouping {
            Grouping::RhBins => rh_bin(rh[i]),
            Grouping::WdSectors => wind_sector(wd[i]),
            Grouping::DayNight => {
                if (6..18).contains(&frame.timestamps()[i].hour()) {
                    0
                } else {
                    1
                }
            }
        };
        let s = &mut sums[g];
        s.0 += 1;
        s.1 += pm25[i];
        s.2 += pm10[i];
    }
    let groups = labels
        .iter()
        .zip(sums)
        .map(|(label, (count, s25, s10))| {
            let (m25, m10) = if count == 0 {
                (f64::NAN, f64::NAN)
            } else {
                (s25 / count as f64, s10 / count as f64)
            };
            GroupStat {
                label: label.to_string(),
                count,
                mean_pm25: m25,
                mean_pm10: m10,
            }
        })
        .collect();
    Ok(GroupedMeans { grouping, groups })
}
