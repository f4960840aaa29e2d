use serde::Serialize;

use super::StatsError;
use crate::timeseries::ObservationFrame;

/// Symmetric matrix of Pearson coefficients. Pairs involving a constant
/// column are undefined and stored as `NaN` (serialized as `null`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub columns: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.columns.iter().position(|c| c == a)?;
        let j = self.columns.iter().position(|c| c == b)?;
        Some(self.matrix[i][j])
    }
}

/// Pearson correlation of two equal-length series; `None` if either is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    assert_eq!(a.len(), b.len(), "pearson: length mismatch");
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

pub fn pearson_corr_matrix<S: AsRef<str>>(
    frame: &ObservationFrame,
    columns: &[S],
) -> Result<CorrelationMatrix, StatsError> {
    if frame.len() < 2 {
        return Err(StatsError::TooFewRows {
            needed: 2,
            actual: frame.len(),
        });
    }
    let data = columns
        .iter()
        .map(|c| {
            frame
                .column_by_name(c.as_ref())
                .ok_or_else(|| StatsError::UnknownColumn(c.as_ref().to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let constant: Vec<bool> = data.iter().map(|d| d.iter().all(|&v| v == d[0])).collect();

    let k = data.len();
    let mut matrix = vec![vec![f64::NAN; k]; k];
    for i in 0..k {
        if !constant[i] {
            matrix[i][i] = 1.0;
        }
        for j in i + 1..k {
            let r = pearson(data[i], data[j]).unwrap_or(f64::NAN);
            matrix[i][j] = r;
            matrix[j][i] = r;
        }
    }
    Ok(CorrelationMatrix {
        columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
        matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_and_anti_correlation() {
        let x = [1.0, 4.0, 2.0, 8.0, 5.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn hand_computed_value() {
        // Σdxdy = 3, Σdx² = 2, Σdy² = 14/3.
        let r = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
        assert!((r - 3.0 / (28.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((r - 0.9820).abs() < 1e-4);
    }

    #[test]
    fn constant_is_undefined() {
        assert_eq!(pearson(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]), None);
    }
}
