//! MacKinnon (1994) regression-surface p-values for the Dickey-Fuller
//! τ statistic, constant-only case with one integrated variable.

use statrs::distribution::{ContinuousCDF, Normal};

const TAU_MAX_C: f64 = 2.74;
const TAU_MIN_C: f64 = -18.83;
const TAU_STAR_C: f64 = -1.61;

/// Polynomial in τ for the lower tail, lowest degree first.
const TAU_C_SMALLP: [f64; 3] = [2.1659, 1.4412, 3.8269e-2];
/// Polynomial in τ for the upper tail, lowest degree first.
const TAU_C_LARGEP: [f64; 4] = [1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2];

/// Approximate p-value of an ADF statistic (regression with intercept, no trend).
pub fn mackinnon_p_constant(stat: f64) -> f64 {
    if stat > TAU_MAX_C {
        return 1.0;
    }
    if stat < TAU_MIN_C {
        return 0.0;
    }
    let z = if stat <= TAU_STAR_C {
        horner(&TAU_C_SMALLP, stat)
    } else {
        horner(&TAU_C_LARGEP, stat)
    };
    Normal::new(0.0, 1.0).expect("standard normal").cdf(z)
}

fn horner(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
}
