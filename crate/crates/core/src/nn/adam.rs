//! Adam with bias correction.

use serde::{Deserialize, Serialize};

use super::NnError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment estimates, one buffer per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    /// Zeroed moments for tensors of the given lengths.
    pub fn new(config: AdamConfig, shapes: &[usize]) -> Self {
        AdamState {
            config,
            t: 0,
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn first_moments(&self) -> &[Vec<f64>] {
        &self.m
    }

    pub fn second_moments(&self) -> &[Vec<f64>] {
        &self.v
    }

    /// One update of every tensor in `params` from the matching `grads`.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<(), NnError> {
        let shapes_ok = params.len() == self.m.len()
            && grads.len() == self.m.len()
            && params
                .iter()
                .zip(grads)
                .zip(&self.m)
                .all(|((p, g), m)| p.len() == m.len() && g.len() == m.len());
        if !shapes_ok {
            return Err(NnError::ShapeMismatch(
                "adam: parameter/gradient/state shapes differ".into(),
            ));
        }
        self.t += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let bc1 = 1.0 - beta1.powi(self.t as i32);
        let bc2 = 1.0 - beta2.powi(self.t as i32);
        for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            for k in 0..p.len() {
                let gk = g[k];
                m[k] = beta1 * m[k] + (1.0 - beta1) * gk;
                v[k] = beta2 * v[k] + (1.0 - beta2) * gk * gk;
                let m_hat = m[k] / bc1;
                let v_hat = v[k] / bc2;
                p[k] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(theta: &mut [f64], grads: &[f64], state: &mut AdamState) {
        state.step(&mut [theta], &[grads]).unwrap();
    }

    #[test]
    fn first_step_from_zero() {
        let mut s = AdamState::new(AdamConfig::default(), &[1]);
        let mut theta = [0.0];
        run(&mut theta, &[1.0], &mut s);
        // m̂ = 1, v̂ = 1, so the step is lr / (1 + ε).
        assert!((theta[0] - (-1e-3 / (1.0 + 1e-8))).abs() < 1e-18);
        assert!((theta[0] + 9.99999990e-4).abs() < 1e-12);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut s = AdamState::new(AdamConfig::default(), &[3]);
        let mut theta = [0.5, -1.0, 2.0];
        run(&mut theta, &[0.0; 3], &mut s);
        assert_eq!(theta, [0.5, -1.0, 2.0]);
    }

    #[test]
    fn repeated_gradient_steps_by_lr() {
        let mut s = AdamState::new(AdamConfig::default(), &[1]);
        let mut theta = [0.0];
        run(&mut theta, &[1.0], &mut s);
        let after_one = theta[0];
        run(&mut theta, &[1.0], &mut s);
        // At t = 2 both corrected moments are exactly 1 again.
        assert!(((after_one - theta[0]) - 1e-3 / (1.0 + 1e-8)).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch() {
        let mut s = AdamState::new(AdamConfig::default(), &[2]);
        let mut theta = [0.0; 3];
        assert!(s.step(&mut [&mut theta], &[&[0.0; 3]]).is_err());
    }
}
