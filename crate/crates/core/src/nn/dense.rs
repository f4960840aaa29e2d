use rand::Rng;
use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::glorot_matrix;
use crate::linalg::Matrix;

/// Fully connected layer `y = g(W·x + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayerParams {
    /// `units × inputs`.
    pub w: Matrix,
    pub b: Vec<f64>,
    pub activation: Activation,
}

#[derive(Debug, Clone)]
pub struct DenseCache {
    x: Vec<f64>,
    z: Vec<f64>,
    y: Vec<f64>,
}

impl DenseLayerParams {
    pub fn init<R: Rng>(inputs: usize, units: usize, activation: Activation, rng: &mut R) -> Self {
        DenseLayerParams {
            w: glorot_matrix(units, inputs, rng),
            b: vec![0.0; units],
            activation,
        }
    }

    pub fn zeros(inputs: usize, units: usize, activation: Activation) -> Self {
        DenseLayerParams {
            w: Matrix::zeros(units, inputs),
            b: vec![0.0; units],
            activation,
        }
    }

    pub fn units(&self) -> usize {
        self.w.rows()
    }

    pub fn inputs(&self) -> usize {
        self.w.cols()
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.inputs(), self.units(), self.activation)
    }

    pub fn forward(&self, x: &[f64]) -> (Vec<f64>, DenseCache) {
        let mut z = self.b.clone();
        self.w.matvec_acc(x, &mut z);
        let y: Vec<f64> = z.iter().map(|&v| self.activation.apply(v)).collect();
        (y.clone(), DenseCache { x: x.to_vec(), z, y })
    }

    /// Accumulates parameter gradients and returns the input gradient.
    pub fn backward(&self, cache: &DenseCache, dy: &[f64], grads: &mut DenseLayerParams) -> Vec<f64> {
        let dz: Vec<f64> = dy
            .iter()
            .zip(cache.z.iter().zip(&cache.y))
            .map(|(d, (&z, &y))| d * self.activation.derivative(z, y))
            .collect();
        grads.w.outer_acc(&dz, &cache.x);
        for (gb, d) in grads.b.iter_mut().zip(&dz) {
            *gb += d;
        }
        let mut dx = vec![0.0; self.inputs()];
        self.w.matvec_t_acc(&dz, &mut dx);
        dx
    }
}
