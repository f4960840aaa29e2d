//! Gated LSTM cell.
//!
//! Gate pre-activations are stacked in the order `[input | forget | candidate | output]`:
//!
//! ```text
//! z = W_x·x + W_h·h_prev + b
//! i = σ(z_i)   f = σ(z_f)   g = act(z_g)   o = σ(z_o)
//! c = f ⊙ c_prev + i ⊙ g
//! h = o ⊙ act(c)
//! ```

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::activation::{sigmoid, Activation};
use super::{glorot_matrix, NnError};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmCellParams {
    /// Input weights, `4H × F`.
    pub w_x: Matrix,
    /// Recurrent weights, `4H × H`.
    pub w_h: Matrix,
    /// Gate biases, `4H`.
    pub b: Vec<f64>,
}

impl LstmCellParams {
    pub fn zeros(input_size: usize, hidden: usize) -> Self {
        LstmCellParams {
            w_x: Matrix::zeros(4 * hidden, input_size),
            w_h: Matrix::zeros(4 * hidden, hidden),
            b: vec![0.0; 4 * hidden],
        }
    }

    /// Glorot-uniform weights, zero biases except a forget-gate bias of 1.
    pub fn init<R: Rng>(input_size: usize, hidden: usize, rng: &mut R) -> Self {
        let mut b = vec![0.0; 4 * hidden];
        b[hidden..2 * hidden].fill(1.0);
        LstmCellParams {
            w_x: glorot_matrix(4 * hidden, input_size, rng),
            w_h: glorot_matrix(4 * hidden, hidden, rng),
            b,
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_h.cols()
    }

    pub fn input_size(&self) -> usize {
        self.w_x.cols()
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.input_size(), self.hidden())
    }

    pub(crate) fn tensors(&self) -> [&[f64]; 3] {
        [self.w_x.as_slice(), self.w_h.as_slice(), &self.b]
    }

    pub(crate) fn tensors_mut(&mut self) -> [&mut [f64]; 3] {
        [self.w_x.as_mut_slice(), self.w_h.as_mut_slice(), &mut self.b]
    }

    pub(crate) fn shape_ok(&self) -> bool {
        let h = self.hidden();
        self.w_x.rows() == 4 * h && self.w_h.shape() == (4 * h, h) && self.b.len() == 4 * h
    }
}

/// Values retained from a forward step for backpropagation.
#[derive(Debug, Clone)]
pub struct CellCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub o: Vec<f64>,
    pub z_g: Vec<f64>,
    pub c: Vec<f64>,
    pub act_c: Vec<f64>,
}

/// One step of the cell. Returns `(h, c, cache)`.
pub fn lstm_cell_forward(
    params: &LstmCellParams,
    act: Activation,
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, CellCache), NnError> {
    let hs = params.hidden();
    if x.len() != params.input_size() || h_prev.len() != hs || c_prev.len() != hs {
        return Err(NnError::ShapeMismatch(format!(
            "cell expects x[{}], h[{hs}], c[{hs}]; got x[{}], h[{}], c[{}]",
            params.input_size(),
            x.len(),
            h_prev.len(),
            c_prev.len()
        )));
    }
    let mut z = params.b.clone();
    params.w_x.matvec_acc(x, &mut z);
    params.w_h.matvec_acc(h_prev, &mut z);

    let i: Vec<f64> = z[..hs].iter().map(|&v| sigmoid(v)).collect();
    let f: Vec<f64> = z[hs..2 * hs].iter().map(|&v| sigmoid(v)).collect();
    let z_g = z[2 * hs..3 * hs].to_vec();
    let g: Vec<f64> = z_g.iter().map(|&v| act.apply(v)).collect();
    let o: Vec<f64> = z[3 * hs..].iter().map(|&v| sigmoid(v)).collect();

    let c: Vec<f64> = (0..hs).map(|k| f[k] * c_prev[k] + i[k] * g[k]).collect();
    let act_c: Vec<f64> = c.iter().map(|&v| act.apply(v)).collect();
    let h: Vec<f64> = (0..hs).map(|k| o[k] * act_c[k]).collect();
    if h.iter().chain(&c).any(|v| !v.is_finite()) {
        return Err(NnError::NonFiniteValue);
    }

    let cache = CellCache {
        x: x.to_vec(),
        h_prev: h_prev.to_vec(),
        c_prev: c_prev.to_vec(),
        i,
        f,
        g,
        o,
        z_g,
        c: c.clone(),
        act_c,
    };
    Ok((h.clone(), c, cache))
}

/// Backpropagates one step.
///
/// `dh` is the total gradient reaching `h` (from the layer output and the next
/// step); `dc_next` is the gradient carried on the cell state. Parameter
/// gradients accumulate into `grads`, the input gradient into `dx`.
/// Returns `(dh_prev, dc_prev)`.
pub fn lstm_cell_backward(
    params: &LstmCellParams,
    act: Activation,
    cache: &CellCache,
    dh: &[f64],
    dc_next: &[f64],
    grads: &mut LstmCellParams,
    dx: &mut [f64],
) -> (Vec<f64>, Vec<f64>) {
    let hs = params.hidden();
    let mut dz = vec![0.0; 4 * hs];
    let mut dc_prev = vec![0.0; hs];
    for k in 0..hs {
        let (i, f, g, o) = (cache.i[k], cache.f[k], cache.g[k], cache.o[k]);
        let d_o = dh[k] * cache.act_c[k];
        let dc = dc_next[k] + dh[k] * o * act.derivative(cache.c[k], cache.act_c[k]);
        dz[k] = dc * g * i * (1.0 - i);
        dz[hs + k] = dc * cache.c_prev[k] * f * (1.0 - f);
        dz[2 * hs + k] = dc * i * act.derivative(cache.z_g[k], g);
        dz[3 * hs + k] = d_o * o * (1.0 - o);
        dc_prev[k] = dc * f;
    }
    grads.w_x.outer_acc(&dz, &cache.x);
    grads.w_h.outer_acc(&dz, &cache.h_prev);
    for (gb, d) in grads.b.iter_mut().zip(&dz) {
        *gb += d;
    }
    params.w_x.matvec_t_acc(&dz, dx);
    let mut dh_prev = vec![0.0; hs];
    params.w_h.matvec_t_acc(&dz, &mut dh_prev);
    (dh_prev, dc_prev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_give_zero_state() {
        let p = LstmCellParams::zeros(3, 2);
        let (h, c, _) = lstm_cell_forward(&p, Activation::Tanh, &[0.3, -1.0, 2.0], &[0.0; 2], &[0.0; 2]).unwrap();
        assert_eq!(h, vec![0.0, 0.0]);
        assert_eq!(c, vec![0.0, 0.0]);
    }

    #[test]
    fn scalar_cell_hand_values() {
        let mut p = LstmCellParams::zeros(1, 1);
        p.w_x.as_mut_slice().copy_from_slice(&[1.0, 1.0, 1.0, 1.0]);
        let (h, c, cache) = lstm_cell_forward(&p, Activation::Tanh, &[0.5], &[0.0], &[0.0]).unwrap();
        let s = 1.0 / (1.0 + (-0.5f64).exp());
        let g = 0.5f64.tanh();
        assert!((cache.i[0] - 0.62246).abs() < 1e-5);
        assert!((cache.g[0] - 0.46212).abs() < 1e-5);
        assert!((c[0] - 0.287649).abs() < 1e-5);
        assert!((h[0] - 0.174270).abs() < 1e-5);
        assert_eq!(c[0], s * g);
        assert_eq!(h[0], s * (s * g).tanh());
    }

    #[test]
    fn shape_mismatch() {
        let p = LstmCellParams::zeros(3, 2);
        assert!(matches!(
            lstm_cell_forward(&p, Activation::Tanh, &[0.0; 2], &[0.0; 2], &[0.0; 2]),
            Err(NnError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn non_finite_input_is_reported() {
        let mut p = LstmCellParams::zeros(1, 1);
        p.w_x.as_mut_slice().fill(1.0);
        assert!(matches!(
            lstm_cell_forward(&p, Activation::Tanh, &[f64::NAN], &[0.0], &[0.0]),
            Err(NnError::NonFiniteValue)
        ));
    }
}
