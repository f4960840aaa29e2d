//! Bidirectional LSTM layer: one cell scans forward, another backward, and
//! each time step outputs `[h_forward(t), h_backward(t)]`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::cell::{lstm_cell_backward, lstm_cell_forward, CellCache, LstmCellParams};
use super::NnError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiLstmLayerParams {
    pub forward_cell: LstmCellParams,
    pub backward_cell: LstmCellParams,
    /// Replaces tanh for the candidate and cell-output activation; gates stay sigmoid.
    pub activation: Activation,
}

impl BiLstmLayerParams {
    pub fn init<R: Rng>(input_size: usize, hidden: usize, activation: Activation, rng: &mut R) -> Self {
        let forward_cell = LstmCellParams::init(input_size, hidden, rng);
        let backward_cell = LstmCellParams::init(input_size, hidden, rng);
        BiLstmLayerParams {
            forward_cell,
            backward_cell,
            activation,
        }
    }

    pub fn zeros(input_size: usize, hidden: usize, activation: Activation) -> Self {
        BiLstmLayerParams {
            forward_cell: LstmCellParams::zeros(input_size, hidden),
            backward_cell: LstmCellParams::zeros(input_size, hidden),
            activation,
        }
    }

    pub fn hidden(&self) -> usize {
        self.forward_cell.hidden()
    }

    pub fn input_size(&self) -> usize {
        self.forward_cell.input_size()
    }

    pub fn output_size(&self) -> usize {
        2 * self.hidden()
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.input_size(), self.hidden(), self.activation)
    }
}

/// Per-step caches; both vectors are indexed by input time step.
#[derive(Debug, Clone)]
pub struct BiLstmCache {
    forward: Vec<CellCache>,
    backward: Vec<CellCache>,
}

pub fn bilstm_forward(layer: &BiLstmLayerParams, seq: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, BiLstmCache), NnError> {
    let t_len = seq.len();
    if t_len == 0 {
        return Err(NnError::EmptySequence);
    }
    let hs = layer.hidden();
    let act = layer.activation;

    let mut out = vec![vec![0.0; 2 * hs]; t_len];
    let mut fwd = Vec::with_capacity(t_len);
    let (mut h, mut c) = (vec![0.0; hs], vec![0.0; hs]);
    for (t, x) in seq.iter().enumerate() {
        let (h_t, c_t, cache) = lstm_cell_forward(&layer.forward_cell, act, x, &h, &c)?;
        out[t][..hs].copy_from_slice(&h_t);
        fwd.push(cache);
        h = h_t;
        c = c_t;
    }

    let mut bwd: Vec<Option<CellCache>> = vec![None; t_len];
    let (mut h, mut c) = (vec![0.0; hs], vec![0.0; hs]);
    for t in (0..t_len).rev() {
        let (h_t, c_t, cache) = lstm_cell_forward(&layer.backward_cell, act, &seq[t], &h, &c)?;
        out[t][hs..].copy_from_slice(&h_t);
        bwd[t] = Some(cache);
        h = h_t;
        c = c_t;
    }
    let backward = bwd.into_iter().map(|c| c.expect("every step visited")).collect();
    Ok((out, BiLstmCache { forward: fwd, backward }))
}

/// Backpropagation through time for both directions. Returns the gradient
/// with respect to each input vector.
pub fn bilstm_backward(
    layer: &BiLstmLayerParams,
    cache: &BiLstmCache,
    d_out: &[Vec<f64>],
    grads: &mut BiLstmLayerParams,
) -> Vec<Vec<f64>> {
    let t_len = d_out.len();
    let hs = layer.hidden();
    let act = layer.activation;
    let mut d_in = vec![vec![0.0; layer.input_size()]; t_len];

    // The forward cell's recurrence runs 0 → T-1, so gradients flow T-1 → 0.
    let (mut dh_next, mut dc_next) = (vec![0.0; hs], vec![0.0; hs]);
    for t in (0..t_len).rev() {
        let dh: Vec<f64> = (0..hs).map(|k| d_out[t][k] + dh_next[k]).collect();
        let (dh_prev, dc_prev) = lstm_cell_backward(
            &layer.forward_cell,
            act,
            &cache.forward[t],
            &dh,
            &dc_next,
            &mut grads.forward_cell,
            &mut d_in[t],
        );
        dh_next = dh_prev;
        dc_next = dc_prev;
    }

    let (mut dh_next, mut dc_next) = (vec![0.0; hs], vec![0.0; hs]);
    for t in 0..t_len {
        let dh: Vec<f64> = (0..hs).map(|k| d_out[t][hs + k] + dh_next[k]).collect();
        let (dh_prev, dc_prev) = lstm_cell_backward(
            &layer.backward_cell,
            act,
            &cache.backward[t],
            &dh,
            &dc_next,
            &mut grads.backward_cell,
            &mut d_in[t],
        );
        dh_next = dh_prev;
        dc_next = dc_prev;
    }
    d_in
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_step_halves_are_single_cell_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let layer = BiLstmLayerParams::init(2, 3, Activation::Tanh, &mut rng);
        let x = vec![0.4, -0.7];
        let (out, _) = bilstm_forward(&layer, std::slice::from_ref(&x)).unwrap();
        let z = vec![0.0; 3];
        let (hf, _, _) = lstm_cell_forward(&layer.forward_cell, Activation::Tanh, &x, &z, &z).unwrap();
        let (hb, _, _) = lstm_cell_forward(&layer.backward_cell, Activation::Tanh, &x, &z, &z).unwrap();
        assert_eq!(out[0][..3], hf[..]);
        assert_eq!(out[0][3..], hb[..]);
    }

    #[test]
    fn output_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (f, h, t) in [(1, 1, 1), (3, 4, 7), (5, 2, 3)] {
            let layer = BiLstmLayerParams::init(f, h, Activation::Relu, &mut rng);
            let seq: Vec<Vec<f64>> = (0..t).map(|k| vec![k as f64 * 0.1; f]).collect();
            let (out, _) = bilstm_forward(&layer, &seq).unwrap();
            assert_eq!(out.len(), t);
            assert!(out.iter().all(|v| v.len() == 2 * h));
        }
    }

    #[test]
    fn empty_sequence() {
        let layer = BiLstmLayerParams::zeros(2, 2, Activation::Tanh);
        assert!(matches!(bilstm_forward(&layer, &[]), Err(NnError::EmptySequence)));
    }
}
