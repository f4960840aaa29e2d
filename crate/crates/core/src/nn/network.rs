use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::bilstm::{bilstm_backward, bilstm_forward, BiLstmCache, BiLstmLayerParams};
use super::dense::{DenseCache, DenseLayerParams};
use super::NnError;
use crate::linalg::Matrix;
use crate::preprocess::ScalerParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    Bilstm,
    Dense,
}

/// One layer of the architecture. For Bi-LSTM layers `hidden` is the size of
/// each direction; for dense layers it is the number of units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub hidden: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn bilstm(hidden: usize, activation: Activation) -> Self {
        LayerSpec {
            kind: LayerKind::Bilstm,
            hidden,
            activation,
        }
    }

    pub fn dense(units: usize, activation: Activation) -> Self {
        LayerSpec {
            kind: LayerKind::Dense,
            hidden: units,
            activation,
        }
    }
}

/// Architecture: Bi-LSTM layers over the window, then dense layers on the
/// last time step. The final dense layer produces `(pm25, pm10)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub lookback: usize,
    pub features: Vec<String>,
    pub layers: Vec<LayerSpec>,
}

impl NetworkConfig {
    /// Bi-LSTM(20, relu) → Bi-LSTM(10, tanh) → Dense(1024, relu) → Dense(2, sigmoid).
    pub fn standard(lookback: usize, features: Vec<String>) -> Self {
        NetworkConfig {
            lookback,
            features,
            layers: vec![
                LayerSpec::bilstm(20, Activation::Relu),
                LayerSpec::bilstm(10, Activation::Tanh),
                LayerSpec::dense(1024, Activation::Relu),
                LayerSpec::dense(2, Activation::Sigmoid),
            ],
        }
    }

    pub fn validate(&self) -> Result<(), NnError> {
        let bad = |m: &str| Err(NnError::InvalidConfig(m.to_string()));
        if self.lookback == 0 {
            return bad("lookback must be at least 1");
        }
        if self.features.is_empty() {
            return bad("at least one input feature is required");
        }
        let n_rec = self.layers.iter().take_while(|l| l.kind == LayerKind::Bilstm).count();
        if n_rec == 0 {
            return bad("the first layer must be a bilstm layer");
        }
        if self.layers[n_rec..].iter().any(|l| l.kind != LayerKind::Dense) || n_rec == self.layers.len() {
            return bad("bilstm layers must be followed by one or more dense layers");
        }
        if self.layers.iter().any(|l| l.hidden == 0) {
            return bad("layer sizes must be positive");
        }
        if self.layers.last().map(|l| l.hidden) != Some(2) {
            return bad("the output layer must have 2 units (pm25, pm10)");
        }
        Ok(())
    }
}

/// Every trainable tensor of the network. Also used to hold gradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub recurrent: Vec<BiLstmLayerParams>,
    pub dense: Vec<DenseLayerParams>,
}

impl NetworkParams {
    pub fn zeros_like(&self) -> Self {
        NetworkParams {
            recurrent: self.recurrent.iter().map(BiLstmLayerParams::zeros_like).collect(),
            dense: self.dense.iter().map(DenseLayerParams::zeros_like).collect(),
        }
    }

    /// Tensors in a fixed order: per Bi-LSTM layer forward then backward
    /// `(W_x, W_h, b)`, then per dense layer `(W, b)`.
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out = Vec::new();
        for l in &self.recurrent {
            out.extend(l.forward_cell.tensors());
            out.extend(l.backward_cell.tensors());
        }
        for d in &self.dense {
            out.push(d.w.as_slice());
            out.push(&d.b);
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        for l in &mut self.recurrent {
            out.extend(l.forward_cell.tensors_mut());
            out.extend(l.backward_cell.tensors_mut());
        }
        for d in &mut self.dense {
            out.push(d.w.as_mut_slice());
            out.push(&mut d.b);
        }
        out
    }

    pub fn num_parameters(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn add_assign(&mut self, other: &NetworkParams) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= factor);
        }
    }

    pub fn global_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|t| t.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }
}

/// Intermediate values from [`BiLstmNetwork::forward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    recurrent: Vec<BiLstmCache>,
    dense: Vec<DenseCache>,
    steps: usize,
    version: u64,
}

/// The forecaster: architecture, weights, and the scaler its inputs were fitted with.
#[derive(Debug, Clone)]
pub struct BiLstmNetwork {
    pub config: NetworkConfig,
    params: NetworkParams,
    pub scaler: Option<ScalerParams>,
    pub seed: u64,
    version: u64,
}

impl PartialEq for BiLstmNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.params == other.params
            && self.scaler == other.scaler
            && self.seed == other.seed
    }
}

impl BiLstmNetwork {
    /// Seeded Glorot initialization.
    pub fn new(config: NetworkConfig, seed: u64) -> Result<Self, NnError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut input = config.features.len();
        let mut recurrent = Vec::new();
        let mut dense = Vec::new();
        for spec in &config.layers {
            match spec.kind {
                LayerKind::Bilstm => {
                    recurrent.push(BiLstmLayerParams::init(input, spec.hidden, spec.activation, &mut rng));
                    input = 2 * spec.hidden;
                }
                LayerKind::Dense => {
                    dense.push(DenseLayerParams::init(input, spec.hidden, spec.activation, &mut rng));
                    input = spec.hidden;
                }
            }
        }
        Ok(BiLstmNetwork {
            config,
            params: NetworkParams { recurrent, dense },
            scaler: None,
            seed,
            version: 0,
        })
    }

    /// Assembles a network from explicit parameters, checking that shapes chain.
    pub fn from_params(
        config: NetworkConfig,
        params: NetworkParams,
        scaler: Option<ScalerParams>,
        seed: u64,
    ) -> Result<Self, NnError> {
        config.validate()?;
        let expected = BiLstmNetwork::new(config.clone(), 0)?;
        let shapes = |p: &NetworkParams| p.tensors().iter().map(|t| t.len()).collect::<Vec<_>>();
        let same_layout = params.recurrent.len() == expected.params.recurrent.len()
            && params.dense.len() == expected.params.dense.len()
            && shapes(&params) == shapes(&expected.params)
            && params.recurrent.iter().zip(&expected.params.recurrent).all(|(a, b)| {
                a.forward_cell.shape_ok()
                    && a.backward_cell.shape_ok()
                    && a.hidden() == b.hidden()
                    && a.input_size() == b.input_size()
                    && a.backward_cell.hidden() == b.hidden()
                    && a.backward_cell.input_size() == b.input_size()
                    && a.activation == b.activation
            })
            && params
                .dense
                .iter()
                .zip(&expected.params.dense)
                .all(|(a, b)| a.w.shape() == b.w.shape() && a.b.len() == b.b.len() && a.activation == b.activation);
        if !same_layout {
            return Err(NnError::ShapeMismatch(
                "parameters do not match the architecture".into(),
            ));
        }
        if !params.all_finite() {
            return Err(NnError::NonFiniteValue);
        }
        Ok(BiLstmNetwork {
            config,
            params,
            scaler,
            seed,
            version: 0,
        })
    }

    pub fn with_scaler(mut self, scaler: ScalerParams) -> Self {
        self.scaler = Some(scaler);
        self
    }

    pub fn params(&self) -> &NetworkParams {
        &self.params
    }

    /// Mutable access to the weights. Invalidates outstanding forward caches.
    pub fn params_mut(&mut self) -> &mut NetworkParams {
        self.version += 1;
        &mut self.params
    }

    pub fn lookback(&self) -> usize {
        self.config.lookback
    }

    pub fn features(&self) -> &[String] {
        &self.config.features
    }

    /// Runs a `lookback × features` window through the network.
    /// Returns the scaled `(pm25, pm10)` prediction and the cache for [`Self::backward`].
    pub fn forward(&self, window: &Matrix) -> Result<([f64; 2], ForwardCache), NnError> {
        self.forward_steps(window, true)
    }

    /// Like [`Self::forward`] but accepts any sequence length ≥ 1.
    pub fn forward_any_length(&self, window: &Matrix) -> Result<([f64; 2], ForwardCache), NnError> {
        self.forward_steps(window, false)
    }

    fn forward_steps(&self, window: &Matrix, strict: bool) -> Result<([f64; 2], ForwardCache), NnError> {
        let f = self.config.features.len();
        if window.cols() != f || (strict && window.rows() != self.config.lookback) {
            return Err(NnError::ShapeMismatch(format!(
                "window is {}×{}, network expects {}×{}",
                window.rows(),
                window.cols(),
                self.config.lookback,
                f
            )));
        }
        let mut seq = window.to_rows();
        let mut recurrent = Vec::with_capacity(self.params.recurrent.len());
        for layer in &self.params.recurrent {
            let (out, cache) = bilstm_forward(layer, &seq)?;
            recurrent.push(cache);
            seq = out;
        }
        let mut x = seq.pop().ok_or(NnError::EmptySequence)?;
        let mut dense = Vec::with_capacity(self.params.dense.len());
        for layer in &self.params.dense {
            let (y, cache) = layer.forward(&x);
            dense.push(cache);
            x = y;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(NnError::NonFiniteValue);
        }
        let cache = ForwardCache {
            recurrent,
            dense,
            steps: window.rows(),
            version: self.version,
        };
        Ok(([x[0], x[1]], cache))
    }

    pub fn predict_window(&self, window: &Matrix) -> Result<[f64; 2], NnError> {
        self.forward(window).map(|(y, _)| y)
    }

    /// Gradients of every parameter given `d_output = ∂L/∂ŷ`.
    pub fn backward(&self, cache: &ForwardCache, d_output: &[f64; 2]) -> Result<NetworkParams, NnError> {
        let mut grads = self.params.zeros_like();
        self.backward_into(cache, d_output, &mut grads)?;
        Ok(grads)
    }

    /// Accumulates gradients into `grads`.
    pub fn backward_into(
        &self,
        cache: &ForwardCache,
        d_output: &[f64; 2],
        grads: &mut NetworkParams,
    ) -> Result<(), NnError> {
        if cache.version != self.version
            || cache.recurrent.len() != self.params.recurrent.len()
            || cache.dense.len() != self.params.dense.len()
        {
            return Err(NnError::StaleCache);
        }
        let mut d = d_output.to_vec();
        for ((layer, c), g) in self.params.dense.iter().zip(&cache.dense).zip(&mut grads.dense).rev() {
            d = layer.backward(c, &d, g);
        }
        // Only the last time step feeds the dense head.
        let last = self.params.recurrent.last().expect("validated").output_size();
        let mut d_seq = vec![vec![0.0; last]; cache.steps];
        d_seq[cache.steps - 1] = d;
        for ((layer, c), g) in self
            .params
            .recurrent
            .iter()
            .zip(&cache.recurrent)
            .zip(&mut grads.recurrent)
            .rev()
        {
            d_seq = bilstm_backward(layer, c, &d_seq, g);
        }
        Ok(())
    }
}
