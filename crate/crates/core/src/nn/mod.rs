//! Bidirectional LSTM forecaster built from scratch: cells, layers, the
//! network, backpropagation through time, Adam, training, inference and
//! persistence.

pub mod activation;
pub mod adam;
pub mod bilstm;
pub mod cell;
pub mod dense;
pub mod forecast;
pub mod loss;
pub mod network;
pub mod persist;
pub mod train;

use rand::Rng;
use thiserror::Error;

use crate::linalg::Matrix;

pub use activation::Activation;
pub use adam::{AdamConfig, AdamState};
pub use bilstm::{bilstm_backward, bilstm_forward, BiLstmLayerParams};
pub use cell::{lstm_cell_backward, lstm_cell_forward, LstmCellParams};
pub use dense::DenseLayerParams;
pub use forecast::{predict, predict_scaled, predict_with, unscale_targets, Forecast};
pub use loss::mse_loss;
pub use network::{BiLstmNetwork, ForwardCache, LayerKind, LayerSpec, NetworkConfig, NetworkParams};
pub use persist::{load_model, model_from_json, model_to_json, save_model, FORMAT_VERSION};
pub use train::{batch_gradients, train, EpochLog, TrainingConfig, TrainingLog};

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite value in forward pass")]
    NonFiniteValue,
    #[error("empty input sequence")]
    EmptySequence,
    #[error("forward cache does not match the current parameters")]
    StaleCache,
    #[error("training dataset is empty")]
    EmptyDataset,
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("need {needed} rows of history, got {available}")]
    InsufficientHistory { needed: usize, available: usize },
    #[error("model file has format version {found}, expected {expected}")]
    VersionMismatch { found: String, expected: u32 },
    #[error("corrupt model file: {0}")]
    CorruptFile(String),
    #[error("model has no embedded scaler")]
    MissingScaler,
    #[error("invalid network configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Aqi(#[from] crate::aqi::AqiError),
    #[error("model file I/O: {0}")]
    Io(#[from] std::io::Error),
}

/// Glorot-uniform matrix of shape `fan_out × fan_in`.
pub(crate) fn glorot_matrix<R: Rng>(fan_out: usize, fan_in: usize, rng: &mut R) -> Matrix {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let data = (0..fan_out * fan_in).map(|_| rng.gen_range(-limit..limit)).collect();
    Matrix::from_vec(fan_out, fan_in, data).expect("length matches shape")
}
