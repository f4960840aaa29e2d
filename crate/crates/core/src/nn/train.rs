use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::{AdamConfig, AdamState};
use super::network::{BiLstmNetwork, NetworkParams};
use super::NnError;
use crate::preprocess::WindowedDataset;

/// Samples per parallel work unit. Fixed so the gradient summation order,
/// and therefore the result, does not depend on the thread count.
const GRAD_CHUNK: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Shuffle sample order each epoch. Off by default to keep temporal order.
    pub shuffle: bool,
    pub adam: AdamConfig,
    /// Global gradient-norm clip; `None` disables clipping.
    pub clip_norm: Option<f64>,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            epochs: 20,
            batch_size: 32,
            seed: 7,
            shuffle: false,
            adam: AdamConfig::default(),
            clip_norm: Some(5.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochLog {
    pub epoch: usize,
    /// Mean per-sample MSE over the epoch, in scaled units.
    pub mean_loss: f64,
    pub seconds: f64,
    /// Batches whose gradient norm exceeded the clip threshold.
    pub clipped_batches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochLog>,
    pub steps_per_epoch: usize,
    pub samples: usize,
}

impl TrainingLog {
    pub fn losses(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.mean_loss).collect()
    }

    /// `epoch,mean_loss,seconds` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,mean_loss,seconds\n");
        for e in &self.epochs {
            out.push_str(&format!("{},{:e},{:.3}\n", e.epoch, e.mean_loss, e.seconds));
        }
        out
    }
}

/// Sum of squared errors and accumulated gradients for the given samples,
/// with each output gradient scaled by `grad_scale`.
fn accumulate(
    net: &BiLstmNetwork,
    data: &WindowedDataset,
    samples: &[usize],
    grad_scale: f64,
) -> Result<(f64, NetworkParams), NnError> {
    let mut grads = net.params().zeros_like();
    let mut sse = 0.0;
    for &i in samples {
        let (y_hat, cache) = net.forward(&data.inputs[i])?;
        let y = data.targets[i];
        let e = [y_hat[0] - y[0], y_hat[1] - y[1]];
        sse += e[0] * e[0] + e[1] * e[1];
        net.backward_into(&cache, &[2.0 * e[0] * grad_scale, 2.0 * e[1] * grad_scale], &mut grads)?;
    }
    Ok((sse, grads))
}

/// Batch MSE and its gradient, computed in parallel with a fixed reduction order.
pub fn batch_gradients(
    net: &BiLstmNetwork,
    data: &WindowedDataset,
    batch: &[usize],
) -> Result<(f64, NetworkParams), NnError> {
    let n_outputs = (2 * batch.len()) as f64;
    let parts = batch
        .par_chunks(GRAD_CHUNK)
        .map(|chunk| accumulate(net, data, chunk, 1.0 / n_outputs))
        .collect::<Result<Vec<_>, _>>()?;
    let mut iter = parts.into_iter();
    let (mut sse, mut grads) = iter.next().ok_or(NnError::EmptyDataset)?;
    for (s, g) in iter {
        sse += s;
        grads.add_assign(&g);
    }
    Ok((sse / n_outputs, grads))
}

/// Mini-batch training with Adam on the MSE loss.
///
/// Deterministic for a given network, dataset and config: batches follow
/// sample order (or a seeded shuffle), and gradients are reduced in a fixed
/// order regardless of parallelism.
pub fn train(net: &mut BiLstmNetwork, data: &WindowedDataset, config: &TrainingConfig) -> Result<TrainingLog, NnError> {
    if config.epochs == 0 || config.batch_size == 0 {
        return Err(NnError::InvalidConfig(
            "epochs and batch_size must be at least 1".into(),
        ));
    }
    if data.is_empty() {
        return Err(NnError::EmptyDataset);
    }
    if data.lookback != net.lookback() || data.feature_order != net.features() {
        return Err(NnError::ShapeMismatch(format!(
            "dataset has lookback {} and features {:?}; network expects {} and {:?}",
            data.lookback,
            data.feature_order,
            net.lookback(),
            net.features()
        )));
    }

    let shapes: Vec<usize> = net.params().tensors().iter().map(|t| t.len()).collect();
    let mut adam = AdamState::new(config.adam, &shapes);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let steps_per_epoch = data.len().div_ceil(config.batch_size);
    let mut log = TrainingLog {
        epochs: Vec::with_capacity(config.epochs),
        steps_per_epoch,
        samples: data.len(),
    };

    for epoch in 1..=config.epochs {
        let started = Instant::now();
        if config.shuffle {
            order.shuffle(&mut rng);
        }
        let mut weighted_loss = 0.0;
        let mut clipped = 0;
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            let (loss, mut grads) = batch_gradients(net, data, batch)?;
            if !loss.is_finite() || !grads.all_finite() {
                return Err(NnError::NonFiniteLoss { epoch, batch: b + 1 });
            }
            weighted_loss += loss * batch.len() as f64;
            if let Some(max_norm) = config.clip_norm {
                let norm = grads.global_norm();
                if norm > max_norm {
                    grads.scale(max_norm / norm);
                    clipped += 1;
                    log::debug!(
                        "epoch {epoch} batch {}: gradient norm {norm:.3} clipped to {max_norm}",
                        b + 1
                    );
                }
            }
            let mut params = net.params_mut().tensors_mut();
            adam.step(&mut params, &grads.tensors())?;
        }
        let entry = EpochLog {
            epoch,
            mean_loss: weighted_loss / data.len() as f64,
            seconds: started.elapsed().as_secs_f64(),
            clipped_batches: clipped,
        };
        log::info!(
            "epoch {}/{} - {} steps - {:.1}s - loss: {:.4e}{}",
            epoch,
            config.epochs,
            steps_per_epoch,
            entry.seconds,
            entry.mean_loss,
            if clipped > 0 {
                format!(" ({clipped} batches clipped)")
            } else {
                String::new()
            }
        );
        log.epochs.push(entry);
    }
    Ok(log)
}
