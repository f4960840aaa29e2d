//! JSON model files.
//!
//! ```text
//! { "format_version": 1,
//!   "architecture": { "lookback", "features": [..], "layers": [{ "kind", "hidden", "activation" }] },
//!   "scaler": { "columns", "mins", "maxs" },
//!   "seed": u64,
//!   "weights": { "layer_<i>": ... } }
//! ```
//!
//! Bi-LSTM layers store `{ "forward": { "w_x", "w_h", "b" }, "backward": {..} }`,
//! dense layers `{ "w", "b" }`; matrices are nested row-major arrays. Floats are
//! written in shortest round-trip form, so loading reproduces every bit.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::bilstm::BiLstmLayerParams;
use super::cell::LstmCellParams;
use super::dense::DenseLayerParams;
use super::network::{BiLstmNetwork, LayerKind, NetworkConfig, NetworkParams};
use super::NnError;
use crate::linalg::Matrix;
use crate::preprocess::ScalerParams;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    architecture: NetworkConfig,
    scaler: Option<ScalerParams>,
    seed: u64,
    weights: BTreeMap<String, LayerWeights>,
}

#[derive(Serialize, Deserialize)]
struct CellWeights {
    w_x: Vec<Vec<f64>>,
    w_h: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LayerWeights {
    Recurrent {
        forward: CellWeights,
        backward: CellWeights,
    },
    Dense {
        w: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
}

fn layer_key(i: usize) -> String {
    format!("layer_{i}")
}

fn cell_to_doc(c: &LstmCellParams) -> CellWeights {
    CellWeights {
        w_x: c.w_x.to_rows(),
        w_h: c.w_h.to_rows(),
        b: c.b.clone(),
    }
}

fn matrix_from_rows(rows: &[Vec<f64>], cols: usize) -> Result<Matrix, NnError> {
    // Empty row lists still need the expected column count.
    if rows.is_empty() {
        return Ok(Matrix::zeros(0, cols));
    }
    Matrix::from_rows(rows).ok_or_else(|| NnError::CorruptFile("ragged weight matrix".into()))
}

fn cell_from_doc(doc: CellWeights, input: usize) -> Result<LstmCellParams, NnError> {
    let hidden = doc.b.len() / 4;
    Ok(LstmCellParams {
        w_x: matrix_from_rows(&doc.w_x, input)?,
        w_h: matrix_from_rows(&doc.w_h, hidden)?,
        b: doc.b,
    })
}

pub fn model_to_json(net: &BiLstmNetwork) -> String {
    let params = net.params();
    let mut weights = BTreeMap::new();
    let (mut r, mut d) = (params.recurrent.iter(), params.dense.iter());
    for (i, spec) in net.config.layers.iter().enumerate() {
        let entry = match spec.kind {
            LayerKind::Bilstm => {
                let l = r.next().expect("layer count matches architecture");
                LayerWeights::Recurrent {
                    forward: cell_to_doc(&l.forward_cell),
                    backward: cell_to_doc(&l.backward_cell),
                }
            }
            LayerKind::Dense => {
                let l = d.next().expect("layer count matches architecture");
                LayerWeights::Dense {
                    w: l.w.to_rows(),
                    b: l.b.clone(),
                }
            }
        };
        weights.insert(layer_key(i), entry);
    }
    let file = ModelFile {
        format_version: FORMAT_VERSION,
        architecture: net.config.clone(),
        scaler: net.scaler.clone(),
        seed: net.seed,
        weights,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("model serializes");
    text.push('\n');
    text
}

pub fn model_from_json(text: &str) -> Result<BiLstmNetwork, NnError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| NnError::CorruptFile(e.to_string()))?;
    match value.get("format_version") {
        None => return Err(NnError::CorruptFile("missing format_version".into())),
        Some(v) if v.as_u64() != Some(FORMAT_VERSION as u64) => {
            return Err(NnError::VersionMismatch {
                found: v.to_string(),
                expected: FORMAT_VERSION,
            });
        }
        Some(_) => {}
    }
    let mut file: ModelFile = serde_json::from_value(value).map_err(|e| NnError::CorruptFile(e.to_string()))?;
    file.architecture
        .validate()
        .map_err(|e| NnError::CorruptFile(e.to_string()))?;

    let mut recurrent = Vec::new();
    let mut dense = Vec::new();
    let mut input = file.architecture.features.len();
    for (i, spec) in file.architecture.layers.iter().enumerate() {
        let key = layer_key(i);
        let entry = file
            .weights
            .remove(&key)
            .ok_or_else(|| NnError::CorruptFile(format!("missing weights for {key}")))?;
        match (spec.kind, entry) {
            (LayerKind::Bilstm, LayerWeights::Recurrent { forward, backward }) => {
                recurrent.push(BiLstmLayerParams {
                    forward_cell: cell_from_doc(forward, input)?,
                    backward_cell: cell_from_doc(backward, input)?,
                    activation: spec.activation,
                });
                input = 2 * spec.hidden;
            }
            (LayerKind::Dense, LayerWeights::Dense { w, b }) => {
                dense.push(DenseLayerParams {
                    w: matrix_from_rows(&w, input)?,
                    b,
                    activation: spec.activation,
                });
                input = spec.hidden;
            }
            _ => return Err(NnError::CorruptFile(format!("{key} does not match its declared kind"))),
        }
    }
    BiLstmNetwork::from_params(
        file.architecture,
        NetworkParams { recurrent, dense },
        file.scaler,
        file.seed,
    )
    .map_err(|e| NnError::CorruptFile(e.to_string()))
}

pub fn save_model(net: &BiLstmNetwork, path: &Path) -> Result<(), NnError> {
    std::fs::write(path, model_to_json(net))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<BiLstmNetwork, NnError> {
    model_from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, LayerSpec};

    fn tiny() -> BiLstmNetwork {
        let config = NetworkConfig {
            lookback: 3,
            features: vec!["a".into(), "b".into()],
            layers: vec![
                LayerSpec::bilstm(2, Activation::Tanh),
                LayerSpec::dense(2, Activation::Sigmoid),
            ],
        };
        BiLstmNetwork::new(config, 11).unwrap()
    }

    #[test]
    fn roundtrip_is_exact() {
        let net = tiny();
        let back = model_from_json(&model_to_json(&net)).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let text = model_to_json(&tiny());
        let cut = &text[..text.len() / 2];
        assert!(matches!(model_from_json(cut), Err(NnError::CorruptFile(_))));
    }

    #[test]
    fn unknown_version() {
        let text = model_to_json(&tiny()).replace("\"format_version\": 1", "\"format_version\": 99");
        assert!(matches!(model_from_json(&text), Err(NnError::VersionMismatch { .. })));
    }

    #[test]
    fn wrong_shapes_are_corrupt() {
        let mut v: serde_json::Value = serde_json::from_str(&model_to_json(&tiny())).unwrap();
        v["weights"]["layer_1"]["b"] = serde_json::json!([0.0, 0.0, 0.0]);
        assert!(matches!(model_from_json(&v.to_string()), Err(NnError::CorruptFile(_))));
    }
}
