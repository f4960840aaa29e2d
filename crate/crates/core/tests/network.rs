use aqf::aqi::{AqiMode, BreakpointTable};
use aqf::linalg::Matrix;
use aqf::nn::train::batch_gradients;
use aqf::nn::{
    bilstm_forward, predict, predict_with, train, Activation, BiLstmLayerParams, BiLstmNetwork, LayerSpec,
    NetworkConfig, NnError, TrainingConfig,
};
use aqf::preprocess::{training_windows, WindowedDataset};
use aqf::synth::{synth_generate, SynthSpec};
use aqf::timeseries::Column;
use chrono::Duration;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_windows(seed: u64, samples: usize, lookback: usize, features: usize) -> WindowedDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    WindowedDataset {
        inputs: (0..samples)
            .map(|_| {
                Matrix::from_vec(
                    lookback,
                    features,
                    (0..lookback * features).map(|_| rng.gen_range(0.0..1.0)).collect(),
                )
                .unwrap()
            })
            .collect(),
        targets: (0..samples)
            .map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
            .collect(),
        feature_order: (0..features).map(|i| format!("f{i}")).collect(),
        lookback,
    }
}

fn config(lookback: usize, features: usize, layers: Vec<LayerSpec>) -> NetworkConfig {
    NetworkConfig {
        lookback,
        features: (0..features).map(|i| format!("f{i}")).collect(),
        layers,
    }
}

/// The full layer stack in miniature: two Bi-LSTM layers with relu and tanh,
/// a relu dense layer and the sigmoid head, over a batch spanning several
/// reduction chunks.
#[test]
fn stacked_gradients_match_finite_differences() {
    let cfg = config(
        5,
        3,
        vec![
            LayerSpec::bilstm(4, Activation::Relu),
            LayerSpec::bilstm(3, Activation::Tanh),
            LayerSpec::dense(6, Activation::Relu),
            LayerSpec::dense(2, Activation::Sigmoid),
        ],
    );
    let mut net = BiLstmNetwork::new(cfg, 17).unwrap();
    let data = random_windows(4, 9, 5, 3);
    let batch: Vec<usize> = (0..9).collect();
    let (_, grads) = batch_gradients(&net, &data, &batch).unwrap();
    let analytic: Vec<Vec<f64>> = grads.tensors().iter().map(|t| t.to_vec()).collect();

    let h = 1e-5;
    let mut failures = Vec::new();
    for (ti, g) in analytic.iter().enumerate() {
        for (k, &a) in g.iter().enumerate() {
            let x = net.params().tensors()[ti][k];
            net.params_mut().tensors_mut()[ti][k] = x + h;
            let plus = batch_gradients(&net, &data, &batch).unwrap().0;
            net.params_mut().tensors_mut()[ti][k] = x - h;
            let minus = batch_gradients(&net, &data, &batch).unwrap().0;
            net.params_mut().tensors_mut()[ti][k] = x;
            let n = (plus - minus) / (2.0 * h);
            let diff = (a - n).abs();
            if diff > 1e-6 && diff / a.abs().max(n.abs()) > 1e-4 {
                failures.push((ti, k, a, n));
            }
        }
    }
    assert!(
        failures.is_empty(),
        "{} mismatches, first {:?}",
        failures.len(),
        failures.first()
    );
}

#[test]
fn backward_direction_sees_the_future() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let layer = BiLstmLayerParams::init(2, 3, Activation::Tanh, &mut rng);
    let seq: Vec<Vec<f64>> = (0..6)
        .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
        .collect();
    let (base, _) = bilstm_forward(&layer, &seq).unwrap();
    let mut changed = seq.clone();
    changed[5] = vec![2.0, -2.0];
    let (out, _) = bilstm_forward(&layer, &changed).unwrap();
    // Forward halves before the change are untouched; backward halves all move.
    for t in 0..5 {
        assert_eq!(out[t][..3], base[t][..3]);
        assert!(out[t][3..].iter().zip(&base[t][3..]).any(|(a, b)| a != b));
    }
}

#[test]
fn zero_head_outputs_one_half() {
    let cfg = config(
        4,
        2,
        vec![
            LayerSpec::bilstm(3, Activation::Tanh),
            LayerSpec::dense(2, Activation::Sigmoid),
        ],
    );
    let mut net = BiLstmNetwork::new(cfg, 5).unwrap();
    let dense = net.params_mut().dense.last_mut().unwrap();
    dense.w.as_mut_slice().fill(0.0);
    dense.b.fill(0.0);
    let y = net
        .predict_window(&Matrix::from_vec(4, 2, vec![0.3; 8]).unwrap())
        .unwrap();
    assert_eq!(y, [0.5, 0.5]);
}

#[test]
fn window_shape_is_checked() {
    let net = BiLstmNetwork::new(
        config(
            4,
            2,
            vec![
                LayerSpec::bilstm(2, Activation::Tanh),
                LayerSpec::dense(2, Activation::Sigmoid),
            ],
        ),
        1,
    )
    .unwrap();
    assert!(matches!(
        net.predict_window(&Matrix::zeros(3, 2)),
        Err(NnError::ShapeMismatch(_))
    ));
    assert!(matches!(
        net.predict_window(&Matrix::zeros(4, 3)),
        Err(NnError::ShapeMismatch(_))
    ));
    assert!(net.forward_any_length(&Matrix::zeros(7, 2)).is_ok());
}

#[test]
fn stale_cache_is_rejected() {
    let mut net = BiLstmNetwork::new(
        config(
            3,
            1,
            vec![
                LayerSpec::bilstm(2, Activation::Tanh),
                LayerSpec::dense(2, Activation::Sigmoid),
            ],
        ),
        2,
    )
    .unwrap();
    let (_, cache) = net.forward(&Matrix::zeros(3, 1)).unwrap();
    net.params_mut().dense[0].b[0] += 0.1;
    assert!(matches!(net.backward(&cache, &[1.0, 1.0]), Err(NnError::StaleCache)));
}

#[test]
fn invalid_architectures() {
    let bad = [
        vec![LayerSpec::dense(2, Activation::Sigmoid)],
        vec![LayerSpec::bilstm(2, Activation::Tanh)],
        vec![
            LayerSpec::bilstm(2, Activation::Tanh),
            LayerSpec::dense(3, Activation::Sigmoid),
        ],
        vec![
            LayerSpec::bilstm(2, Activation::Tanh),
            LayerSpec::dense(4, Activation::Relu),
            LayerSpec::bilstm(2, Activation::Tanh),
            LayerSpec::dense(2, Activation::Sigmoid),
        ],
    ];
    for layers in bad {
        assert!(matches!(
            BiLstmNetwork::new(config(3, 1, layers), 0),
            Err(NnError::InvalidConfig(_))
        ));
    }
}

#[test]
fn training_reduces_loss_on_a_learnable_target() {
    // Target: mean of the last row, twice.
    let mut data = random_windows(8, 64, 4, 2);
    for (x, y) in data.inputs.iter().zip(data.targets.iter_mut()) {
        let m = (x.get(3, 0) + x.get(3, 1)) / 2.0;
        *y = [m, m];
    }
    let cfg = config(
        4,
        2,
        vec![
            LayerSpec::bilstm(6, Activation::Tanh),
            LayerSpec::dense(16, Activation::Relu),
            LayerSpec::dense(2, Activation::Sigmoid),
        ],
    );
    let mut net = BiLstmNetwork::new(
        NetworkConfig {
            features: data.feature_order.clone(),
            ..cfg
        },
        3,
    )
    .unwrap();
    let log = train(
        &mut net,
        &data,
        &TrainingConfig {
            epochs: 40,
            batch_size: 8,
            ..Default::default()
        },
    )
    .unwrap();
    let losses = log.losses();
    assert!(losses.windows(2).all(|w| w[1] < w[0]), "{losses:?}");
    assert!(losses[39] < 0.3 * losses[0], "{losses:?}");
    assert_eq!(log.steps_per_epoch, 8);
}

#[test]
fn non_finite_targets_abort_training() {
    let mut data = random_windows(9, 20, 3, 1);
    data.targets[13] = [f64::NAN, 0.0];
    let cfg = config(
        3,
        1,
        vec![
            LayerSpec::bilstm(2, Activation::Tanh),
            LayerSpec::dense(2, Activation::Sigmoid),
        ],
    );
    let mut net = BiLstmNetwork::new(cfg, 1).unwrap();
    let err = train(
        &mut net,
        &data,
        &TrainingConfig {
            epochs: 2,
            batch_size: 5,
            ..Default::default()
        },
    )
    .unwrap_err();
    assert!(matches!(err, NnError::NonFiniteLoss { epoch: 1, batch: 3 }), "{err:?}");
}

#[test]
fn mismatched_dataset_is_rejected() {
    let data = random_windows(1, 5, 3, 2);
    let cfg = config(
        4,
        2,
        vec![
            LayerSpec::bilstm(2, Activation::Tanh),
            LayerSpec::dense(2, Activation::Sigmoid),
        ],
    );
    let mut net = BiLstmNetwork::new(cfg, 1).unwrap();
    assert!(matches!(
        train(&mut net, &data, &TrainingConfig::default()),
        Err(NnError::ShapeMismatch(_))
    ));
}

#[test]
fn shuffled_training_is_seeded() {
    let data = random_windows(2, 30, 3, 1);
    let cfg = config(
        3,
        1,
        vec![
            LayerSpec::bilstm(2, Activation::Tanh),
            LayerSpec::dense(2, Activation::Sigmoid),
        ],
    );
    let run = |seed| {
        let mut net = BiLstmNetwork::new(
            NetworkConfig {
                features: data.feature_order.clone(),
                ..cfg.clone()
            },
            1,
        )
        .unwrap();
        train(
            &mut net,
            &data,
            &TrainingConfig {
                epochs: 2,
                batch_size: 4,
                shuffle: true,
                seed,
                ..Default::default()
            },
        )
        .unwrap();
        net
    };
    assert_eq!(run(5), run(5));
    assert_ne!(run(5), run(6));
}

fn small_model(lookback: usize) -> (BiLstmNetwork, aqf::ObservationFrame) {
    let frame = synth_generate(&SynthSpec {
        rows: 150,
        ..Default::default()
    })
    .unwrap();
    let features: Vec<String> = Column::BASE.iter().map(|c| c.name().to_string()).collect();
    let (scaler, _) = training_windows(&frame, &features, lookback, 0.8).unwrap();
    let net = BiLstmNetwork::new(NetworkConfig::standard(lookback, features), 9)
        .unwrap()
        .with_scaler(scaler);
    (net, frame)
}

#[test]
fn recursive_forecast_timestamps_and_aqi() {
    let (net, frame) = small_model(8);
    let out = predict(&net, &frame, 30).unwrap();
    assert_eq!(out.len(), 30);
    let last = *frame.timestamps().last().unwrap();
    for (k, f) in out.iter().enumerate() {
        assert_eq!(f.timestamp, last + Duration::hours(k as i64 + 1));
        assert_eq!(f.aqi_basis, AqiMode::Trailing24h);
        assert!(f.pm25.is_finite() && f.pm10.is_finite());
    }
    let instant = predict_with(&net, &frame, 30, &BreakpointTable::default(), AqiMode::Instant).unwrap();
    for (a, b) in out.iter().zip(&instant) {
        assert_eq!((a.pm25, a.pm10), (b.pm25, b.pm10));
        assert_eq!(
            b.aqi,
            aqf::aqi::composite_aqi(b.pm25.max(0.0), b.pm10.max(0.0)).unwrap()
        );
    }
}

#[test]
fn first_forecast_step_is_one_step_prediction() {
    let (net, frame) = small_model(6);
    let out = predict(&net, &frame, 1).unwrap();
    let tail = frame.slice(frame.len() - 6..frame.len());
    let scaler = net.scaler.clone().unwrap();
    let scaled = aqf::preprocess::transform(&scaler, &tail).unwrap();
    let cols: Vec<usize> = net.features().iter().map(|f| scaled.index_of(f).unwrap()).collect();
    let mut window = Matrix::zeros(6, cols.len());
    for t in 0..6 {
        for (k, &c) in cols.iter().enumerate() {
            window.set(t, k, scaled.values.get(t, c));
        }
    }
    let y = net.predict_window(&window).unwrap();
    let i25 = scaler.index_of("pm25").unwrap();
    assert_eq!(out[0].pm25, scaler.unscale(i25, y[0]));
}

#[test]
fn forecast_errors() {
    let (net, frame) = small_model(8);
    assert!(matches!(
        predict(&net, &frame.slice(0..5), 3),
        Err(NnError::InsufficientHistory {
            needed: 8,
            available: 5
        })
    ));
    let mut bare = net.clone();
    bare.scaler = None;
    assert!(matches!(predict(&bare, &frame, 3), Err(NnError::MissingScaler)));
}
