//! Noise-level features, dataset statistics and the trained estimator.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use hybrid_lsm::forward::{add_noise, disk_farfield, seeded_rng, FarFieldMatrix};
use hybrid_lsm::noisenet::{
    dataset_mse, features, gen_noise_dataset, shape_scale, train_noisenet, NoiseDataset, NoiseGenConfig, NoiseNet,
    NoiseTrainConfig,
};
use nalgebra::DMatrix;
use num_complex::Complex64;

fn trained() -> &'static (NoiseDataset, NoiseNet, Vec<f64>) {
    static CELL: OnceLock<(NoiseDataset, NoiseNet, Vec<f64>)> = OnceLock::new();
    CELL.get_or_init(|| {
        let data = gen_noise_dataset(&NoiseGenConfig::default()).unwrap();
        let net = NoiseNet::new(30, 30, &mut seeded_rng(1)).unwrap();
        let (net, hist) = train_noisenet(&net, &data, &NoiseTrainConfig::default()).unwrap();
        (data, net, hist)
    })
}

#[test]
fn feature_identities() {
    let eye = FarFieldMatrix::new(DMatrix::identity(6, 6).map(|v: f64| Complex64::new(v, 0.0)), 1.0).unwrap();
    assert!(features(&eye).iter().all(|v| v.abs() < 1e-14));

    let f = disk_farfield([0.0, 0.0], 0.9, TAU, 30, 30, 30).unwrap();
    // noisy, so the tail singular values sit well above round-off
    let g = add_noise(&f, 0.01, 1).unwrap().0;
    let scaled = FarFieldMatrix::new(g.entries() * Complex64::new(3.0, 0.0), TAU).unwrap();
    for (a, b) in features(&g).iter().zip(features(&scaled)) {
        assert!((b - a - 3f64.ln()).abs() < 1e-9);
    }

    let loud = features(&add_noise(&f, 0.1, 5).unwrap().0);
    let quiet = features(&add_noise(&f, 0.001, 5).unwrap().0);
    assert!((loud[0] - quiet[0]).abs() < 0.5);
    assert!(loud[29] - quiet[29] > 2.0, "{} vs {}", loud[29], quiet[29]);
}

#[test]
fn dataset_labels_span_and_determinism() {
    let (data, _, _) = trained();
    assert_eq!(data.len(), 400);
    let lo = data.labels.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = data.labels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!(data.labels.iter().all(|l| l.is_finite()));
    assert!(hi - lo >= (3e-1f64 / 5e-3).ln() / 2.0, "span {}", hi - lo);
    for (l, d) in data.labels.iter().zip(&data.deltas) {
        assert_eq!(*l, (d / shape_scale(30, 30)).ln());
    }
    let cfg = NoiseGenConfig {
        count: 20,
        ..NoiseGenConfig::default()
    };
    assert_eq!(gen_noise_dataset(&cfg).unwrap(), gen_noise_dataset(&cfg).unwrap());
}

#[test]
fn training_fits_and_trends_down() {
    let (data, net, hist) = trained();
    assert_eq!(hist.len(), 300);
    assert!(dataset_mse(net, data).unwrap() < 0.05);
    let avg = |w: &[f64]| w.iter().sum::<f64>() / w.len() as f64;
    let windows: Vec<f64> = hist.chunks(50).map(avg).collect();
    assert!(windows.windows(2).all(|w| w[1] <= w[0]), "{windows:?}");

    let fresh = NoiseNet::new(30, 30, &mut seeded_rng(1)).unwrap();
    let cfg = NoiseTrainConfig {
        epochs: 0,
        ..NoiseTrainConfig::default()
    };
    assert_eq!(train_noisenet(&fresh, data, &cfg).unwrap().0, fresh);
}

#[test]
fn prediction_scale_and_translation_invariance() {
    let (_, net, _) = trained();
    let f = disk_farfield([0.0, 0.0], 0.8, TAU, 30, 30, 30).unwrap();
    let g = add_noise(&f, 0.05, 9).unwrap().0;
    let out = net.mlp.forward(&features(&g)).unwrap()[0];
    let pred = net.predict_delta(&g).unwrap();
    assert!((pred - 2.0 * 30f64.sqrt() * out.exp()).abs() < 1e-14 * pred);

    let moved = disk_farfield([1.0, 0.5], 0.8, TAU, 30, 30, 30).unwrap();
    let gm = add_noise(&moved, 0.05, 9).unwrap().0;
    let pm = net.predict_delta(&gm).unwrap();
    assert!((pm - pred).abs() < 1e-6 * pred, "{pred} vs {pm}");
}

#[test]
fn predictions_increase_with_noise_level() {
    let (_, net, _) = trained();
    let f = disk_farfield([0.0, 0.0], 0.7, TAU, 50, 50, 30).unwrap();
    let preds: Vec<f64> = [0.01, 0.03, 0.1, 0.3]
        .iter()
        .map(|&eta| net.predict_delta(&add_noise(&f, eta, 2).unwrap().0).unwrap())
        .collect();
    assert!(preds.windows(2).all(|w| w[1] >= w[0]), "{preds:?}");
}

#[test]
fn native_shape_accuracy_and_range_flag() {
    let (_, net, _) = trained();
    let f = disk_farfield([0.0, 0.0], 0.6, TAU, 30, 30, 30).unwrap();
    let mut err = 0.0;
    for seed in 0..50 {
        let (g, real) = add_noise(&f, 0.1, seed).unwrap();
        err += (net.predict_delta(&g).unwrap() - real.delta).abs() / real.delta / 50.0;
    }
    assert!(err < 0.1, "mean relative error {err}");
    let inside = net
        .predict_checked(&add_noise(&f, 0.1, 0).unwrap().0, (5e-3, 3e-1))
        .unwrap();
    assert!(!inside.out_of_range, "{inside:?}");
}

#[test]
fn archive_round_trip() {
    let (_, net, _) = trained();
    let mut buf = Vec::new();
    net.write(&mut buf).unwrap();
    assert_eq!(&NoiseNet::read(&buf[..]).unwrap(), net);
    buf[0] = b'X';
    assert!(NoiseNet::read(&buf[..]).is_err());
}
