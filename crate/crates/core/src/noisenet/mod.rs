//! Noise-level estimation from the log singular-value profile of a far-field
//! matrix.

use rand::Rng;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::forward::{add_noise, default_truncation, disk_farfield, fourier_resample, seeded_rng, FarFieldMatrix};
use crate::io::{read_f64s, read_magic, read_u32, write_f64s, write_u32};
use crate::nn::{Activation, AdamState, LrSchedule, Mlp, OutputTransform, WeightDecay};
use crate::par::Exec;
use crate::regsolve::singular_values;

/// Singular values are floored here before taking logarithms.
pub const SIGMA_FLOOR: f64 = 1e-300;

/// `(ln sigma_1, ..., ln sigma_r)`, non-increasing.
pub fn features(f: &FarFieldMatrix) -> Vec<f64> {
    singular_values(f.entries())
        .into_iter()
        .map(|s| s.max(SIGMA_FLOOR).ln())
        .collect()
}

/// `sqrt(m) + sqrt(n)`, the scale of the spectral norm of an m×n Gaussian
/// matrix.
pub fn shape_scale(m: usize, n: usize) -> f64 {
    (m as f64).sqrt() + (n as f64).sqrt()
}

/// MLP `(n0, 100, 1)` with ReLU mapping log singular values of the canonical
/// `m0 x n0` resampling to `ln(delta / (sqrt m0 + sqrt n0))`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseNet {
    pub mlp: Mlp,
    pub m0: usize,
    pub n0: usize,
}

/// A prediction together with an out-of-training-range flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaPrediction {
    pub delta: f64,
    /// Rough relative noise level implied by `delta`.
    pub eta_estimate: f64,
    pub out_of_range: bool,
}

impl NoiseNet {
    pub fn new<R: Rng>(m0: usize, n0: usize, rng: &mut R) -> Result<Self> {
        let r = m0.min(n0);
        Ok(NoiseNet {
            mlp: Mlp::glorot(&[r, 100, 1], Activation::Relu, OutputTransform::Identity, rng)?,
            m0,
            n0,
        })
    }

    /// Network output for a matrix already at the canonical shape.
    fn raw_output(&self, canonical: &FarFieldMatrix) -> Result<f64> {
        Ok(self.mlp.forward(&features(canonical))?[0])
    }

    /// `delta_theta = (sqrt m + sqrt n) exp(output)` for the original shape.
    pub fn predict_delta(&self, f: &FarFieldMatrix) -> Result<f64> {
        let canonical = fourier_resample(f, self.m0, self.n0)?;
        Ok(shape_scale(f.m(), f.n()) * self.raw_output(&canonical)?.exp())
    }

    /// [`NoiseNet::predict_delta`] plus a flag when the implied relative
    /// noise level falls outside `eta_range`. Predictions there are known to
    /// generalize poorly; the flag is advisory.
    pub fn predict_checked(&self, f: &FarFieldMatrix, eta_range: (f64, f64)) -> Result<DeltaPrediction> {
        let delta = self.predict_delta(f)?;
        // E|F_delta - F|_F^2 = 2 eta^2 |F|_F^2 and delta ~ rms(E)(sqrt m + sqrt n)
        let rms = f.entries().norm() / ((f.m() * f.n()) as f64).sqrt();
        let eta_estimate = delta / (shape_scale(f.m(), f.n()) * std::f64::consts::SQRT_2 * rms);
        Ok(DeltaPrediction {
            delta,
            eta_estimate,
            out_of_range: eta_estimate < eta_range.0 || eta_estimate > eta_range.1,
        })
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"NNET")?;
        self.mlp.write(&mut w)?;
        write_u32(&mut w, self.m0 as u32)?;
        write_u32(&mut w, self.n0 as u32)
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        read_magic(&mut r, b"NNET")?;
        let mlp = Mlp::read(&mut r)?;
        let m0 = read_u32(&mut r)? as usize;
        let n0 = read_u32(&mut r)? as usize;
        if mlp.input_dim() != m0.min(n0) || mlp.output_dim() != 1 {
            return Err(Error::Format(format!(
                "network shape {:?} does not match canonical {m0}x{n0}",
                mlp.sizes()
            )));
        }
        Ok(NoiseNet { mlp, m0, n0 })
    }
}

/// Training data: features of noisy centered-disk matrices and log-scaled
/// noise levels.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseDataset {
    pub m0: usize,
    pub n0: usize,
    pub etas: Vec<f64>,
    pub radii: Vec<f64>,
    pub deltas: Vec<f64>,
    /// `count x min(m0, n0)`.
    pub features: Vec<f64>,
    pub labels: Vec<f64>,
}

impl NoiseDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.m0.min(self.n0)
    }

    /// Binary container `NSD1`: u32 count, m0, n0, then per sample
    /// eta, radius, delta, label and the features (f64).
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"NSD1")?;
        for v in [self.len(), self.m0, self.n0] {
            write_u32(&mut w, v as u32)?;
        }
        let d = self.feature_dim();
        for i in 0..self.len() {
            write_f64s(&mut w, &[self.etas[i], self.radii[i], self.deltas[i], self.labels[i]])?;
            write_f64s(&mut w, &self.features[i * d..(i + 1) * d])?;
        }
        Ok(())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        read_magic(&mut r, b"NSD1")?;
        let count = read_u32(&mut r)? as usize;
        let m0 = read_u32(&mut r)? as usize;
        let n0 = read_u32(&mut r)? as usize;
        let d = m0.min(n0);
        let mut set = NoiseDataset {
            m0,
            n0,
            etas: Vec::with_capacity(count),
            radii: Vec::with_capacity(count),
            deltas: Vec::with_capacity(count),
            features: Vec::with_capacity(count * d),
            labels: Vec::with_capacity(count),
        };
        for _ in 0..count {
            let h = read_f64s(&mut r, 4)?;
            set.etas.push(h[0]);
            set.radii.push(h[1]);
            set.deltas.push(h[2]);
            set.labels.push(h[3]);
            set.features.extend(read_f64s(&mut r, d)?);
        }
        Ok(set)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseGenConfig {
    pub k: f64,
    pub m0: usize,
    pub n0: usize,
    pub count: usize,
    pub eta_range: (f64, f64),
    pub radius_range: (f64, f64),
    pub seed: u64,
}

impl Default for NoiseGenConfig {
    fn default() -> Self {
        NoiseGenConfig {
            k: 2.0 * std::f64::consts::PI,
            m0: 30,
            n0: 30,
            count: 400,
            eta_range: (5e-3, 3e-1),
            radius_range: (0.5, 1.5),
            seed: 0,
        }
    }
}

pub fn gen_noise_dataset(cfg: &NoiseGenConfig) -> Result<NoiseDataset> {
    gen_noise_dataset_with(cfg, Exec::default())
}

/// Centered disks with log-uniform multiplicative noise. Random draws are
/// taken sequentially (eta, radius, noise seed per sample) so the result does
/// not depend on the execution strategy.
pub fn gen_noise_dataset_with(cfg: &NoiseGenConfig, exec: Exec) -> Result<NoiseDataset> {
    let (elo, ehi) = cfg.eta_range;
    let (rlo, rhi) = cfg.radius_range;
    if !(elo > 0.0 && ehi >= elo && rlo > 0.0 && rhi >= rlo) {
        return Err(Error::Domain(format!(
            "eta range {:?}, radius range {:?}",
            cfg.eta_range, cfg.radius_range
        )));
    }
    let mut rng = seeded_rng(cfg.seed);
    let draws: Vec<(f64, f64, u64)> = (0..cfg.count)
        .map(|_| {
            let eta = rng.random_range(elo.ln()..=ehi.ln()).exp();
            let r = rng.random_range(rlo..=rhi);
            (eta, r, rng.random::<u64>())
        })
        .collect();
    let scale = shape_scale(cfg.m0, cfg.n0);
    let samples = exec.try_map(cfg.count, |i| -> Result<(Vec<f64>, f64)> {
        let (eta, r, s) = draws[i];
        let f = disk_farfield([0.0, 0.0], r, cfg.k, cfg.m0, cfg.n0, default_truncation(cfg.k, r))?;
        let (noisy, real) = add_noise(&f, eta, s)?;
        Ok((features(&noisy), real.delta))
    })?;
    let mut set = NoiseDataset {
        m0: cfg.m0,
        n0: cfg.n0,
        etas: draws.iter().map(|d| d.0).collect(),
        radii: draws.iter().map(|d| d.1).collect(),
        deltas: Vec::with_capacity(cfg.count),
        features: Vec::with_capacity(cfg.count * cfg.m0.min(cfg.n0)),
        labels: Vec::with_capacity(cfg.count),
    };
    for (feat, delta) in samples {
        set.features.extend(feat);
        set.labels.push((delta / scale).ln());
        set.deltas.push(delta);
    }
    Ok(set)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseTrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub decay_mode: WeightDecay,
}

impl Default for NoiseTrainConfig {
    fn default() -> Self {
        NoiseTrainConfig {
            epochs: 300,
            lr: 5e-3,
            weight_decay: 1e-4,
            decay_mode: WeightDecay::Decoupled,
        }
    }
}

/// Full-batch Adam on the mean squared error of the log labels. Returns the
/// trained net and the loss before each update (one entry per epoch).
pub fn train_noisenet(net: &NoiseNet, data: &NoiseDataset, cfg: &NoiseTrainConfig) -> Result<(NoiseNet, Vec<f64>)> {
    if data.is_empty() {
        return Err(Error::Domain("empty noise dataset".into()));
    }
    if data.feature_dim() != net.mlp.input_dim() {
        return Err(Error::shape(net.mlp.input_dim(), data.feature_dim()));
    }
    let mut net = net.clone();
    let n = data.len();
    let schedule = LrSchedule::Constant { lr: cfg.lr };
    let mut adam = AdamState::new(net.mlp.num_params(), cfg.weight_decay).with_decay_mode(cfg.decay_mode);
    let mut grads = vec![0.0; net.mlp.num_params()];
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let tape = net.mlp.forward_batch(&data.features, n)?;
        let err: Vec<f64> = tape.output.iter().zip(&data.labels).map(|(a, b)| a - b).collect();
        let loss = err.iter().map(|e| e * e).sum::<f64>() / n as f64;
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!("noise-net loss at epoch {}", epoch + 1)));
        }
        let upstream: Vec<f64> = err.iter().map(|e| 2.0 * e / n as f64).collect();
        net.mlp.backward_batch(&tape, &upstream, &mut grads, false, false)?;
        adam.step(net.mlp.params_mut(), &grads, schedule.lr_at(epoch))?;
        history.push(loss);
    }
    Ok((net, history))
}

/// Mean squared error of the log labels under the current parameters.
pub fn dataset_mse(net: &NoiseNet, data: &NoiseDataset) -> Result<f64> {
    let out = net.mlp.forward_batch(&data.features, data.len())?.output;
    Ok(out.iter().zip(&data.labels).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / data.len() as f64)
}

/// One row of a noise-estimation report.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseEvalRow {
    pub obstacle: String,
    pub shape: (usize, usize),
    pub eta: f64,
    pub seed: u64,
    pub delta_true: f64,
    pub delta_pred: f64,
}

impl NoiseEvalRow {
    pub fn rel_err(&self) -> f64 {
        (self.delta_pred - self.delta_true).abs() / self.delta_true
    }
}

/// CSV `obstacle,shape,eta,seed,delta_true,delta_pred,rel_err`.
pub fn write_eval_csv<W: Write>(mut w: W, rows: &[NoiseEvalRow]) -> Result<()> {
    writeln!(w, "obstacle,shape,eta,seed,delta_true,delta_pred,rel_err")?;
    for r in rows {
        writeln!(
            w,
            "{},{}x{},{:.16e},{},{:.16e},{:.16e},{:.16e}",
            r.obstacle,
            r.shape.0,
            r.shape.1,
            r.eta,
            r.seed,
            r.delta_true,
            r.delta_pred,
            r.rel_err()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    #[test]
    fn features_of_identity_and_scaling() {
        let eye = FarFieldMatrix::new(DMatrix::<Complex64>::identity(6, 6), 1.0).unwrap();
        assert!(features(&eye).iter().all(|v| v.abs() < 1e-14));
        let f = disk_farfield([0.0, 0.0], 0.7, 6.0, 8, 8, 24).unwrap();
        let scaled = FarFieldMatrix::new(f.entries() * Complex64::new(3.0, 0.0), 6.0).unwrap();
        for (a, b) in features(&f).iter().zip(features(&scaled)) {
            assert!((b - a - 3f64.ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn canonical_scale_factor() {
        assert!((shape_scale(30, 30) - 2.0 * 30f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_epochs_and_round_trip() {
        let cfg = NoiseGenConfig {
            count: 8,
            m0: 8,
            n0: 8,
            ..NoiseGenConfig::default()
        };
        let data = gen_noise_dataset(&cfg).unwrap();
        assert_eq!(data, gen_noise_dataset(&cfg).unwrap());
        let net = NoiseNet::new(8, 8, &mut seeded_rng(0)).unwrap();
        let (same, hist) = train_noisenet(
            &net,
            &data,
            &NoiseTrainConfig {
                epochs: 0,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(same, net);
        assert!(hist.is_empty());
        let mut buf = Vec::new();
        data.write(&mut buf).unwrap();
        assert_eq!(NoiseDataset::read(&buf[..]).unwrap(), data);
        let mut buf = Vec::new();
        net.write(&mut buf).unwrap();
        assert_eq!(NoiseNet::read(&buf[..]).unwrap(), net);
    }
}
