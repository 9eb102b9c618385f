use rand::seq::SliceRandom;
use rand::Rng;
use std::io::{Read, Write};

use super::model::{apply_encoding, encode_raw, RbfDeepOnet};
use super::trunk::RbfTrunk;
use crate::error::{Error, Result};
use crate::forward::{add_noise, default_truncation, disk_farfield, seeded_rng};
use crate::geometry::Point;
use crate::io::{read_f64, read_f64s, read_magic, read_u32, write_f64, write_f64s, write_u32};
use crate::linalg::dgemm;
use crate::nn::{AdamState, LrSchedule, Mlp, WeightDecay};
use crate::par::Exec;

/// Disk samples with binary labels at the trunk centers.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub k: f64,
    pub m0: usize,
    pub n0: usize,
    /// Label length (number of trunk centers).
    pub p: usize,
    /// Raw branch inputs, `count x 2 m0 n0`.
    pub inputs: Vec<f64>,
    pub centers: Vec<Point>,
    pub radii: Vec<f64>,
    /// `count x p`, entries 0 or 1.
    pub labels: Vec<f64>,
}

impl TrainingSet {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        2 * self.m0 * self.n0
    }

    pub fn input(&self, i: usize) -> &[f64] {
        let d = self.input_dim();
        &self.inputs[i * d..(i + 1) * d]
    }

    pub fn label(&self, i: usize) -> &[f64] {
        &self.labels[i * self.p..(i + 1) * self.p]
    }

    /// Binary container `DON1`: header (count, m0, n0, p, k), then per
    /// sample center, radius, input and labels (one byte each).
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"DON1")?;
        for v in [self.len(), self.m0, self.n0, self.p] {
            write_u32(&mut w, v as u32)?;
        }
        write_f64(&mut w, self.k)?;
        for i in 0..self.len() {
            write_f64s(&mut w, &[self.centers[i][0], self.centers[i][1], self.radii[i]])?;
            write_f64s(&mut w, self.input(i))?;
            let bytes: Vec<u8> = self.label(i).iter().map(|&v| v as u8).collect();
            w.write_all(&bytes)?;
        }
        Ok(())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        read_magic(&mut r, b"DON1")?;
        let count = read_u32(&mut r)? as usize;
        let m0 = read_u32(&mut r)? as usize;
        let n0 = read_u32(&mut r)? as usize;
        let p = read_u32(&mut r)? as usize;
        let k = read_f64(&mut r)?;
        let mut set = TrainingSet {
            k,
            m0,
            n0,
            p,
            inputs: Vec::with_capacity(count * 2 * m0 * n0),
            centers: Vec::with_capacity(count),
            radii: Vec::with_capacity(count),
            labels: Vec::with_capacity(count * p),
        };
        let mut bytes = vec![0u8; p];
        for _ in 0..count {
            let head = read_f64s(&mut r, 3)?;
            set.centers.push([head[0], head[1]]);
            set.radii.push(head[2]);
            set.inputs.extend(read_f64s(&mut r, 2 * m0 * n0)?);
            r.read_exact(&mut bytes)?;
            if bytes.iter().any(|&b| b > 1) {
                return Err(Error::Format("label byte other than 0/1".into()));
            }
            set.labels.extend(bytes.iter().map(|&b| b as f64));
        }
        Ok(set)
    }
}

/// Options for [`gen_training_set_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct GenOptions {
    /// Log-uniform multiplicative noise on the inputs; off by default.
    pub noise_eta_range: Option<(f64, f64)>,
    pub exec: Exec,
}

pub fn gen_training_set(
    trunk: &RbfTrunk,
    k: f64,
    m0: usize,
    n0: usize,
    radius_range: (f64, f64),
    seed: u64,
) -> Result<TrainingSet> {
    gen_training_set_with(trunk, k, m0, n0, radius_range, seed, GenOptions::default())
}

/// Disks centered on the `4 n_h x 4 n_h` grid over the domain with seeded
/// uniform radii; analytic far fields at `m0 x n0`.
pub fn gen_training_set_with(
    trunk: &RbfTrunk,
    k: f64,
    m0: usize,
    n0: usize,
    radius_range: (f64, f64),
    seed: u64,
    options: GenOptions,
) -> Result<TrainingSet> {
    let (rmin, rmax) = radius_range;
    if !(rmin > 0.0 && rmax >= rmin && rmax < trunk.half_width()) {
        return Err(Error::Domain(format!("radius range [{rmin}, {rmax}]")));
    }
    let per_axis = 4 * trunk.n_h;
    let half = trunk.half_width();
    let step = 2.0 * half / (per_axis - 1) as f64;
    let count = per_axis * per_axis;

    let mut rng = seeded_rng(seed);
    let draws: Vec<(f64, Option<(f64, u64)>)> = (0..count)
        .map(|_| {
            let r = if rmax > rmin {
                rng.random_range(rmin..rmax)
            } else {
                rmin
            };
            let noise = options.noise_eta_range.map(|(lo, hi)| {
                let eta = (rng.random_range(lo.ln()..=hi.ln())).exp();
                (eta, rng.random::<u64>())
            });
            (r, noise)
        })
        .collect();
    let centers: Vec<Point> = (0..count)
        .map(|i| {
            [
                -half + step * (i % per_axis) as f64,
                -half + step * (i / per_axis) as f64,
            ]
        })
        .collect();

    let inputs = options.exec.try_map(count, |i| -> Result<Vec<f64>> {
        let (r, noise) = draws[i];
        let f = disk_farfield(centers[i], r, k, m0, n0, default_truncation(k, r))?;
        let f = match noise {
            Some((eta, s)) => add_noise(&f, eta, s)?.0,
            None => f,
        };
        Ok(encode_raw(&f))
    })?;

    let p = trunk.len();
    let mut labels = Vec::with_capacity(count * p);
    for (c, &(r, _)) in centers.iter().zip(&draws) {
        labels.extend(trunk.centers.iter().map(|z| {
            let d2 = (z[0] - c[0]).powi(2) + (z[1] - c[1]).powi(2);
            if d2.sqrt() <= r {
                1.0
            } else {
                0.0
            }
        }));
    }
    Ok(TrainingSet {
        k,
        m0,
        n0,
        p,
        inputs: inputs.concat(),
        centers,
        radii: draws.iter().map(|d| d.0).collect(),
        labels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub weight_decay: f64,
    pub decay_mode: WeightDecay,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 300,
            batch_size: 64,
            lr_start: 1e-3,
            lr_end: 1e-5,
            weight_decay: 5e-5,
            decay_mode: WeightDecay::Decoupled,
            seed: 0,
        }
    }
}

/// Mean squared error over the batch and the label points, with the gradient
/// w.r.t. the branch parameters. `gram` is the symmetric `p x p` trunk Gram
/// matrix (row-major).
pub fn loss_and_gradient(
    branch: &Mlp,
    gram: &[f64],
    inputs: &[f64],
    labels: &[f64],
    batch: usize,
) -> Result<(f64, Vec<f64>)> {
    let mut grads = vec![0.0; branch.num_params()];
    let loss = loss_and_gradient_into(branch, gram, inputs, labels, batch, &mut grads)?;
    Ok((loss, grads))
}

/// As [`loss_and_gradient`], writing the gradient into `grads`.
pub fn loss_and_gradient_into(
    branch: &Mlp,
    gram: &[f64],
    inputs: &[f64],
    labels: &[f64],
    batch: usize,
    grads: &mut [f64],
) -> Result<f64> {
    let p = branch.output_dim();
    if labels.len() != batch * p || gram.len() != p * p {
        return Err(Error::shape(batch * p, labels.len()));
    }
    let tape = branch.forward_batch(inputs, batch)?;
    let pred = dgemm(&tape.output, gram, batch, p, p);
    let scale = 1.0 / (batch * p) as f64;
    let err: Vec<f64> = pred.iter().zip(labels).map(|(a, b)| a - b).collect();
    let loss = err.iter().map(|e| e * e).sum::<f64>() * scale;
    let mut upstream = dgemm(&err, gram, batch, p, p);
    upstream.iter_mut().for_each(|u| *u *= 2.0 * scale);
    branch.backward_batch(&tape, &upstream, grads, false, false)?;
    Ok(loss)
}

/// Mini-batch Adam on the branch with a cosine learning rate; returns the
/// trained model and the per-epoch mean loss.
pub fn train_deeponet(model: &RbfDeepOnet, set: &TrainingSet, cfg: &TrainConfig) -> Result<(RbfDeepOnet, Vec<f64>)> {
    train_deeponet_with(model, set, cfg, |_, _| {})
}

pub fn train_deeponet_with<F: FnMut(usize, f64)>(
    model: &RbfDeepOnet,
    set: &TrainingSet,
    cfg: &TrainConfig,
    mut on_epoch: F,
) -> Result<(RbfDeepOnet, Vec<f64>)> {
    if (set.m0, set.n0, set.p) != (model.m0, model.n0, model.trunk.len()) {
        return Err(Error::shape(
            format!("{}x{} inputs, {} labels", model.m0, model.n0, model.trunk.len()),
            format!("{}x{} inputs, {} labels", set.m0, set.n0, set.p),
        ));
    }
    if set.is_empty() || cfg.batch_size == 0 {
        return Err(Error::Domain("empty training set or batch".into()));
    }
    let mut model = model.clone();
    let (n, d, p) = (set.len(), set.input_dim(), set.p);
    let gram: Vec<f64> = model.trunk.gram().iter().copied().collect();
    let inputs: Vec<f64> = (0..n)
        .flat_map(|i| apply_encoding(set.input(i).to_vec(), model.encoding))
        .collect();

    let batches = n.div_ceil(cfg.batch_size);
    let schedule = LrSchedule::Cosine {
        start: cfg.lr_start,
        end: cfg.lr_end,
        total: cfg.epochs * batches,
    };
    let mut adam = AdamState::new(model.branch.num_params(), cfg.weight_decay).with_decay_mode(cfg.decay_mode);
    let mut rng = seeded_rng(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut step = 0;
    let mut grads = vec![0.0; model.branch.num_params()];
    let mut xb = Vec::with_capacity(cfg.batch_size * d);
    let mut yb = Vec::with_capacity(cfg.batch_size * p);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            xb.clear();
            yb.clear();
            for &i in chunk {
                xb.extend_from_slice(&inputs[i * d..(i + 1) * d]);
                yb.extend_from_slice(set.label(i));
            }
            let loss = loss_and_gradient_into(&model.branch, &gram, &xb, &yb, chunk.len(), &mut grads)?;
            if !loss.is_finite() {
                return Err(Error::NonFinite(format!("loss at epoch {}, batch {b}", epoch + 1)));
            }
            adam.step(model.branch.params_mut(), &grads, schedule.lr_at(step))?;
            step += 1;
            total += loss * chunk.len() as f64;
        }
        let mean = total / n as f64;
        history.push(mean);
        on_epoch(epoch + 1, mean);
    }
    Ok((model, history))
}
