//! The `hlsm` verbs. Each writes its data files plus a flat metadata file
//! `run_<verb>.txt` into the output directory; wall-clock measurements go to
//! `timing_<verb>.txt` so that reruns leave every other file byte-identical.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use hybrid_lsm::deeponet::{
    gen_training_set_with, learned_regularizer, make_trunk_with, train_deeponet_with, GenOptions, InputEncoding,
    RbfDeepOnet, RbfTrunk, TrainConfig, TrainingSet,
};
use hybrid_lsm::forward::{
    add_noise, default_truncation, disk_farfield, scene_farfield, seeded_rng, FarFieldMatrix, PRNG_NAME,
};
use hybrid_lsm::geometry::{Obstacle, Scene};
use hybrid_lsm::nn::{Mlp, OutputTransform};
use hybrid_lsm::noisenet::{
    gen_noise_dataset_with, train_noisenet, write_eval_csv, NoiseDataset, NoiseEvalRow, NoiseGenConfig, NoiseNet,
    NoiseTrainConfig,
};
use hybrid_lsm::ntk::{condition_sweep, ntk_report, write_sweep_csv, NtkReport, SweepRow};
use hybrid_lsm::par::Exec;
use hybrid_lsm::regsolve::{lsm_indicator_from_svd, svd, IndicatorField, RegField, SamplingGrid, Strategy};
use hybrid_lsm::{Error, Result};
use rand::Rng;

use crate::config::RunConfig;
use crate::metrics::{connected_components, contrast, iou, threshold_mask};

pub const DEEPONET_DATA: &str = "deeponet_train.bin";
pub const NOISE_DATA: &str = "noisenet_train.bin";
pub const DEEPONET_MODEL: &str = "deeponet.rdon";
pub const NOISE_MODEL: &str = "noisenet.nnet";

/// Named seeds derived from the run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seeds {
    pub deeponet_data: u64,
    pub deeponet_init: u64,
    pub deeponet_shuffle: u64,
    pub noise_data: u64,
    pub noise_init: u64,
    pub measurement: u64,
    pub ntk: u64,
    /// First noise seed of the evaluation sweep; seed `j` uses `noise_eval + j`.
    pub noise_eval: u64,
}

impl Seeds {
    pub fn derive(seed: u64) -> Self {
        let s = |i: u64| seed.wrapping_mul(1000).wrapping_add(i);
        Seeds {
            deeponet_data: s(0),
            deeponet_init: s(1),
            deeponet_shuffle: s(2),
            noise_data: s(3),
            noise_init: s(4),
            measurement: s(5),
            ntk: s(6),
            noise_eval: s(100),
        }
    }

    fn rows(&self) -> Vec<(&'static str, u64)> {
        vec![
            ("seed.deeponet_data", self.deeponet_data),
            ("seed.deeponet_init", self.deeponet_init),
            ("seed.deeponet_shuffle", self.deeponet_shuffle),
            ("seed.noise_data", self.noise_data),
            ("seed.noise_init", self.noise_init),
            ("seed.measurement", self.measurement),
            ("seed.ntk", self.ntk),
            ("seed.noise_eval", self.noise_eval),
        ]
    }
}

/// Where a command reads models and writes results.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub out: PathBuf,
    /// Datasets and trained models; defaults to `out`.
    pub inputs: PathBuf,
    pub exec: Exec,
}

impl Workspace {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        let out = out.into();
        Workspace {
            inputs: out.clone(),
            out,
            exec: Exec::default(),
        }
    }

    pub fn with_inputs(mut self, inputs: impl Into<PathBuf>) -> Self {
        self.inputs = inputs.into();
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    fn prepare(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out)?;
        Ok(())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.path(name))?))
    }

    fn open_input(&self, name: &str) -> Result<BufReader<File>> {
        let path = self.inputs.join(name);
        File::open(&path)
            .map(BufReader::new)
            .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))
    }
}

fn write_text(ws: &Workspace, name: &str, text: &str) -> Result<()> {
    let mut w = ws.create(name)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

/// `run_<verb>.txt`: command, versions, seeds, config echo and extra rows.
fn write_metadata(ws: &Workspace, verb: &str, cfg: &RunConfig, extra: &[(String, String)]) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "command = {verb}");
    let _ = writeln!(s, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "prng = {PRNG_NAME}");
    for (k, v) in Seeds::derive(cfg.seed).rows() {
        let _ = writeln!(s, "{k} = {v}");
    }
    s.push_str(&cfg.to_text());
    for (k, v) in extra {
        let _ = writeln!(s, "{k} = {v}");
    }
    write_text(ws, &format!("run_{verb}.txt"), &s)
}

fn write_timing(ws: &Workspace, verb: &str, rows: &[(String, f64)]) -> Result<()> {
    let mut s = String::new();
    for (k, v) in rows {
        let _ = writeln!(s, "{k} = {v:.6}");
    }
    write_text(ws, &format!("timing_{verb}.txt"), &s)
}

pub fn trunk(cfg: &RunConfig) -> Result<RbfTrunk> {
    make_trunk_with(
        cfg.wavelength,
        cfg.half_width,
        cfg.trunk_h,
        cfg.trunk_s,
        cfg.trunk_allow_unstable,
    )
}

fn encoding(cfg: &RunConfig) -> InputEncoding {
    if cfg.deeponet_normalize_input {
        InputEncoding::FrobeniusNormalized
    } else {
        InputEncoding::Raw
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSummary {
    pub deeponet_samples: usize,
    pub noise_samples: usize,
}

/// DeepONet and noise-net training sets.
pub fn cmd_gen(cfg: &RunConfig, ws: &Workspace) -> Result<GenSummary> {
    ws.prepare()?;
    let seeds = Seeds::derive(cfg.seed);
    let t0 = Instant::now();
    let trunk = trunk(cfg)?;
    let options = GenOptions {
        noise_eta_range: cfg.deeponet_noise_augment.then_some(cfg.deeponet_augment_eta),
        exec: ws.exec,
    };
    let don = gen_training_set_with(
        &trunk,
        cfg.wavenumber,
        cfg.canonical_m,
        cfg.canonical_n,
        cfg.deeponet_radius,
        seeds.deeponet_data,
        options,
    )?;
    let mut w = ws.create(DEEPONET_DATA)?;
    don.write(&mut w)?;
    w.flush()?;
    let t_don = t0.elapsed().as_secs_f64();

    let noise = gen_noise_dataset_with(
        &NoiseGenConfig {
            k: cfg.wavenumber,
            m0: cfg.canonical_m,
            n0: cfg.canonical_n,
            count: cfg.noisenet_count,
            eta_range: cfg.noisenet_eta,
            radius_range: cfg.noisenet_radius,
            seed: seeds.noise_data,
        },
        ws.exec,
    )?;
    let mut w = ws.create(NOISE_DATA)?;
    noise.write(&mut w)?;
    w.flush()?;

    let summary = GenSummary {
        deeponet_samples: don.len(),
        noise_samples: noise.len(),
    };
    let manifest = format!(
        "prng = {PRNG_NAME}\nseed = {}\ndeeponet.file = {DEEPONET_DATA}\ndeeponet.seed = {}\ndeeponet.samples = {}\n\
         deeponet.trunk_centers = {}\nnoisenet.file = {NOISE_DATA}\nnoisenet.seed = {}\nnoisenet.samples = {}\n",
        cfg.seed,
        seeds.deeponet_data,
        summary.deeponet_samples,
        trunk.len(),
        seeds.noise_data,
        summary.noise_samples
    );
    write_text(ws, "manifest.txt", &manifest)?;
    write_metadata(ws, "gen", cfg, &[])?;
    write_timing(
        ws,
        "gen",
        &[
            ("deeponet_seconds".into(), t_don),
            ("total_seconds".into(), t0.elapsed().as_secs_f64()),
        ],
    )?;
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    DeepOnet,
    NoiseNet,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub deeponet_loss: Option<Vec<f64>>,
    pub noisenet_loss: Option<Vec<f64>>,
    pub deeponet_seconds: Option<f64>,
    pub noisenet_seconds: Option<f64>,
}

fn write_loss_csv(ws: &Workspace, name: &str, history: &[f64]) -> Result<()> {
    let mut w = ws.create(name)?;
    writeln!(w, "epoch,loss")?;
    for (i, l) in history.iter().enumerate() {
        writeln!(w, "{},{l:.16e}", i + 1)?;
    }
    w.flush()?;
    Ok(())
}

/// Trains the requested networks from the datasets written by `gen`.
pub fn cmd_train(cfg: &RunConfig, ws: &Workspace, which: Which, verbose: bool) -> Result<TrainSummary> {
    ws.prepare()?;
    let seeds = Seeds::derive(cfg.seed);
    let mut summary = TrainSummary {
        deeponet_loss: None,
        noisenet_loss: None,
        deeponet_seconds: None,
        noisenet_seconds: None,
    };
    let mut timing = Vec::new();
    if matches!(which, Which::DeepOnet | Which::Both) {
        let set = TrainingSet::read(ws.open_input(DEEPONET_DATA)?)?;
        let trunk = trunk(cfg)?;
        let model = RbfDeepOnet::new(
            trunk,
            cfg.canonical_m,
            cfg.canonical_n,
            &mut seeded_rng(seeds.deeponet_init),
        )?
        .with_encoding(encoding(cfg));
        let tc = TrainConfig {
            epochs: cfg.deeponet_epochs,
            batch_size: cfg.deeponet_batch_size,
            lr_start: cfg.deeponet_lr_start,
            lr_end: cfg.deeponet_lr_end,
            weight_decay: cfg.deeponet_weight_decay,
            decay_mode: cfg.deeponet_decay_mode,
            seed: seeds.deeponet_shuffle,
        };
        let t0 = Instant::now();
        let (model, history) = train_deeponet_with(&model, &set, &tc, |epoch, loss| {
            if verbose && (epoch == 1 || epoch % 10 == 0) {
                eprintln!("deeponet epoch {epoch}: loss {loss:.4e}");
            }
        })?;
        let secs = t0.elapsed().as_secs_f64();
        let mut w = ws.create(DEEPONET_MODEL)?;
        model.write(&mut w)?;
        w.flush()?;
        write_loss_csv(ws, "deeponet_loss.csv", &history)?;
        timing.push(("deeponet_train_seconds".to_string(), secs));
        summary.deeponet_loss = Some(history);
        summary.deeponet_seconds = Some(secs);
    }
    if matches!(which, Which::NoiseNet | Which::Both) {
        let data = NoiseDataset::read(ws.open_input(NOISE_DATA)?)?;
        let net = NoiseNet::new(data.m0, data.n0, &mut seeded_rng(seeds.noise_init))?;
        let tc = NoiseTrainConfig {
            epochs: cfg.noisenet_epochs,
            lr: cfg.noisenet_lr,
            weight_decay: cfg.noisenet_weight_decay,
            ..NoiseTrainConfig::default()
        };
        let t0 = Instant::now();
        let (net, history) = train_noisenet(&net, &data, &tc)?;
        let secs = t0.elapsed().as_secs_f64();
        let mut w = ws.create(NOISE_MODEL)?;
        net.write(&mut w)?;
        w.flush()?;
        write_loss_csv(ws, "noisenet_loss.csv", &history)?;
        timing.push(("noisenet_train_seconds".to_string(), secs));
        summary.noisenet_loss = Some(history);
        summary.noisenet_seconds = Some(secs);
    }
    let which_name = match which {
        Which::DeepOnet => "deeponet",
        Which::NoiseNet => "noisenet",
        Which::Both => "both",
    };
    write_metadata(ws, "train", cfg, &[("train.which".into(), which_name.into())])?;
    write_timing(ws, "train", &timing)?;
    Ok(summary)
}

pub fn load_models(ws: &Workspace) -> Result<(RbfDeepOnet, NoiseNet)> {
    Ok((
        RbfDeepOnet::read(ws.open_input(DEEPONET_MODEL)?)?,
        NoiseNet::read(ws.open_input(NOISE_MODEL)?)?,
    ))
}

/// A noisy measurement of the configured scene.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub scene: Scene,
    pub clean: FarFieldMatrix,
    pub noisy: FarFieldMatrix,
    pub delta: f64,
}

pub fn measure(cfg: &RunConfig, m: usize, n: usize, seed: u64) -> Result<Measurement> {
    let scene = Scene::within(cfg.scene.clone(), cfg.domain())?;
    let clean = scene_farfield(&scene, cfg.wavenumber, m, n, cfg.quadrature)?;
    let (noisy, real) = add_noise(&clean, cfg.eta, seed)?;
    Ok(Measurement {
        scene,
        clean,
        noisy,
        delta: real.delta,
    })
}

/// Quality numbers of one reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMetrics {
    pub strategy: String,
    pub contrast: f64,
    pub iou: f64,
    pub components: usize,
    pub fallbacks: usize,
    /// Noise level handed to the strategy (true for Morozov, estimated for
    /// the learned field).
    pub delta: Option<f64>,
}

/// LSM fields are compared to the threshold after division by their maximum;
/// DeepONet fields are trained towards a 0/1 indicator and are thresholded
/// as they are.
pub fn field_mask(field: &IndicatorField, threshold: f64, normalize: bool) -> Vec<bool> {
    if normalize {
        threshold_mask(&field.normalized(), threshold)
    } else {
        threshold_mask(&field.values, threshold)
    }
}

pub fn field_metrics(
    strategy: &str,
    field: &IndicatorField,
    scene: &Scene,
    threshold: f64,
    fallbacks: usize,
    delta: Option<f64>,
) -> FieldMetrics {
    let mask = field_mask(field, threshold, strategy != "deeponet");
    FieldMetrics {
        strategy: strategy.to_string(),
        contrast: contrast(&field.grid, &field.values, scene),
        iou: iou(&field.grid, &mask, scene),
        components: connected_components(&mask, field.grid.resolution()),
        fallbacks,
        delta,
    }
}

/// The result of one strategy.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub indicator: IndicatorField,
    pub alpha: Option<RegField>,
    pub metrics: FieldMetrics,
}

/// Runs the requested strategies on one measurement, sharing the SVD.
pub fn reconstruct(
    cfg: &RunConfig,
    meas: &Measurement,
    models: Option<&(RbfDeepOnet, NoiseNet)>,
    grid: &SamplingGrid,
    exec: Exec,
) -> Result<Vec<Reconstruction>> {
    let f = &meas.noisy;
    let factors = svd(f.entries())?;
    let need_models =
        || models.ok_or_else(|| Error::Config(format!("strategy needs {DEEPONET_MODEL} and {NOISE_MODEL}")));
    let mut out = Vec::new();
    for name in &cfg.strategies {
        let (strategy, delta) = match name.as_str() {
            "morozov" => {
                if !(meas.delta > 0.0) {
                    return Err(Error::Config("morozov strategy needs noise.eta > 0".into()));
                }
                (Strategy::Morozov { delta: meas.delta }, Some(meas.delta))
            }
            "constant" => (
                Strategy::Constant {
                    alpha: cfg.constant_alpha.unwrap_or(factors.sigma[0] / 100.0),
                },
                None,
            ),
            "learned" => {
                let (don, noise) = need_models()?;
                let delta = noise.predict_delta(f)?;
                (Strategy::Field(learned_regularizer(don, noise, f, grid)?), Some(delta))
            }
            "deeponet" => {
                let (don, _) = need_models()?;
                let indicator = don.indicator_eval(f, grid)?;
                let metrics = field_metrics(name, &indicator, &meas.scene, cfg.threshold, 0, None);
                out.push(Reconstruction {
                    indicator,
                    alpha: None,
                    metrics,
                });
                continue;
            }
            other => return Err(Error::Config(format!("unknown strategy `{other}`"))),
        };
        let lsm = lsm_indicator_from_svd(f, &factors, grid, &strategy, exec)?;
        let metrics = field_metrics(name, &lsm.indicator, &meas.scene, cfg.threshold, lsm.fallbacks, delta);
        out.push(Reconstruction {
            indicator: lsm.indicator,
            alpha: Some(lsm.alpha),
            metrics,
        });
    }
    Ok(out)
}

fn metrics_text(m: &FieldMetrics, threshold: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "strategy = {}", m.strategy);
    let _ = writeln!(s, "contrast = {:.10e}", m.contrast);
    let _ = writeln!(s, "threshold = {threshold}");
    let _ = writeln!(
        s,
        "threshold_applies_to = {}",
        if m.strategy == "deeponet" {
            "raw field"
        } else {
            "field / max"
        }
    );
    let _ = writeln!(s, "iou = {:.10e}", m.iou);
    let _ = writeln!(s, "components = {}", m.components);
    let _ = writeln!(s, "fallbacks = {}", m.fallbacks);
    if let Some(d) = m.delta {
        let _ = writeln!(s, "delta = {d:.10e}");
    }
    s
}

/// Reconstructs the configured scene with every configured strategy and
/// writes fields, images and metrics.
pub fn cmd_reconstruct(cfg: &RunConfig, ws: &Workspace) -> Result<Vec<FieldMetrics>> {
    ws.prepare()?;
    let seeds = Seeds::derive(cfg.seed);
    let meas = measure(cfg, cfg.measurement_m, cfg.measurement_n, seeds.measurement)?;
    let needs_models = cfg.strategies.iter().any(|s| s == "learned" || s == "deeponet");
    let models = if needs_models { Some(load_models(ws)?) } else { None };
    let grid = SamplingGrid::new(cfg.domain(), cfg.resolution)?;
    let t0 = Instant::now();
    let results = reconstruct(cfg, &meas, models.as_ref(), &grid, ws.exec)?;
    let secs = t0.elapsed().as_secs_f64();
    for r in &results {
        let name = &r.metrics.strategy;
        let mut w = ws.create(&format!("indicator_{name}.csv"))?;
        r.indicator.write_csv(&mut w)?;
        w.flush()?;
        let mut w = ws.create(&format!("indicator_{name}.pgm"))?;
        r.indicator.write_pgm(&mut w)?;
        w.flush()?;
        if let Some(alpha) = &r.alpha {
            let mut w = ws.create(&format!("regfield_{name}.csv"))?;
            alpha.write_csv(&mut w)?;
            w.flush()?;
        }
        write_text(
            ws,
            &format!("metrics_{name}.txt"),
            &metrics_text(&r.metrics, cfg.threshold),
        )?;
    }
    write_metadata(
        ws,
        "reconstruct",
        cfg,
        &[("measurement.delta".into(), format!("{:.16e}", meas.delta))],
    )?;
    write_timing(ws, "reconstruct", &[("strategies_seconds".into(), secs)])?;
    Ok(results.into_iter().map(|r| r.metrics).collect())
}

/// The three test obstacles of the noise-estimation study.
pub fn noise_eval_obstacles() -> Vec<(&'static str, Obstacle)> {
    vec![
        ("circle_r0.6", Obstacle::disk([0.0, 0.0], 0.6)),
        ("circle_r1.3", Obstacle::disk([0.0, 0.0], 1.3)),
        ("kite_r0.8", Obstacle::kite([0.0, 0.0], 0.8)),
    ]
}

/// Mean relative error per (obstacle, shape, eta).
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseEvalSummary {
    pub obstacle: String,
    pub shape: usize,
    pub eta: f64,
    pub mean_rel_err: f64,
    pub out_of_range: usize,
}

/// Noise-estimation errors of the trained noise net over seeds, shapes and
/// noise levels.
pub fn noise_eval(cfg: &RunConfig, net: &NoiseNet) -> Result<(Vec<NoiseEvalRow>, Vec<NoiseEvalSummary>)> {
    let seeds = Seeds::derive(cfg.seed);
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for (name, obstacle) in noise_eval_obstacles() {
        let scene = Scene::single(obstacle)?;
        for &shape in &cfg.noise_eval_shapes {
            let clean = scene_farfield(&scene, cfg.wavenumber, shape, shape, cfg.quadrature)?;
            for &eta in &cfg.noise_eval_etas {
                let (mut total, mut flagged) = (0.0, 0);
                for j in 0..cfg.noise_eval_seeds {
                    let seed = seeds.noise_eval.wrapping_add(j as u64);
                    let (noisy, real) = add_noise(&clean, eta, seed)?;
                    let pred = net.predict_checked(&noisy, cfg.noisenet_eta)?;
                    let row = NoiseEvalRow {
                        obstacle: name.to_string(),
                        shape: (shape, shape),
                        eta,
                        seed,
                        delta_true: real.delta,
                        delta_pred: pred.delta,
                    };
                    total += row.rel_err();
                    flagged += pred.out_of_range as usize;
                    rows.push(row);
                }
                summary.push(NoiseEvalSummary {
                    obstacle: name.to_string(),
                    shape,
                    eta,
                    mean_rel_err: total / cfg.noise_eval_seeds.max(1) as f64,
                    out_of_range: flagged,
                });
            }
        }
    }
    Ok((rows, summary))
}

pub fn cmd_noise_eval(cfg: &RunConfig, ws: &Workspace) -> Result<Vec<NoiseEvalSummary>> {
    ws.prepare()?;
    let net = NoiseNet::read(ws.open_input(NOISE_MODEL)?)?;
    let (rows, summary) = noise_eval(cfg, &net)?;
    let mut w = ws.create("noise_eval.csv")?;
    write_eval_csv(&mut w, &rows)?;
    w.flush()?;
    let mut w = ws.create("noise_eval_summary.csv")?;
    writeln!(w, "obstacle,shape,eta,mean_rel_err,out_of_range")?;
    for s in &summary {
        writeln!(
            w,
            "{},{}x{},{},{:.10e},{}",
            s.obstacle, s.shape, s.shape, s.eta, s.mean_rel_err, s.out_of_range
        )?;
    }
    w.flush()?;
    write_metadata(ws, "noise-eval", cfg, &[])?;
    Ok(summary)
}

/// NTK reports for each overlap parameter plus the conditioning sweep.
pub fn ntk_study(cfg: &RunConfig) -> Result<(Vec<NtkReport>, Vec<SweepRow>, bool)> {
    let seeds = Seeds::derive(cfg.seed);
    let mut reports = Vec::new();
    for &s in &cfg.ntk_s_values {
        let trunk = make_trunk_with(cfg.wavelength, cfg.ntk_half_width, cfg.trunk_h, s, true)?;
        // Fresh branch and inputs with the same seeds for every s.
        let model = RbfDeepOnet::new(
            trunk.clone(),
            cfg.canonical_m,
            cfg.canonical_n,
            &mut seeded_rng(seeds.ntk),
        )?
        .with_encoding(encoding(cfg));
        let branch: Mlp = model.branch.with_output_transform(OutputTransform::Identity);
        let mut rng = seeded_rng(seeds.ntk.wrapping_add(1));
        let half = trunk.half_width();
        let (rlo, rhi) = cfg.deeponet_radius;
        let inputs = (0..cfg.ntk_batch)
            .map(|_| {
                let r = rng.random_range(rlo..=rhi);
                let c = [rng.random_range(-half..=half), rng.random_range(-half..=half)];
                let f = disk_farfield(
                    c,
                    r,
                    cfg.wavenumber,
                    cfg.canonical_m,
                    cfg.canonical_n,
                    default_truncation(cfg.wavenumber, r),
                )?;
                model.encode_canonical(&f)
            })
            .collect::<Result<Vec<_>>>()?;
        reports.push(ntk_report(&trunk, &branch, &inputs)?);
    }
    let (rows, monotone) = condition_sweep(cfg.wavelength, cfg.ntk_half_width, cfg.trunk_h, &cfg.ntk_sweep)?;
    Ok((reports, rows, monotone))
}

pub fn cmd_ntk(cfg: &RunConfig, ws: &Workspace) -> Result<(Vec<NtkReport>, Vec<SweepRow>, bool)> {
    ws.prepare()?;
    let (reports, rows, monotone) = ntk_study(cfg)?;
    for r in &reports {
        let mut w = ws.create(&format!("ntk_s{}_spectra.csv", r.s))?;
        r.write_spectra_csv(&mut w)?;
        w.flush()?;
        let mut w = ws.create(&format!("ntk_s{}_summary.txt", r.s))?;
        r.write_summary(&mut w)?;
        w.flush()?;
    }
    let mut w = ws.create("ntk_sweep.csv")?;
    write_sweep_csv(&mut w, &rows)?;
    w.flush()?;
    write_metadata(ws, "ntk", cfg, &[("ntk.sweep_monotone".into(), monotone.to_string())])?;
    Ok((reports, rows, monotone))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkRecord {
    pub grid_size: usize,
    pub morozov_seconds: f64,
    pub learned_seconds: f64,
}

impl BenchmarkRecord {
    pub fn speedup(&self) -> f64 {
        self.morozov_seconds / self.learned_seconds
    }
}

fn best_of<F: FnMut() -> Result<()>>(repeats: usize, mut f: F) -> Result<f64> {
    let mut best = f64::INFINITY;
    for _ in 0..repeats.max(1) {
        let t0 = Instant::now();
        f()?;
        best = best.min(t0.elapsed().as_secs_f64());
    }
    Ok(best)
}

/// Wall time of Morozov LSM vs learned-regularizer LSM on one measurement.
/// Far-field assembly and the SVD are shared and excluded; the learned time
/// includes the noise estimate and the DeepONet field.
pub fn benchmark(
    cfg: &RunConfig,
    models: &(RbfDeepOnet, NoiseNet),
    grid_sizes: &[usize],
    exec: Exec,
) -> Result<Vec<BenchmarkRecord>> {
    let seeds = Seeds::derive(cfg.seed);
    let meas = measure(cfg, cfg.measurement_m, cfg.measurement_n, seeds.measurement)?;
    let f = &meas.noisy;
    let factors = svd(f.entries())?;
    let (don, noise) = models;
    grid_sizes
        .iter()
        .map(|&size| {
            let grid = SamplingGrid::new(cfg.domain(), size)?;
            let morozov = Strategy::Morozov { delta: meas.delta };
            let morozov_seconds = best_of(cfg.benchmark_repeats, || {
                lsm_indicator_from_svd(f, &factors, &grid, &morozov, exec).map(drop)
            })?;
            let learned_seconds = best_of(cfg.benchmark_repeats, || {
                let field = learned_regularizer(don, noise, f, &grid)?;
                lsm_indicator_from_svd(f, &factors, &grid, &Strategy::Field(field), exec).map(drop)
            })?;
            Ok(BenchmarkRecord {
                grid_size: size,
                morozov_seconds,
                learned_seconds,
            })
        })
        .collect()
}

pub fn cmd_benchmark(cfg: &RunConfig, ws: &Workspace) -> Result<Vec<BenchmarkRecord>> {
    ws.prepare()?;
    let models = load_models(ws)?;
    let records = benchmark(cfg, &models, &cfg.benchmark_grid_sizes, ws.exec)?;
    let mut w = ws.create("benchmark.csv")?;
    writeln!(w, "grid_size,points,morozov_seconds,learned_seconds,speedup")?;
    for r in &records {
        writeln!(
            w,
            "{},{},{:.6e},{:.6e},{:.4}",
            r.grid_size,
            r.grid_size * r.grid_size,
            r.morozov_seconds,
            r.learned_seconds,
            r.speedup()
        )?;
    }
    w.flush()?;
    write_metadata(
        ws,
        "benchmark",
        cfg,
        &[("benchmark.threads".into(), rayon_threads().to_string())],
    )?;
    Ok(records)
}

fn rayon_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Path of an output file.
pub fn output_path(ws: &Workspace, name: &str) -> PathBuf {
    ws.path(name)
}
