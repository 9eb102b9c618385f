//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Lists are comma separated.
//! Obstacles are given as `obstacle.<N>.<field>` keys, e.g.
//!
//! ```text
//! obstacle.0.type = disk
//! obstacle.0.center = 0.5, -1
//! obstacle.0.radius = 0.6
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use hybrid_lsm::geometry::{Obstacle, Point};
use hybrid_lsm::nn::WeightDecay;
use hybrid_lsm::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub wavenumber: f64,
    pub wavelength: f64,
    /// Half-width of the probing domain in wavelengths.
    pub half_width: f64,
    pub resolution: usize,
    pub canonical_m: usize,
    pub canonical_n: usize,
    pub measurement_m: usize,
    pub measurement_n: usize,
    pub quadrature: usize,

    pub trunk_h: f64,
    pub trunk_s: f64,
    pub trunk_allow_unstable: bool,

    pub deeponet_radius: (f64, f64),
    pub deeponet_epochs: usize,
    pub deeponet_batch_size: usize,
    pub deeponet_lr_start: f64,
    pub deeponet_lr_end: f64,
    pub deeponet_weight_decay: f64,
    pub deeponet_decay_mode: WeightDecay,
    pub deeponet_noise_augment: bool,
    pub deeponet_augment_eta: (f64, f64),
    pub deeponet_normalize_input: bool,

    pub noisenet_count: usize,
    pub noisenet_eta: (f64, f64),
    pub noisenet_radius: (f64, f64),
    pub noisenet_epochs: usize,
    pub noisenet_lr: f64,
    pub noisenet_weight_decay: f64,

    pub eta: f64,
    pub strategies: Vec<String>,
    /// `None`: `|F|_2 / 100`.
    pub constant_alpha: Option<f64>,
    pub threshold: f64,

    pub noise_eval_etas: Vec<f64>,
    pub noise_eval_seeds: usize,
    pub noise_eval_shapes: Vec<usize>,

    pub ntk_s_values: Vec<f64>,
    pub ntk_half_width: f64,
    pub ntk_batch: usize,
    pub ntk_sweep: Vec<f64>,

    pub benchmark_grid_sizes: Vec<usize>,
    pub benchmark_repeats: usize,

    pub seed: u64,
    pub scene: Vec<Obstacle>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            wavenumber: 2.0 * std::f64::consts::PI,
            wavelength: 1.0,
            half_width: 4.0,
            resolution: 100,
            canonical_m: 30,
            canonical_n: 30,
            measurement_m: 50,
            measurement_n: 50,
            quadrature: 128,
            trunk_h: 0.5,
            trunk_s: 0.15,
            trunk_allow_unstable: false,
            deeponet_radius: (0.5, 1.5),
            deeponet_epochs: 300,
            deeponet_batch_size: 64,
            deeponet_lr_start: 1e-3,
            deeponet_lr_end: 1e-5,
            deeponet_weight_decay: 5e-5,
            deeponet_decay_mode: WeightDecay::Decoupled,
            deeponet_noise_augment: false,
            deeponet_augment_eta: (5e-3, 0.3),
            deeponet_normalize_input: false,
            noisenet_count: 400,
            noisenet_eta: (5e-3, 0.3),
            noisenet_radius: (0.5, 1.5),
            noisenet_epochs: 300,
            noisenet_lr: 5e-3,
            noisenet_weight_decay: 1e-4,
            eta: 0.1,
            strategies: ["morozov", "constant", "learned", "deeponet"]
                .map(String::from)
                .to_vec(),
            constant_alpha: None,
            threshold: 0.5,
            noise_eval_etas: vec![0.01, 0.05, 0.1, 0.2],
            noise_eval_seeds: 50,
            noise_eval_shapes: vec![50, 100],
            ntk_s_values: vec![0.15, 0.8],
            ntk_half_width: 2.5,
            ntk_batch: 1,
            ntk_sweep: vec![0.01, 0.05, 0.15, 0.4, 0.8, 0.9],
            benchmark_grid_sizes: vec![10, 20, 50, 100, 200, 500],
            benchmark_repeats: 3,
            seed: 0,
            scene: vec![Obstacle::kite([0.0, 0.0], 0.8)],
        }
    }
}

fn bad(key: &str, value: &str, why: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key} = {value:?}: {why}"))
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e| bad(key, value, e))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn parse_pair(key: &str, value: &str) -> Result<(f64, f64)> {
    match parse_list::<f64>(key, value)?[..] {
        [a, b] => Ok((a, b)),
        _ => Err(bad(key, value, "expected two comma-separated numbers")),
    }
}

fn join<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Defaults overridden by the given text.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut obstacles: BTreeMap<usize, BTreeMap<String, String>> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if let Some(rest) = key.strip_prefix("obstacle.") {
                let (idx, field) = rest
                    .split_once('.')
                    .ok_or_else(|| bad(key, value, "expected obstacle.<N>.<field>"))?;
                let idx: usize = parse(key, idx)?;
                obstacles
                    .entry(idx)
                    .or_default()
                    .insert(field.to_string(), value.to_string());
            } else {
                cfg.set(key, value)?;
            }
        }
        if !obstacles.is_empty() {
            cfg.scene = obstacles
                .iter()
                .map(|(i, fields)| parse_obstacle(*i, fields))
                .collect::<Result<_>>()?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one (non-obstacle) key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "wavenumber" => self.wavenumber = parse(key, value)?,
            "wavelength" => self.wavelength = parse(key, value)?,
            "domain.half_width" => self.half_width = parse(key, value)?,
            "grid.resolution" => self.resolution = parse(key, value)?,
            "canonical.m" => self.canonical_m = parse(key, value)?,
            "canonical.n" => self.canonical_n = parse(key, value)?,
            "measurement.m" => self.measurement_m = parse(key, value)?,
            "measurement.n" => self.measurement_n = parse(key, value)?,
            "forward.quadrature" => self.quadrature = parse(key, value)?,
            "trunk.h" => self.trunk_h = parse(key, value)?,
            "trunk.s" => self.trunk_s = parse(key, value)?,
            "trunk.allow_unstable" => self.trunk_allow_unstable = parse(key, value)?,
            "deeponet.radius_range" => self.deeponet_radius = parse_pair(key, value)?,
            "deeponet.epochs" => self.deeponet_epochs = parse(key, value)?,
            "deeponet.batch_size" => self.deeponet_batch_size = parse(key, value)?,
            "deeponet.lr_start" => self.deeponet_lr_start = parse(key, value)?,
            "deeponet.lr_end" => self.deeponet_lr_end = parse(key, value)?,
            "deeponet.weight_decay" => self.deeponet_weight_decay = parse(key, value)?,
            "deeponet.decay_mode" => {
                self.deeponet_decay_mode = match value {
                    "decoupled" => WeightDecay::Decoupled,
                    "coupled" => WeightDecay::Coupled,
                    _ => return Err(bad(key, value, "expected decoupled or coupled")),
                }
            }
            "deeponet.noise_augment" => self.deeponet_noise_augment = parse(key, value)?,
            "deeponet.augment_eta_range" => self.deeponet_augment_eta = parse_pair(key, value)?,
            "deeponet.normalize_input" => self.deeponet_normalize_input = parse(key, value)?,
            "noisenet.count" => self.noisenet_count = parse(key, value)?,
            "noisenet.eta_range" => self.noisenet_eta = parse_pair(key, value)?,
            "noisenet.radius_range" => self.noisenet_radius = parse_pair(key, value)?,
            "noisenet.epochs" => self.noisenet_epochs = parse(key, value)?,
            "noisenet.lr" => self.noisenet_lr = parse(key, value)?,
            "noisenet.weight_decay" => self.noisenet_weight_decay = parse(key, value)?,
            "noise.eta" => self.eta = parse(key, value)?,
            "reconstruct.strategies" => self.strategies = parse_list(key, value)?,
            "reconstruct.constant_alpha" => {
                self.constant_alpha = if value == "auto" {
                    None
                } else {
                    Some(parse(key, value)?)
                }
            }
            "reconstruct.threshold" => self.threshold = parse(key, value)?,
            "noise_eval.etas" => self.noise_eval_etas = parse_list(key, value)?,
            "noise_eval.seeds" => self.noise_eval_seeds = parse(key, value)?,
            "noise_eval.shapes" => self.noise_eval_shapes = parse_list(key, value)?,
            "ntk.s_values" => self.ntk_s_values = parse_list(key, value)?,
            "ntk.half_width" => self.ntk_half_width = parse(key, value)?,
            "ntk.batch" => self.ntk_batch = parse(key, value)?,
            "ntk.sweep" => self.ntk_sweep = parse_list(key, value)?,
            "benchmark.grid_sizes" => self.benchmark_grid_sizes = parse_list(key, value)?,
            "benchmark.repeats" => self.benchmark_repeats = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wavenumber", self.wavenumber),
            ("wavelength", self.wavelength),
            ("domain.half_width", self.half_width),
            ("trunk.h", self.trunk_h),
            ("deeponet.lr_start", self.deeponet_lr_start),
            ("deeponet.lr_end", self.deeponet_lr_end),
            ("noisenet.lr", self.noisenet_lr),
            ("ntk.half_width", self.ntk_half_width),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{key} must be positive, got {v}")));
            }
        }
        if !(self.trunk_s > 0.0 && self.trunk_s < 1.0) {
            return Err(Error::Config(format!(
                "trunk.s must lie in (0, 1), got {}",
                self.trunk_s
            )));
        }
        if !(self.eta >= 0.0) {
            return Err(Error::Config(format!(
                "noise.eta must be non-negative, got {}",
                self.eta
            )));
        }
        for (key, v) in [
            ("grid.resolution", self.resolution),
            ("deeponet.batch_size", self.deeponet_batch_size),
            ("forward.quadrature", self.quadrature),
            ("ntk.batch", self.ntk_batch),
            ("benchmark.repeats", self.benchmark_repeats),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{key} must be at least 1")));
            }
        }
        for (key, v) in [
            ("canonical.m", self.canonical_m),
            ("canonical.n", self.canonical_n),
            ("measurement.m", self.measurement_m),
            ("measurement.n", self.measurement_n),
        ] {
            if v < 4 {
                return Err(Error::Config(format!("{key} must be at least 4, got {v}")));
            }
        }
        for s in &self.strategies {
            if !["morozov", "constant", "learned", "deeponet"].contains(&s.as_str()) {
                return Err(Error::Config(format!(
                    "reconstruct.strategies: unknown strategy `{s}` (morozov, constant, learned, deeponet)"
                )));
            }
        }
        if self.scene.is_empty() {
            return Err(Error::Config("scene has no obstacles".into()));
        }
        for o in &self.scene {
            o.validate()?;
        }
        Ok(())
    }

    /// Domain half-width in length units.
    pub fn domain(&self) -> f64 {
        self.wavelength * self.half_width
    }

    /// Canonical text form; `parse(to_text())` reproduces the configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let decay = match self.deeponet_decay_mode {
            WeightDecay::Decoupled => "decoupled",
            WeightDecay::Coupled => "coupled",
        };
        let pair = |p: (f64, f64)| format!("{}, {}", p.0, p.1);
        let rows: Vec<(&str, String)> = vec![
            ("wavenumber", self.wavenumber.to_string()),
            ("wavelength", self.wavelength.to_string()),
            ("domain.half_width", self.half_width.to_string()),
            ("grid.resolution", self.resolution.to_string()),
            ("canonical.m", self.canonical_m.to_string()),
            ("canonical.n", self.canonical_n.to_string()),
            ("measurement.m", self.measurement_m.to_string()),
            ("measurement.n", self.measurement_n.to_string()),
            ("forward.quadrature", self.quadrature.to_string()),
            ("trunk.h", self.trunk_h.to_string()),
            ("trunk.s", self.trunk_s.to_string()),
            ("trunk.allow_unstable", self.trunk_allow_unstable.to_string()),
            ("deeponet.radius_range", pair(self.deeponet_radius)),
            ("deeponet.epochs", self.deeponet_epochs.to_string()),
            ("deeponet.batch_size", self.deeponet_batch_size.to_string()),
            ("deeponet.lr_start", self.deeponet_lr_start.to_string()),
            ("deeponet.lr_end", self.deeponet_lr_end.to_string()),
            ("deeponet.weight_decay", self.deeponet_weight_decay.to_string()),
            ("deeponet.decay_mode", decay.to_string()),
            ("deeponet.noise_augment", self.deeponet_noise_augment.to_string()),
            ("deeponet.augment_eta_range", pair(self.deeponet_augment_eta)),
            ("deeponet.normalize_input", self.deeponet_normalize_input.to_string()),
            ("noisenet.count", self.noisenet_count.to_string()),
            ("noisenet.eta_range", pair(self.noisenet_eta)),
            ("noisenet.radius_range", pair(self.noisenet_radius)),
            ("noisenet.epochs", self.noisenet_epochs.to_string()),
            ("noisenet.lr", self.noisenet_lr.to_string()),
            ("noisenet.weight_decay", self.noisenet_weight_decay.to_string()),
            ("noise.eta", self.eta.to_string()),
            ("reconstruct.strategies", self.strategies.join(", ")),
            (
                "reconstruct.constant_alpha",
                self.constant_alpha.map_or("auto".to_string(), |a| a.to_string()),
            ),
            ("reconstruct.threshold", self.threshold.to_string()),
            ("noise_eval.etas", join(&self.noise_eval_etas)),
            ("noise_eval.seeds", self.noise_eval_seeds.to_string()),
            ("noise_eval.shapes", join(&self.noise_eval_shapes)),
            ("ntk.s_values", join(&self.ntk_s_values)),
            ("ntk.half_width", self.ntk_half_width.to_string()),
            ("ntk.batch", self.ntk_batch.to_string()),
            ("ntk.sweep", join(&self.ntk_sweep)),
            ("benchmark.grid_sizes", join(&self.benchmark_grid_sizes)),
            ("benchmark.repeats", self.benchmark_repeats.to_string()),
            ("seed", self.seed.to_string()),
        ];
        for (k, v) in rows {
            let _ = writeln!(s, "{k} = {v}");
        }
        for (i, o) in self.scene.iter().enumerate() {
            let c = o.center();
            let _ = writeln!(s, "obstacle.{i}.center = {}, {}", c[0], c[1]);
            match *o {
                Obstacle::Disk { radius, .. } => {
                    let _ = writeln!(s, "obstacle.{i}.type = disk\nobstacle.{i}.radius = {radius}");
                }
                Obstacle::Ellipse {
                    semi_a,
                    semi_b,
                    rotation,
                    ..
                } => {
                    let _ = writeln!(
                        s,
                        "obstacle.{i}.type = ellipse\nobstacle.{i}.semi_a = {semi_a}\nobstacle.{i}.semi_b = {semi_b}\nobstacle.{i}.rotation = {rotation}"
                    );
                }
                Obstacle::Kite { scale, .. } => {
                    let _ = writeln!(s, "obstacle.{i}.type = kite\nobstacle.{i}.scale = {scale}");
                }
            }
        }
        s
    }
}

fn parse_obstacle(index: usize, fields: &BTreeMap<String, String>) -> Result<Obstacle> {
    let key = |f: &str| format!("obstacle.{index}.{f}");
    let get = |f: &str| -> Result<f64> {
        let v = fields
            .get(f)
            .ok_or_else(|| Error::Config(format!("missing {}", key(f))))?;
        parse(&key(f), v)
    };
    let center: Point = match fields.get("center") {
        Some(v) => {
            let (x, y) = parse_pair(&key("center"), v)?;
            [x, y]
        }
        None => [0.0, 0.0],
    };
    let known: &[&str] = match fields.get("type").map(String::as_str) {
        Some("disk") => &["type", "center", "radius"],
        Some("kite") => &["type", "center", "scale"],
        Some("ellipse") => &["type", "center", "semi_a", "semi_b", "rotation"],
        Some(other) => return Err(bad(&key("type"), other, "expected disk, kite or ellipse")),
        None => return Err(Error::Config(format!("missing {}", key("type")))),
    };
    if let Some(extra) = fields.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(Error::Config(format!("unknown key `{}`", key(extra))));
    }
    let obstacle = match fields["type"].as_str() {
        "disk" => Obstacle::disk(center, get("radius")?),
        "kite" => Obstacle::kite(center, get("scale")?),
        _ => Obstacle::ellipse(
            center,
            get("semi_a")?,
            get("semi_b")?,
            fields.get("rotation").map_or(Ok(0.0), |v| parse(&key("rotation"), v))?,
        ),
    };
    obstacle
        .validate()
        .map_err(|e| Error::Config(format!("obstacle.{index}: {e}")))?;
    Ok(obstacle)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.scene = vec![
            Obstacle::disk([1.0, -0.5], 0.6),
            Obstacle::ellipse([0.0, 2.0], 0.8, 0.4, 0.3),
        ];
        cfg.constant_alpha = Some(1e-3);
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn errors_name_the_field() {
        let e = RunConfig::parse("trunk.s = 1.5").unwrap_err().to_string();
        assert!(e.contains("trunk.s"), "{e}");
        let e = RunConfig::parse("grid.resolution = ten").unwrap_err().to_string();
        assert!(e.contains("grid.resolution"), "{e}");
        let e = RunConfig::parse("obstacle.0.type = disk").unwrap_err().to_string();
        assert!(e.contains("obstacle.0.radius"), "{e}");
        assert!(RunConfig::parse("nonsense = 1").is_err());
        assert!(RunConfig::parse("obstacle.1.type = disk\nobstacle.1.radius = 1\nobstacle.1.colour = red").is_err());
    }

    #[test]
    fn comments_and_lists() {
        let cfg = RunConfig::parse("# two disks\nnoise_eval.etas = 0.1, 0.2 # trailing\nseed = 7").unwrap();
        assert_eq!(cfg.noise_eval_etas, vec![0.1, 0.2]);
        assert_eq!(cfg.seed, 7);
    }
}
