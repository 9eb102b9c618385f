//! Runs every verb of the binary on a small configuration.

use std::path::Path;
use std::process::{Command, Output};

use hybrid_lsm_cli::RunConfig;

const SMALL: &str = "\
# small smoke configuration
domain.half_width = 2
grid.resolution = 30
canonical.m = 12
canonical.n = 12
measurement.m = 16
measurement.n = 16
deeponet.epochs = 3
deeponet.radius_range = 0.5, 1.0
noisenet.count = 40
noisenet.epochs = 20
noise_eval.seeds = 2
noise_eval.shapes = 16
noise_eval.etas = 0.1
ntk.half_width = 1
ntk.sweep = 0.05, 0.5
benchmark.grid_sizes = 10, 20
benchmark.repeats = 1
obstacle.0.type = kite
obstacle.0.scale = 0.8
";

fn hlsm(dir: &Path, args: &[&str]) -> Output {
    let cfg = dir.join("small.cfg");
    Command::new(env!("CARGO_BIN_EXE_hlsm"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn every_verb_writes_its_outputs() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.cfg"), SMALL).unwrap();
    let out = dir.path().join("out");

    assert_ok(&hlsm(dir.path(), &["gen"]));
    for f in [
        "deeponet_train.bin",
        "noisenet_train.bin",
        "manifest.txt",
        "run_gen.txt",
        "timing_gen.txt",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert_ok(&hlsm(dir.path(), &["train", "--which", "both"]));
    for f in [
        "deeponet.rdon",
        "noisenet.nnet",
        "deeponet_loss.csv",
        "noisenet_loss.csv",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let loss = std::fs::read_to_string(out.join("noisenet_loss.csv")).unwrap();
    assert_eq!(loss.lines().count(), 21);

    let r = hlsm(dir.path(), &["reconstruct"]);
    assert_ok(&r);
    let stdout = String::from_utf8_lossy(&r.stdout);
    for s in ["morozov", "constant", "learned", "deeponet"] {
        assert!(stdout.contains(s));
        assert!(out.join(format!("indicator_{s}.csv")).exists());
        assert!(out.join(format!("indicator_{s}.pgm")).exists());
        assert!(out.join(format!("metrics_{s}.txt")).exists());
    }
    assert!(out.join("regfield_learned.csv").exists());
    assert!(!out.join("regfield_deeponet.csv").exists());
    let csv = std::fs::read_to_string(out.join("indicator_morozov.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 30 * 30);

    assert_ok(&hlsm(dir.path(), &["noise-eval"]));
    let summary = std::fs::read_to_string(out.join("noise_eval_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 3);

    assert_ok(&hlsm(dir.path(), &["ntk", "--s-values", "0.15,0.8"]));
    assert!(out.join("ntk_s0.15_spectra.csv").exists());
    assert!(out.join("ntk_s0.8_summary.txt").exists());
    let sweep = std::fs::read_to_string(out.join("ntk_sweep.csv")).unwrap();
    assert!(sweep.starts_with("s,epsilon,cond_P"));

    assert_ok(&hlsm(dir.path(), &["benchmark", "--threads", "1"]));
    let bench = std::fs::read_to_string(out.join("benchmark.csv")).unwrap();
    assert!(bench.starts_with("grid_size,points,morozov_seconds,learned_seconds,speedup"));
    assert_eq!(bench.lines().count(), 3);
}

#[test]
fn seed_flag_overrides_config_and_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.cfg"), SMALL).unwrap();
    assert_ok(&hlsm(dir.path(), &["gen", "--seed", "9"]));
    let meta = std::fs::read_to_string(dir.path().join("out/run_gen.txt")).unwrap();
    assert!(meta.contains("seed = 9"), "{meta}");
    assert!(meta.contains("deeponet_data = 9000"), "{meta}");
}

#[test]
fn failures_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.cfg"), "grid.resolution = 0\n").unwrap();
    let r = hlsm(dir.path(), &["gen"]);
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("grid.resolution"));

    // reconstructing with learned strategies before training
    std::fs::write(dir.path().join("small.cfg"), SMALL).unwrap();
    let r = hlsm(dir.path(), &["reconstruct", "--strategy", "learned"]);
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("deeponet.rdon"));

    // classical strategies need no models
    assert_ok(&hlsm(dir.path(), &["reconstruct", "--strategy", "morozov,constant"]));
}

#[test]
fn config_text_round_trips() {
    let cfg = RunConfig::parse(SMALL).unwrap();
    assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    assert_eq!(cfg.resolution, 30);
    assert!(RunConfig::parse("no.such.key = 1\n").is_err());
}
