use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hybrid_lsm::Result;
use hybrid_lsm_cli::commands::{
    cmd_benchmark, cmd_gen, cmd_noise_eval, cmd_ntk, cmd_reconstruct, cmd_train, Which, Workspace,
};
use hybrid_lsm_cli::RunConfig;

#[derive(Parser)]
#[command(
    name = "hlsm",
    version,
    about = "Linear sampling with learned regularization for inverse acoustic scattering"
)]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the `seed` key.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0: all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Net {
    Deeponet,
    Noisenet,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the DeepONet and noise-net training sets.
    Gen,
    /// Train networks on the generated sets.
    Train {
        #[arg(long, value_enum, default_value_t = Net::Both)]
        which: Net,
    },
    /// Reconstruct the configured scene with the configured strategies.
    Reconstruct {
        /// Directory holding the trained models (default: --out).
        #[arg(long)]
        models: Option<PathBuf>,
        /// Comma-separated subset of morozov, constant, learned, deeponet.
        #[arg(long)]
        strategy: Option<String>,
    },
    /// Noise-estimation error study.
    NoiseEval {
        #[arg(long)]
        models: Option<PathBuf>,
    },
    /// Tangent-kernel spectra and trunk conditioning.
    Ntk {
        /// Comma-separated overlap parameters.
        #[arg(long)]
        s_values: Option<String>,
    },
    /// Morozov vs learned regularization timing.
    Benchmark {
        #[arg(long)]
        models: Option<PathBuf>,
        /// Comma-separated grid sizes per axis.
        #[arg(long)]
        grid_sizes: Option<String>,
    },
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    #[cfg(feature = "parallel")]
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| hybrid_lsm::Error::Config(format!("--threads: {e}")))?;
    }
    let ws = Workspace::new(&cli.out);
    let with_models = |m: &Option<PathBuf>| match m {
        Some(dir) => ws.clone().with_inputs(dir),
        None => ws.clone(),
    };
    match cli.command {
        Command::Gen => {
            let s = cmd_gen(&cfg, &ws)?;
            println!(
                "deeponet samples: {}\nnoise samples: {}",
                s.deeponet_samples, s.noise_samples
            );
        }
        Command::Train { which } => {
            let which = match which {
                Net::Deeponet => Which::DeepOnet,
                Net::Noisenet => Which::NoiseNet,
                Net::Both => Which::Both,
            };
            let s = cmd_train(&cfg, &ws, which, true)?;
            if let (Some(h), Some(t)) = (&s.deeponet_loss, s.deeponet_seconds) {
                println!(
                    "deeponet: final loss {:.4e} after {} epochs, {t:.1} s",
                    h.last().unwrap_or(&f64::NAN),
                    h.len()
                );
            }
            if let (Some(h), Some(t)) = (&s.noisenet_loss, s.noisenet_seconds) {
                println!(
                    "noisenet: final loss {:.4e} after {} epochs, {t:.2} s",
                    h.last().unwrap_or(&f64::NAN),
                    h.len()
                );
            }
        }
        Command::Reconstruct { models, strategy } => {
            if let Some(list) = strategy {
                cfg.set("reconstruct.strategies", &list)?;
                cfg.validate()?;
            }
            for m in cmd_reconstruct(&cfg, &with_models(&models))? {
                println!(
                    "{:<9} contrast {:>9.4} iou {:.3} components {} fallbacks {}",
                    m.strategy, m.contrast, m.iou, m.components, m.fallbacks
                );
            }
        }
        Command::NoiseEval { models } => {
            println!("{:<12} {:>7} {:>6} {:>12}", "obstacle", "shape", "eta", "mean rel err");
            for s in cmd_noise_eval(&cfg, &with_models(&models))? {
                println!(
                    "{:<12} {:>7} {:>6} {:>12.4}",
                    s.obstacle,
                    format!("{0}x{0}", s.shape),
                    s.eta,
                    s.mean_rel_err
                );
            }
        }
        Command::Ntk { s_values } => {
            if let Some(list) = s_values {
                cfg.set("ntk.s_values", &list)?;
            }
            let (reports, rows, monotone) = cmd_ntk(&cfg, &ws)?;
            for r in &reports {
                println!(
                    "s = {}: p = {}, cond(K) {:.3e}, cond(G) {:.3e}, cond(P) {:.3e}, bounds {}",
                    r.s,
                    r.p,
                    r.cond_k,
                    r.cond_g,
                    r.cond_p,
                    if r.bounds_hold() { "hold" } else { "VIOLATED" }
                );
            }
            for row in &rows {
                println!(
                    "sweep s = {}: eps {:.4}, cond(P) {:.4e}",
                    row.s, row.epsilon, row.cond_p
                );
            }
            println!("condition number increasing in s: {monotone}");
        }
        Command::Benchmark { models, grid_sizes } => {
            if let Some(list) = grid_sizes {
                cfg.set("benchmark.grid_sizes", &list)?;
            }
            println!(
                "{:>6} {:>12} {:>12} {:>8}",
                "grid", "morozov [s]", "learned [s]", "speedup"
            );
            for r in cmd_benchmark(&cfg, &with_models(&models))? {
                println!(
                    "{:>6} {:>12.4e} {:>12.4e} {:>8.2}",
                    r.grid_size,
                    r.morozov_seconds,
                    r.learned_seconds,
                    r.speedup()
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
