//! Command-line front end: train a single agent, evaluate a checkpoint,
//! run a full experiment sweep, or score the random-search reference.
//!
//! Exit codes: 0 success, 1 bad usage or config, 2 runtime failure.

use clap::{Parser, Subcommand};
use risbeam::agents::{DdpgAgent, SacAgent};
use risbeam::baselines::random_search_oracle;
use risbeam::harness::{
    self, eval_channels, evaluate_on_channel, run_experiment, summarize, write_csv,
    write_plot_csv, ExperimentConfig, ResultRow, Scheme, SweepPoint,
};
use risbeam::numerics::derive_seed;
use risbeam::{RisEnv, RngStream};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "risbeam", about = "RIS-assisted beamforming simulator and training stack")]
struct Cli {
    /// TOML experiment config; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the first seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one agent and write its checkpoint plus a training-trace CSV.
    Train {
        #[arg(long, default_value = "sac")]
        scheme: Scheme,
        /// Output directory for checkpoint files and trace.csv.
        #[arg(long, default_value = "runs/train")]
        out: PathBuf,
    },
    /// Score a saved checkpoint on held-out channels.
    Evaluate {
        #[arg(long, default_value = "sac")]
        scheme: Scheme,
        /// Checkpoint directory written by `train`.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Output CSV of per-channel rates.
        #[arg(long, default_value = "runs/eval.csv")]
        out: PathBuf,
    },
    /// Run every scheme x seed x sweep-point cell and write results.csv
    /// plus a plot-ready summary.
    Sweep {
        /// Output directory for results.csv and plot.csv.
        #[arg(long, default_value = "runs/sweep")]
        out: PathBuf,
    },
    /// Random-search upper reference on held-out channels.
    Oracle {
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value = "runs/oracle.csv")]
        out: PathBuf,
    },
}

/// Errors that should exit with code 2 instead of 1.
struct UsageError(String);

fn load_config(path: &Option<PathBuf>, seed: Option<u64>) -> Result<ExperimentConfig, UsageError> {
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| UsageError(format!("cannot read {}: {e}", p.display())))?;
            ExperimentConfig::from_toml(&text).map_err(UsageError)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = seed {
        if cfg.experiment.seeds.is_empty() {
            cfg.experiment.seeds = vec![s];
        } else {
            cfg.experiment.seeds[0] = s;
        }
    }
    cfg.validate().map_err(UsageError)?;
    Ok(cfg)
}

fn write_rows(path: &Path, rows: &[ResultRow]) -> Result<(), String> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| e.to_string())?;
    }
    let file = std::fs::File::create(path).map_err(|e| e.to_string())?;
    write_csv(rows, std::io::BufWriter::new(file)).map_err(|e| e.to_string())
}

fn cmd_train(cfg: &ExperimentConfig, scheme: Scheme, out: &Path) -> Result<(), String> {
    if !scheme.is_learning() {
        return Err(format!("scheme '{}' has nothing to train", scheme.name()));
    }
    let seed = cfg.experiment.seeds[0];
    let rows = harness::run_cell(cfg, scheme, seed, SweepPoint::None)?;

    // run_cell does not expose the agent, so rebuild it on the same streams
    // to produce the checkpoint; the trace rows above already describe it
    let system = cfg.system_at(SweepPoint::None);
    let mut env = RisEnv::new(cfg.env_config(system));
    let cell = derive_seed(seed, &SweepPoint::None.label());
    let mut env_rng = RngStream::new(derive_seed(cell, "train-channels"));
    let mut agent_rng = RngStream::new(derive_seed(cell, &format!("agent-{}", scheme.name())));
    std::fs::create_dir_all(out).map_err(|e| e.to_string())?;
    match scheme {
        Scheme::Ddpg => {
            let mut agent = DdpgAgent::new(
                env.state_dim(),
                env.action_dim(),
                cfg.ddpg_config(),
                &mut agent_rng,
            );
            agent.train(&mut env, cfg.experiment.episodes, &mut agent_rng, &mut env_rng);
            agent.save_checkpoint(out).map_err(|e| e.to_string())?;
        }
        _ => {
            let mut agent_cfg = cfg.agent.clone();
            if scheme == Scheme::DpSac {
                agent_cfg.alpha = 0.0;
            }
            let mut agent =
                SacAgent::new(env.state_dim(), env.action_dim(), agent_cfg, &mut agent_rng);
            agent.train(&mut env, cfg.experiment.episodes, &mut agent_rng, &mut env_rng);
            agent.save_checkpoint(out).map_err(|e| e.to_string())?;
        }
    }
    write_rows(&out.join("trace.csv"), &rows)?;
    let summary = summarize(&rows, "eval_rate");
    if let Some(s) = summary.first() {
        println!(
            "trained {} seed {seed}: eval median {:.4} over {} channels",
            scheme.name(),
            s.median,
            s.n
        );
    }
    println!("checkpoint and trace written to {}", out.display());
    Ok(())
}

fn cmd_evaluate(
    cfg: &ExperimentConfig,
    scheme: Scheme,
    checkpoint: &Path,
    out: &Path,
) -> Result<(), String> {
    if !scheme.is_learning() {
        return Err(format!("scheme '{}' has no checkpoint to evaluate", scheme.name()));
    }
    let seed = cfg.experiment.seeds[0];
    let system = cfg.system_at(SweepPoint::None);
    let mut env = RisEnv::new(cfg.env_config(system.clone()));
    let mut init_rng = RngStream::new(0);
    let chans = eval_channels(&system, seed, &SweepPoint::None, cfg.experiment.eval_channels);

    let rates: Vec<f64> = match scheme {
        Scheme::Ddpg => {
            let mut agent = DdpgAgent::new(
                env.state_dim(),
                env.action_dim(),
                cfg.ddpg_config(),
                &mut init_rng,
            );
            agent.load_checkpoint(checkpoint).map_err(|e| e.to_string())?;
            chans
                .iter()
                .map(|c| evaluate_on_channel(&agent, &mut env, c, cfg.experiment.eval_steps))
                .collect()
        }
        _ => {
            let mut agent = SacAgent::new(
                env.state_dim(),
                env.action_dim(),
                cfg.agent.clone(),
                &mut init_rng,
            );
            agent.load_checkpoint(checkpoint).map_err(|e| e.to_string())?;
            chans
                .iter()
                .map(|c| evaluate_on_channel(&agent, &mut env, c, cfg.experiment.eval_steps))
                .collect()
        }
    };
    let rows: Vec<ResultRow> = rates
        .iter()
        .enumerate()
        .map(|(i, &r)| ResultRow {
            scheme: scheme.name().into(),
            seed,
            sweep_value: 0.0,
            episode: i,
            metric: "eval_rate".into(),
            value: r,
        })
        .collect();
    write_rows(out, &rows)?;
    let s = &summarize(&rows, "eval_rate")[0];
    println!(
        "{}: median {:.4}, mean {:.4} over {} channels -> {}",
        scheme.name(),
        s.median,
        s.mean,
        s.n,
        out.display()
    );
    Ok(())
}

fn cmd_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<(), String> {
    let (rows, failures) = run_experiment(cfg)?;
    for f in &failures {
        eprintln!("warning: {f}");
    }
    std::fs::create_dir_all(out).map_err(|e| e.to_string())?;
    write_rows(&out.join("results.csv"), &rows)?;
    let summary = summarize(&rows, "eval_rate");
    let plot = std::fs::File::create(out.join("plot.csv")).map_err(|e| e.to_string())?;
    write_plot_csv(&summary, std::io::BufWriter::new(plot)).map_err(|e| e.to_string())?;
    for s in &summary {
        println!(
            "x={:<8} {:<12} median {:.4}  iqr [{:.4}, {:.4}]  n={}",
            s.sweep_value, s.scheme, s.median, s.iqr_low, s.iqr_high, s.n
        );
    }
    println!("results in {}", out.display());
    if rows.is_empty() {
        return Err("every cell failed".into());
    }
    Ok(())
}

fn cmd_oracle(cfg: &ExperimentConfig, samples: Option<usize>, out: &Path) -> Result<(), String> {
    let samples = samples.unwrap_or(cfg.experiment.oracle_samples);
    if samples == 0 {
        return Err("samples must be >= 1".into());
    }
    let seed = cfg.experiment.seeds[0];
    let system = cfg.system_at(SweepPoint::None);
    let chans = eval_channels(&system, seed, &SweepPoint::None, cfg.experiment.eval_channels);
    let cell = derive_seed(seed, &SweepPoint::None.label());
    let mut rng = RngStream::new(derive_seed(cell, "agent-oracle"));
    let rows: Vec<ResultRow> = chans
        .iter()
        .enumerate()
        .map(|(i, c)| ResultRow {
            scheme: "oracle".into(),
            seed,
            sweep_value: 0.0,
            episode: i,
            metric: "eval_rate".into(),
            value: random_search_oracle(&system, c, samples, &mut rng).1,
        })
        .collect();
    write_rows(out, &rows)?;
    let s = &summarize(&rows, "eval_rate")[0];
    println!(
        "oracle ({samples} samples): median {:.4}, mean {:.4} over {} channels -> {}",
        s.median,
        s.mean,
        s.n,
        out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(
            e.kind(),
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
        ) =>
        {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let cfg = match load_config(&cli.config, cli.seed) {
        Ok(c) => c,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    // scheme choice is part of input validation, not runtime
    if let Command::Train { scheme, .. } | Command::Evaluate { scheme, .. } = &cli.command {
        if !scheme.is_learning() {
            eprintln!("error: scheme '{}' is not trainable", scheme.name());
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Train { scheme, out } => cmd_train(&cfg, *scheme, out),
        Command::Evaluate {
            scheme,
            checkpoint,
            out,
        } => cmd_evaluate(&cfg, *scheme, checkpoint, out),
        Command::Sweep { out } => cmd_sweep(&cfg, out),
        Command::Oracle { samples, out } => cmd_oracle(&cfg, *samples, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
