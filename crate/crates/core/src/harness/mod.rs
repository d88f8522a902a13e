//! Experiment runner: executes scheme x seed x sweep-point cells with paired
//! channel draws, collects per-episode and per-evaluation metrics, and writes
//! them as flat CSV plus plot-ready summaries.

mod config;

pub use config::{
    EnvSection, ExperimentConfig, ExperimentSection, Scheme, Sweep, SweepPoint,
};

use crate::agents::{Actor, DdpgAgent, SacAgent, TrainTrace};
use crate::baselines::{random_phase_rate, random_search_oracle};
use crate::channel::{sample_channel, ChannelRealization, SystemConfig};
use crate::env::RisEnv;
use crate::numerics::{derive_seed, RngStream};
use std::io::{BufRead, Write};

/// One CSV record. `episode` doubles as the evaluation-channel index for
/// eval metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scheme: String,
    pub seed: u64,
    pub sweep_value: f64,
    pub episode: usize,
    pub metric: String,
    pub value: f64,
}

pub const CSV_HEADER: &str = "scheme,seed,sweep_value,episode,metric,value";

/// Values are printed with 17 significant digits so a round trip through the
/// file reproduces every f64 bit for bit.
pub fn write_csv<W: Write>(rows: &[ResultRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{:.17e},{},{},{:.17e}",
            r.scheme, r.seed, r.sweep_value, r.episode, r.metric, r.value
        )?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(r: R) -> Result<Vec<ResultRow>, String> {
    let mut lines = r.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == CSV_HEADER => {}
        other => return Err(format!("bad or missing CSV header: {other:?}")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| format!("read error at data line {}: {e}", i + 1))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(format!("expected 6 fields at data line {}, got {}", i + 1, fields.len()));
        }
        rows.push(ResultRow {
            scheme: fields[0].to_string(),
            seed: fields[1].parse().map_err(|e| format!("line {}: seed: {e}", i + 1))?,
            sweep_value: fields[2].parse().map_err(|e| format!("line {}: sweep_value: {e}", i + 1))?,
            episode: fields[3].parse().map_err(|e| format!("line {}: episode: {e}", i + 1))?,
            metric: fields[4].to_string(),
            value: fields[5].parse().map_err(|e| format!("line {}: value: {e}", i + 1))?,
        });
    }
    Ok(rows)
}

/// Held-out evaluation channels for one (seed, sweep point) cell. Depends on
/// neither the scheme nor the agent stream, so every scheme is scored on the
/// same fading draws; SNR points share draws too, keeping power sweeps paired.
pub fn eval_channels(
    system: &SystemConfig,
    seed: u64,
    point: &SweepPoint,
    count: usize,
) -> Vec<ChannelRealization> {
    let cell = cell_seed(seed, point);
    let mut rng = RngStream::new(derive_seed(cell, "eval-channels"));
    (0..count).map(|_| sample_channel(system, &mut rng)).collect()
}

fn cell_seed(seed: u64, point: &SweepPoint) -> u64 {
    derive_seed(seed, &point.channel_label())
}

/// Deterministic policy rollout on one fixed channel; the reward after
/// `steps` greedy actions is the channel's score.
pub fn evaluate_on_channel<A: Actor>(
    agent: &A,
    env: &mut RisEnv,
    chan: &ChannelRealization,
    steps: usize,
) -> f64 {
    let mut state = env.reset_with_channel(chan.clone()).to_vec();
    // env_rng is never touched on a per-episode env within one episode, but
    // step() still wants a stream; give it a throwaway with a fixed seed
    let mut sink = RngStream::new(0);
    let mut last = 0.0;
    for _ in 0..steps {
        let action = agent.act(&state, true, &mut RngStream::new(0));
        let (next, reward) = env.step(&action, &mut sink).expect("eval step failed");
        state = next.to_vec();
        last = reward;
    }
    last
}

fn trace_rows(scheme: &Scheme, seed: u64, sweep_value: f64, trace: &[TrainTrace]) -> Vec<ResultRow> {
    let mut rows = Vec::with_capacity(trace.len());
    for t in trace {
        rows.push(ResultRow {
            scheme: scheme.name().into(),
            seed,
            sweep_value,
            episode: t.episode,
            metric: "train_reward".into(),
            value: t.mean_reward,
        });
    }
    rows
}

fn eval_rows(scheme: &Scheme, seed: u64, sweep_value: f64, rates: &[f64]) -> Vec<ResultRow> {
    rates
        .iter()
        .enumerate()
        .map(|(i, &r)| ResultRow {
            scheme: scheme.name().into(),
            seed,
            sweep_value,
            episode: i,
            metric: "eval_rate".into(),
            value: r,
        })
        .collect()
}

/// Runs one scheme on one (seed, sweep point) cell. Training channels come
/// from a stream derived from the cell only, so learning schemes see
/// identical fading; agent randomness is scheme-specific.
pub fn run_cell(
    cfg: &ExperimentConfig,
    scheme: Scheme,
    seed: u64,
    point: SweepPoint,
) -> Result<Vec<ResultRow>, String> {
    let system = cfg.system_at(point);
    system.validate().map_err(|e| format!("system at {}: {e}", point.label()))?;
    let sweep_value = point.value();
    let cell = cell_seed(seed, &point);
    let evals = eval_channels(&system, seed, &point, cfg.experiment.eval_channels);
    let mut env = RisEnv::new(cfg.env_config(system.clone()));
    if scheme.is_learning() && cfg.experiment.train_on_eval_channels {
        env.set_channel_pool(evals.clone());
    }
    let mut env_rng = RngStream::new(derive_seed(cell, "train-channels"));
    let mut agent_rng = RngStream::new(derive_seed(cell, &format!("agent-{}", scheme.name())));

    let mut rows = Vec::new();
    match scheme {
        Scheme::Sac | Scheme::DpSac => {
            let mut agent_cfg = cfg.agent.clone();
            if scheme == Scheme::DpSac {
                agent_cfg.alpha = 0.0;
            }
            agent_cfg.validate().map_err(|e| format!("agent: {e}"))?;
            let mut agent =
                SacAgent::new(env.state_dim(), env.action_dim(), agent_cfg, &mut agent_rng);
            let trace = agent.train(&mut env, cfg.experiment.episodes, &mut agent_rng, &mut env_rng);
            rows.extend(trace_rows(&scheme, seed, sweep_value, &trace));
            let rates: Vec<f64> = evals
                .iter()
                .map(|c| evaluate_on_channel(&agent, &mut env, c, cfg.experiment.eval_steps))
                .collect();
            rows.extend(eval_rows(&scheme, seed, sweep_value, &rates));
        }
        Scheme::Ddpg => {
            let mut agent = DdpgAgent::new(
                env.state_dim(),
                env.action_dim(),
                cfg.ddpg_config(),
                &mut agent_rng,
            );
            let trace = agent.train(&mut env, cfg.experiment.episodes, &mut agent_rng, &mut env_rng);
            rows.extend(trace_rows(&scheme, seed, sweep_value, &trace));
            let rates: Vec<f64> = evals
                .iter()
                .map(|c| evaluate_on_channel(&agent, &mut env, c, cfg.experiment.eval_steps))
                .collect();
            rows.extend(eval_rows(&scheme, seed, sweep_value, &rates));
        }
        Scheme::RandomRis => {
            let rates: Vec<f64> = evals
                .iter()
                .map(|c| random_phase_rate(&system, c, &mut agent_rng))
                .collect();
            rows.extend(eval_rows(&scheme, seed, sweep_value, &rates));
        }
        Scheme::NoRis => {
            // blocked direct link: exactly zero on every channel
            rows.extend(eval_rows(&scheme, seed, sweep_value, &vec![0.0; evals.len()]));
        }
        Scheme::Oracle => {
            let rates: Vec<f64> = evals
                .iter()
                .map(|c| {
                    random_search_oracle(&system, c, cfg.experiment.oracle_samples, &mut agent_rng).1
                })
                .collect();
            rows.extend(eval_rows(&scheme, seed, sweep_value, &rates));
        }
    }
    Ok(rows)
}

/// Full grid run. A failing cell is reported and skipped rather than
/// aborting the sweep; the error strings come back alongside the rows.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(Vec<ResultRow>, Vec<String>), String> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for point in cfg.sweep_points() {
        for &scheme in &cfg.experiment.schemes {
            for &seed in &cfg.experiment.seeds {
                match run_cell(cfg, scheme, seed, point) {
                    Ok(mut r) => rows.append(&mut r),
                    Err(e) => failures.push(format!(
                        "cell scheme={} seed={seed} {}: {e}",
                        scheme.name(),
                        point.label()
                    )),
                }
            }
        }
    }
    Ok((rows, failures))
}

/// Per (scheme, sweep point) aggregate of one metric, pooled over seeds and
/// episodes/channels.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scheme: String,
    pub sweep_value: f64,
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub iqr_low: f64,
    pub iqr_high: f64,
}

/// Lower-median convention throughout: for even n the lower of the two
/// middle order statistics is reported, and quartiles use the same
/// index-based rule.
pub fn summarize(rows: &[ResultRow], metric: &str) -> Vec<SummaryRow> {
    let mut groups: Vec<(String, f64, Vec<f64>)> = Vec::new();
    for r in rows.iter().filter(|r| r.metric == metric) {
        match groups
            .iter_mut()
            .find(|(s, v, _)| *s == r.scheme && *v == r.sweep_value)
        {
            Some((_, _, vals)) => vals.push(r.value),
            None => groups.push((r.scheme.clone(), r.sweep_value, vec![r.value])),
        }
    }
    groups
        .into_iter()
        .map(|(scheme, sweep_value, mut vals)| {
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = vals.len();
            let mean = vals.iter().sum::<f64>() / n as f64;
            SummaryRow {
                scheme,
                sweep_value,
                n,
                mean,
                median: vals[(n - 1) / 2],
                iqr_low: vals[(n - 1) / 4],
                iqr_high: vals[(3 * (n - 1)) / 4],
            }
        })
        .collect()
}

/// Plot-ready table: one line per (sweep point, scheme) with median and
/// interquartile band.
pub fn write_plot_csv<W: Write>(summaries: &[SummaryRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "x,scheme,median,iqr_low,iqr_high")?;
    for s in summaries {
        writeln!(
            w,
            "{:.17e},{},{:.17e},{:.17e},{:.17e}",
            s.sweep_value, s.scheme, s.median, s.iqr_low, s.iqr_high
        )?;
    }
    Ok(())
}
