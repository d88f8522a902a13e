//! Non-learning reference schemes: random RIS phases, no RIS at all, and a
//! seeded random-search reference used as the near-optimal yardstick on
//! small instances.

use crate::beamforming::{build_beamformers, PhaseAction};
use crate::channel::{sample_channel, ChannelRealization, SystemConfig};
use crate::numerics::RngStream;
use std::f64::consts::TAU;

/// Per-scheme evaluation summary over a set of channel realizations.
#[derive(Debug, Clone)]
pub struct BaselineResult {
    pub scheme: String,
    pub rates: Vec<f64>,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
}

impl BaselineResult {
    pub fn from_rates(scheme: &str, rates: Vec<f64>) -> Self {
        assert!(!rates.is_empty());
        let n = rates.len() as f64;
        let mean = rates.iter().sum::<f64>() / n;
        let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
        let mut sorted = rates.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // lower-median convention for even n
        let median = sorted[(sorted.len() - 1) / 2];
        Self {
            scheme: scheme.to_string(),
            rates,
            mean,
            median,
            std: var.sqrt(),
        }
    }
}

fn uniform_action(cfg: &SystemConfig, rng: &mut RngStream) -> PhaseAction {
    let analog = (0..cfg.n_t * cfg.n_rf)
        .map(|_| rng.uniform_range(0.0, TAU))
        .collect();
    let ris = (0..cfg.m_ris).map(|_| rng.uniform_range(0.0, TAU)).collect();
    PhaseAction::new(cfg.n_t, cfg.n_rf, analog, ris)
}

/// One random draw of all phases on a given channel, digital stage closed via
/// MMSE.
pub fn random_phase_rate(cfg: &SystemConfig, chan: &ChannelRealization, rng: &mut RngStream) -> f64 {
    let action = uniform_action(cfg, rng);
    let set = build_beamformers(chan, &action, cfg.power, cfg.noise_var)
        .expect("beamformer construction failed on random action");
    crate::beamforming::sum_rate(chan, &set, cfg.power, cfg.noise_var)
}

/// Random RIS/analog phases, one draw per realization.
pub fn random_ris_eval(cfg: &SystemConfig, realizations: usize, rng: &mut RngStream) -> BaselineResult {
    let rates = (0..realizations)
        .map(|_| {
            let chan = sample_channel(cfg, rng);
            random_phase_rate(cfg, &chan, rng)
        })
        .collect();
    BaselineResult::from_rates("random-ris", rates)
}

/// Random RIS evaluated on externally supplied (paired) channels.
pub fn random_ris_eval_on(cfg: &SystemConfig, chans: &[ChannelRealization], rng: &mut RngStream) -> BaselineResult {
    let rates = chans
        .iter()
        .map(|chan| random_phase_rate(cfg, chan, rng))
        .collect();
    BaselineResult::from_rates("random-ris", rates)
}

/// Without a RIS the blocked direct link leaves no propagation path at all,
/// so the rate floor is exactly zero.
pub fn no_ris_eval(_cfg: &SystemConfig, realizations: usize, _rng: &mut RngStream) -> BaselineResult {
    BaselineResult::from_rates("no-ris", vec![0.0; realizations])
}

/// Best sum-rate over `samples` uniform phase draws, MMSE-closed each time.
/// Deterministic given the stream's seed.
pub fn random_search_oracle(
    cfg: &SystemConfig,
    chan: &ChannelRealization,
    samples: usize,
    rng: &mut RngStream,
) -> (PhaseAction, f64) {
    assert!(samples >= 1);
    let mut best_rate = f64::NEG_INFINITY;
    let mut best_action = None;
    for _ in 0..samples {
        let action = uniform_action(cfg, rng);
        let set = build_beamformers(chan, &action, cfg.power, cfg.noise_var)
            .expect("beamformer construction failed in oracle");
        let rate = crate::beamforming::sum_rate(chan, &set, cfg.power, cfg.noise_var);
        if rate > best_rate {
            best_rate = rate;
            best_action = Some(action);
        }
    }
    (best_action.unwrap(), best_rate)
}
