//! MDP wrapper around the channel and beamforming layers: actions are raw
//! vectors in [-1,1] covering all analog and RIS phases, the state stacks the
//! previous action with the Re/Im-interleaved channel entries, and the reward
//! is the MMSE-closed sum-rate.

use crate::beamforming::{build_beamformers, sum_rate, PhaseAction};
use crate::channel::{sample_channel, ChannelRealization, SystemConfig};
use crate::numerics::RngStream;
use std::f64::consts::PI;

/// When the block-fading channel is redrawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelRefresh {
    /// Fresh channel at every reset, constant within an episode.
    PerEpisode,
    /// Fresh channel after every step.
    PerStep,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct EnvConfig {
    pub system: SystemConfig,
    pub steps_per_episode: usize,
    pub channel_refresh: ChannelRefresh,
    /// Scale channel features by 1/sqrt(M) when set.
    pub standardize_state: bool,
}

impl EnvConfig {
    pub fn new(system: SystemConfig) -> Self {
        Self {
            system,
            steps_per_episode: 50,
            channel_refresh: ChannelRefresh::PerEpisode,
            standardize_state: false,
        }
    }
}

/// Encoded state: the previous raw action followed by channel features.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub prev_action: Vec<f64>,
    pub chan_features: Vec<f64>,
}

impl EnvState {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.prev_action.len() + self.chan_features.len());
        v.extend_from_slice(&self.prev_action);
        v.extend_from_slice(&self.chan_features);
        v
    }

    pub fn len(&self) -> usize {
        self.prev_action.len() + self.chan_features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EnvError {
    #[error("action length mismatch: expected {expected}, got {got}")]
    ActionLength { expected: usize, got: usize },
    #[error("step called before reset")]
    NotReset,
    #[error("beamformer construction failed: {0}")]
    Beamforming(#[from] crate::numerics::LinAlgError),
}

/// One environment instance; owns its channel stream so that paired
/// comparisons can replay identical fading.
#[derive(Debug, Clone)]
pub struct RisEnv {
    pub cfg: EnvConfig,
    chan: Option<ChannelRealization>,
    prev_action: Vec<f64>,
    step_count: usize,
    pool: Option<Vec<ChannelRealization>>,
    pool_idx: usize,
}

impl RisEnv {
    pub fn new(cfg: EnvConfig) -> Self {
        Self {
            cfg,
            chan: None,
            prev_action: Vec::new(),
            step_count: 0,
            pool: None,
            pool_idx: 0,
        }
    }

    /// Pin resets to a fixed set of realizations, cycled round-robin, instead
    /// of drawing fresh fading. Used when an agent is trained and scored on
    /// the same channels as the paired reference schemes.
    pub fn set_channel_pool(&mut self, pool: Vec<ChannelRealization>) {
        assert!(!pool.is_empty());
        self.pool = Some(pool);
        self.pool_idx = 0;
    }

    pub fn clear_channel_pool(&mut self) {
        self.pool = None;
        self.pool_idx = 0;
    }

    /// N_t * N_RF analog phases plus M RIS phases.
    pub fn action_dim(&self) -> usize {
        let s = &self.cfg.system;
        s.n_t * s.n_rf + s.m_ris
    }

    pub fn state_dim(&self) -> usize {
        let s = &self.cfg.system;
        self.action_dim() + 2 * s.m_ris * s.n_t + 2 * s.m_ris * s.k_users
    }

    pub fn channel(&self) -> Option<&ChannelRealization> {
        self.chan.as_ref()
    }

    /// Start a new episode: next pool channel if a pool is pinned, fresh
    /// fading otherwise. Zeroes the action memory and returns the state.
    pub fn reset(&mut self, rng: &mut RngStream) -> EnvState {
        self.chan = Some(match &self.pool {
            Some(pool) => {
                let chan = pool[self.pool_idx % pool.len()].clone();
                self.pool_idx += 1;
                chan
            }
            None => sample_channel(&self.cfg.system, rng),
        });
        self.prev_action = vec![0.0; self.action_dim()];
        self.step_count = 0;
        self.encode_state()
    }

    /// Reset onto a fixed, externally supplied channel realization.
    pub fn reset_with_channel(&mut self, chan: ChannelRealization) -> EnvState {
        self.chan = Some(chan);
        self.prev_action = vec![0.0; self.action_dim()];
        self.step_count = 0;
        self.encode_state()
    }

    /// Map raw in [-1,1] to phases in [0, 2pi): phase = pi * (raw + 1).
    pub fn decode_action(&self, raw: &[f64]) -> Result<PhaseAction, EnvError> {
        let expected = self.action_dim();
        if raw.len() != expected {
            return Err(EnvError::ActionLength {
                expected,
                got: raw.len(),
            });
        }
        let s = &self.cfg.system;
        let n_analog = s.n_t * s.n_rf;
        let phases: Vec<f64> = raw.iter().map(|&r| PI * (r + 1.0)).collect();
        Ok(PhaseAction::new(
            s.n_t,
            s.n_rf,
            phases[..n_analog].to_vec(),
            phases[n_analog..].to_vec(),
        ))
    }

    /// Apply one action: close the digital precoder via MMSE, reward with the
    /// sum-rate, then advance the fading per the refresh policy. The state
    /// returned carries the channel that produced this reward.
    pub fn step(&mut self, raw_action: &[f64], rng: &mut RngStream) -> Result<(EnvState, f64), EnvError> {
        let action = self.decode_action(raw_action)?;
        let chan = self.chan.as_ref().ok_or(EnvError::NotReset)?;
        let s = &self.cfg.system;
        let set = build_beamformers(chan, &action, s.power, s.noise_var)?;
        let reward = sum_rate(chan, &set, s.power, s.noise_var);
        self.prev_action = raw_action.to_vec();
        self.step_count += 1;
        let state = self.encode_state();
        if self.cfg.channel_refresh == ChannelRefresh::PerStep {
            self.chan = Some(sample_channel(&self.cfg.system, rng));
        }
        Ok((state, reward))
    }

    fn encode_state(&self) -> EnvState {
        let chan = self.chan.as_ref().expect("encode_state before reset");
        let s = &self.cfg.system;
        let scale = if self.cfg.standardize_state {
            1.0 / (s.m_ris as f64).sqrt()
        } else {
            1.0
        };
        let mut feats = Vec::with_capacity(2 * s.m_ris * (s.n_t + s.k_users));
        for z in chan.h_bs_ris.data() {
            feats.push(z.re * scale);
            feats.push(z.im * scale);
        }
        for hk in &chan.h_ris_user {
            for z in hk {
                feats.push(z.re * scale);
                feats.push(z.im * scale);
            }
        }
        EnvState {
            prev_action: self.prev_action.clone(),
            chan_features: feats,
        }
    }
}
