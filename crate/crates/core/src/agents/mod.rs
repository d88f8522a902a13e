//! Learning agents (SAC and the DDPG baseline) plus the replay buffer they
//! share.

mod ddpg;
mod replay;
mod sac;

pub use ddpg::{DdpgAgent, DdpgConfig};
pub use replay::{ReplayBuffer, Transition};
pub use sac::{policy_loss_and_grad, SacAgent, SacConfig};

use crate::numerics::RngStream;

/// Anything that can map a state to a raw action in [-1,1]^d.
pub trait Actor {
    fn act(&self, state: &[f64], deterministic: bool, rng: &mut RngStream) -> Vec<f64>;
}

/// One per-episode row of the training trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    pub episode: usize,
    pub mean_reward: f64,
    pub v_loss: f64,
    pub q1_loss: f64,
    pub q2_loss: f64,
    pub pi_loss: f64,
    pub alpha: f64,
}
