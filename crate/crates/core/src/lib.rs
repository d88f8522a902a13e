//! Simulator and learning stack for joint analog/RIS phase optimization in a
//! multi-user MISO mmWave downlink. A soft actor-critic agent picks all
//! phase-shifts, the digital precoder is closed in analytically via MMSE, and
//! the sum-rate is both the training reward and the reported metric.

pub mod agents;
pub mod baselines;
pub mod beamforming;
pub mod channel;
pub mod env;
pub mod harness;
pub mod nn;
pub mod numerics;

pub use channel::SystemConfig;
pub use env::{EnvConfig, RisEnv};
pub use numerics::{Complex, ComplexMatrix, RngStream};
