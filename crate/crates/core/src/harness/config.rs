use crate::agents::{DdpgConfig, SacConfig};
use crate::channel::SystemConfig;
use crate::env::{ChannelRefresh, EnvConfig};

/// Schemes the runner knows how to execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Sac,
    DpSac,
    Ddpg,
    RandomRis,
    NoRis,
    Oracle,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Sac => "sac",
            Scheme::DpSac => "dp-sac",
            Scheme::Ddpg => "ddpg",
            Scheme::RandomRis => "random-ris",
            Scheme::NoRis => "no-ris",
            Scheme::Oracle => "oracle",
        }
    }

    pub fn is_learning(&self) -> bool {
        matches!(self, Scheme::Sac | Scheme::DpSac | Scheme::Ddpg)
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sac" => Ok(Scheme::Sac),
            "dp-sac" => Ok(Scheme::DpSac),
            "ddpg" => Ok(Scheme::Ddpg),
            "random-ris" => Ok(Scheme::RandomRis),
            "no-ris" => Ok(Scheme::NoRis),
            "oracle" => Ok(Scheme::Oracle),
            other => Err(format!(
                "unknown scheme '{other}' (expected sac, dp-sac, ddpg, random-ris, no-ris, oracle)"
            )),
        }
    }
}

/// Parameter sweep over experiment points.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sweep {
    None,
    /// SNR points in dB; P = noise_var * 10^(dB/10).
    Snr { values_db: Vec<f64> },
    /// RIS element counts (perfect squares).
    RisElements { values: Vec<usize> },
}

impl Default for Sweep {
    fn default() -> Self {
        Sweep::None
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub env: EnvSection,
    pub agent: SacConfig,
    pub experiment: ExperimentSection,
}

/// Env settings minus the system block (which lives in its own section).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct EnvSection {
    pub steps_per_episode: usize,
    pub channel_refresh: ChannelRefresh,
    pub standardize_state: bool,
}

impl Default for EnvSection {
    fn default() -> Self {
        Self {
            steps_per_episode: 50,
            channel_refresh: ChannelRefresh::PerEpisode,
            standardize_state: false,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ExperimentSection {
    pub schemes: Vec<Scheme>,
    pub seeds: Vec<u64>,
    pub episodes: usize,
    pub sweep: Sweep,
    /// Held-out channels for deterministic evaluation; paired across schemes.
    pub eval_channels: usize,
    /// Deterministic rollout length per evaluation channel; the last reward
    /// is the channel's rate.
    pub eval_steps: usize,
    /// Draws for the random-search reference scheme.
    pub oracle_samples: usize,
    /// When true, learning schemes train on the evaluation pool itself
    /// (cycled per episode) rather than fresh fading; all schemes are then
    /// compared on exactly the channels the agent optimized.
    pub train_on_eval_channels: bool,
    pub output: String,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            schemes: vec![Scheme::Sac, Scheme::RandomRis, Scheme::NoRis],
            seeds: vec![1, 2, 3],
            episodes: 300,
            sweep: Sweep::None,
            eval_channels: 10,
            eval_steps: 3,
            oracle_samples: 2000,
            train_on_eval_channels: true,
            output: "results.csv".into(),
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::desk_scale(),
            env: EnvSection::default(),
            agent: SacConfig::desk_scale(),
            experiment: ExperimentSection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| format!("config parse error: {e}"))
    }

    /// Collects every invalid field into one report.
    pub fn validate(&self) -> Result<(), String> {
        let mut problems = Vec::new();
        if let Err(e) = self.system.validate() {
            problems.push(format!("system: {e}"));
        }
        if let Err(e) = self.agent.validate() {
            problems.push(format!("agent: {e}"));
        }
        if self.env.steps_per_episode == 0 {
            problems.push("env: steps_per_episode must be >= 1".into());
        }
        let ex = &self.experiment;
        if ex.schemes.is_empty() {
            problems.push("experiment: at least one scheme required".into());
        }
        if ex.seeds.is_empty() {
            problems.push("experiment: at least one seed required".into());
        }
        if ex.eval_channels == 0 || ex.eval_steps == 0 {
            problems.push("experiment: eval_channels and eval_steps must be >= 1".into());
        }
        if ex.oracle_samples == 0 {
            problems.push("experiment: oracle_samples must be >= 1".into());
        }
        match &ex.sweep {
            Sweep::None => {}
            Sweep::Snr { values_db } => {
                if values_db.is_empty() {
                    problems.push("experiment: snr sweep needs at least one value".into());
                }
                if values_db.iter().any(|v| !v.is_finite()) {
                    problems.push("experiment: snr sweep values must be finite".into());
                }
            }
            Sweep::RisElements { values } => {
                if values.is_empty() {
                    problems.push("experiment: ris-elements sweep needs at least one value".into());
                }
                for &m in values {
                    let side = (m as f64).sqrt().round() as usize;
                    if m == 0 || side * side != m {
                        problems.push(format!(
                            "experiment: ris-elements value {m} must be a positive perfect square"
                        ));
                    }
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems.join("\n"))
        }
    }

    /// System config at a given sweep point.
    pub fn system_at(&self, point: SweepPoint) -> SystemConfig {
        match point {
            SweepPoint::None => self.system.clone(),
            SweepPoint::SnrDb(db) => self.system.clone().with_snr_db(db),
            SweepPoint::RisElements(m) => {
                let side = (m as f64).sqrt().round() as usize;
                let mut s = self.system.clone();
                s.m_ris = m;
                s.m_az = side;
                s.m_el = side;
                s
            }
        }
    }

    pub fn sweep_points(&self) -> Vec<SweepPoint> {
        match &self.experiment.sweep {
            Sweep::None => vec![SweepPoint::None],
            Sweep::Snr { values_db } => values_db.iter().map(|&v| SweepPoint::SnrDb(v)).collect(),
            Sweep::RisElements { values } => {
                values.iter().map(|&m| SweepPoint::RisElements(m)).collect()
            }
        }
    }

    pub fn env_config(&self, system: SystemConfig) -> EnvConfig {
        EnvConfig {
            system,
            steps_per_episode: self.env.steps_per_episode,
            channel_refresh: self.env.channel_refresh,
            standardize_state: self.env.standardize_state,
        }
    }

    /// DDPG settings mirrored from the SAC section.
    pub fn ddpg_config(&self) -> DdpgConfig {
        DdpgConfig {
            gamma: self.agent.gamma,
            tau: self.agent.tau,
            batch_size: self.agent.batch_size,
            lr_actor: self.agent.lr_pi,
            lr_critic: self.agent.lr_q,
            noise_std: 0.1,
            warmup_steps: self.agent.warmup_steps,
            buffer_capacity: self.agent.buffer_capacity,
            hidden: self.agent.hidden.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepPoint {
    None,
    SnrDb(f64),
    RisElements(usize),
}

impl SweepPoint {
    /// Numeric value recorded in the `sweep_value` CSV column.
    pub fn value(&self) -> f64 {
        match self {
            SweepPoint::None => 0.0,
            SweepPoint::SnrDb(db) => *db,
            SweepPoint::RisElements(m) => *m as f64,
        }
    }

    /// Stable label mixed into derived seeds.
    pub fn label(&self) -> String {
        match self {
            SweepPoint::None => "point-none".into(),
            SweepPoint::SnrDb(db) => format!("point-snr-{db}"),
            SweepPoint::RisElements(m) => format!("point-m-{m}"),
        }
    }

    /// Label for channel and phase-draw streams. SNR only rescales transmit
    /// power, so SNR points share one label and their fading is paired;
    /// resizing the RIS changes the geometry and gets its own draws.
    pub fn channel_label(&self) -> String {
        match self {
            SweepPoint::None | SweepPoint::SnrDb(_) => "chan-default".into(),
            SweepPoint::RisElements(m) => format!("chan-m-{m}"),
        }
    }
}
