//! Soft actor-critic with twin Q critics and a soft-updated target value
//! network. Setting `alpha = 0` recovers the deterministic-objective variant
//! used as the DP baseline; the code path is identical.

use super::replay::{ReplayBuffer, Transition};
use super::{Actor, TrainTrace};
use crate::env::RisEnv;
use crate::nn::{
    soft_update, AdamState, GaussianHead, MlpGrad, MlpNetwork, SquashedSample, LOG_STD_MAX,
    LOG_STD_MIN,
};
use crate::numerics::RngStream;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SacConfig {
    /// Entropy weight; 0 gives the DP variant.
    pub alpha: f64,
    pub gamma: f64,
    pub tau: f64,
    pub batch_size: usize,
    pub target_update_interval: usize,
    pub lr_q: f64,
    pub lr_pi: f64,
    pub lr_v: f64,
    pub updates_per_step: usize,
    pub buffer_capacity: usize,
    /// Env steps acted uniformly at random before the policy takes over.
    /// Covers the action box so the critics see off-policy data early.
    pub warmup_steps: usize,
    /// Hidden layer widths shared by every network.
    pub hidden: Vec<usize>,
}

impl Default for SacConfig {
    /// Full-size hyperparameters (Adam 1e-4, two 256-unit layers, batch 64).
    fn default() -> Self {
        Self {
            alpha: 0.2,
            gamma: 0.95,
            tau: 0.005,
            batch_size: 64,
            target_update_interval: 1,
            lr_q: 1e-4,
            lr_pi: 1e-4,
            lr_v: 1e-4,
            updates_per_step: 1,
            buffer_capacity: 1_000_000,
            warmup_steps: 1000,
            hidden: vec![256, 256],
        }
    }
}

impl SacConfig {
    /// Smaller networks and faster critics, sized so that a few hundred
    /// desk-scale episodes train in minutes on one core. The low discount
    /// suits the pool protocol, where the channel is fixed within an episode
    /// and the reward depends almost only on the current action.
    pub fn desk_scale() -> Self {
        Self {
            alpha: 0.02,
            gamma: 0.1,
            lr_q: 1e-3,
            lr_v: 1e-3,
            lr_pi: 3e-4,
            hidden: vec![48, 48],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let mut problems = Vec::new();
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            problems.push(format!("gamma must be in (0,1), got {}", self.gamma));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            problems.push(format!("tau must be in (0,1], got {}", self.tau));
        }
        if self.alpha < 0.0 {
            problems.push(format!("alpha must be >= 0, got {}", self.alpha));
        }
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            problems.push("batch_size must be >= 1 and <= buffer_capacity".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems.join("; "))
        }
    }
}

pub struct SacAgent {
    pub cfg: SacConfig,
    pub state_dim: usize,
    pub action_dim: usize,
    pub policy: MlpNetwork,
    pub v: MlpNetwork,
    pub v_target: MlpNetwork,
    pub q1: MlpNetwork,
    pub q2: MlpNetwork,
    opt_policy: AdamState,
    opt_v: AdamState,
    opt_q1: AdamState,
    opt_q2: AdamState,
    pub buffer: ReplayBuffer,
    update_count: usize,
    env_steps: usize,
}

fn dims(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut d = Vec::with_capacity(hidden.len() + 2);
    d.push(input);
    d.extend_from_slice(hidden);
    d.push(output);
    d
}

impl SacAgent {
    pub fn new(state_dim: usize, action_dim: usize, cfg: SacConfig, rng: &mut RngStream) -> Self {
        let policy = MlpNetwork::new(&dims(state_dim, &cfg.hidden, 2 * action_dim), rng);
        let v = MlpNetwork::new(&dims(state_dim, &cfg.hidden, 1), rng);
        let v_target = v.clone();
        let q1 = MlpNetwork::new(&dims(state_dim + action_dim, &cfg.hidden, 1), rng);
        let q2 = MlpNetwork::new(&dims(state_dim + action_dim, &cfg.hidden, 1), rng);
        let opt_policy = AdamState::new(&policy, cfg.lr_pi);
        let opt_v = AdamState::new(&v, cfg.lr_v);
        let opt_q1 = AdamState::new(&q1, cfg.lr_q);
        let opt_q2 = AdamState::new(&q2, cfg.lr_q);
        let buffer = ReplayBuffer::new(cfg.buffer_capacity);
        Self {
            cfg,
            state_dim,
            action_dim,
            policy,
            v,
            v_target,
            q1,
            q2,
            opt_policy,
            opt_v,
            opt_q1,
            opt_q2,
            buffer,
            update_count: 0,
            env_steps: 0,
        }
    }

    pub fn head(&self, state: &[f64]) -> GaussianHead {
        let out = self.policy.forward(state).expect("state length mismatch");
        GaussianHead::from_net_output(&out)
    }

    pub fn sample_action(&self, state: &[f64], rng: &mut RngStream) -> SquashedSample {
        self.head(state).sample_squashed(rng)
    }

    fn q_input(&self, state: &[f64], action: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(state.len() + action.len());
        x.extend_from_slice(state);
        x.extend_from_slice(action);
        x
    }

    pub fn min_q(&self, state: &[f64], action: &[f64]) -> f64 {
        let x = self.q_input(state, action);
        let q1 = self.q1.forward(&x).expect("q1 input mismatch")[0];
        let q2 = self.q2.forward(&x).expect("q2 input mismatch")[0];
        q1.min(q2)
    }

    /// One MSE regression step of each critic toward r + gamma * V_target(s').
    /// Both critics see identical targets.
    pub fn update_q(&mut self, batch: &[&Transition]) -> (f64, f64) {
        assert!(!batch.is_empty());
        let n = batch.len() as f64;
        let targets: Vec<f64> = batch
            .iter()
            .map(|t| {
                t.reward + self.cfg.gamma * self.v_target.forward(&t.next_state).unwrap()[0]
            })
            .collect();
        let mut losses = [0.0f64; 2];
        for (qi, (net, opt)) in [(&mut self.q1, &mut self.opt_q1), (&mut self.q2, &mut self.opt_q2)]
            .into_iter()
            .enumerate()
        {
            let mut grad = MlpGrad::zeros_like(net);
            let mut loss = 0.0;
            for (t, &target) in batch.iter().zip(&targets) {
                let mut x = Vec::with_capacity(t.state.len() + t.action.len());
                x.extend_from_slice(&t.state);
                x.extend_from_slice(&t.action);
                let cache = net.forward_cached(&x).unwrap();
                let diff = cache.output()[0] - target;
                loss += 0.5 * diff * diff / n;
                let (g, _) = net.backward(&cache, &[diff / n]);
                grad.add(&g);
            }
            opt.step(net, &grad).expect("q shapes");
            losses[qi] = loss;
        }
        (losses[0], losses[1])
    }

    /// Reparameterized policy step on alpha*log pi - min(Q1,Q2).
    pub fn update_policy(&mut self, batch: &[&Transition], rng: &mut RngStream) -> f64 {
        assert!(!batch.is_empty());
        let states: Vec<&[f64]> = batch.iter().map(|t| t.state.as_slice()).collect();
        let noises: Vec<Vec<f64>> = (0..states.len())
            .map(|_| (0..self.action_dim).map(|_| rng.standard_normal()).collect())
            .collect();
        let (loss, grad) = policy_loss_and_grad(
            &self.policy,
            &self.q1,
            &self.q2,
            self.state_dim,
            &states,
            &noises,
            self.cfg.alpha,
        );
        self.opt_policy.step(&mut self.policy, &grad).expect("policy shapes");
        loss
    }

    /// Regress V toward E_{a~pi}[min Q - alpha log pi] with a fresh action per
    /// state (never the buffered one).
    pub fn update_value(&mut self, batch: &[&Transition], rng: &mut RngStream) -> f64 {
        assert!(!batch.is_empty());
        let n = batch.len() as f64;
        let mut grad = MlpGrad::zeros_like(&self.v);
        let mut loss = 0.0;
        for t in batch {
            let sample = self.sample_action(&t.state, rng);
            let target = self.min_q(&t.state, &sample.action) - self.cfg.alpha * sample.log_prob;
            let cache = self.v.forward_cached(&t.state).unwrap();
            let diff = cache.output()[0] - target;
            loss += 0.5 * diff * diff / n;
            let (g, _) = self.v.backward(&cache, &[diff / n]);
            grad.add(&g);
        }
        self.opt_v.step(&mut self.v, &grad).expect("v shapes");
        loss
    }

    pub fn soft_update_target(&mut self) {
        soft_update(&mut self.v_target, &self.v, self.cfg.tau);
    }

    /// One full learning update in the fixed order Q, policy, V, target.
    /// Returns (q1, q2, pi, v) losses, or None while the buffer is underfilled.
    pub fn update(&mut self, rng: &mut RngStream) -> Option<(f64, f64, f64, f64)> {
        let batch: Vec<Transition> = {
            let refs = self.buffer.sample(self.cfg.batch_size, rng)?;
            refs.into_iter().cloned().collect()
        };
        let refs: Vec<&Transition> = batch.iter().collect();
        let (q1_loss, q2_loss) = self.update_q(&refs);
        let pi_loss = self.update_policy(&refs, rng);
        let v_loss = self.update_value(&refs, rng);
        self.update_count += 1;
        if self.update_count % self.cfg.target_update_interval == 0 {
            self.soft_update_target();
        }
        Some((q1_loss, q2_loss, pi_loss, v_loss))
    }

    /// Full training loop over the environment; returns one trace row per
    /// episode with the mean stochastic reward and mean losses.
    ///
    /// The channel stream is separate from the agent stream so that two
    /// schemes trained with the same `env_rng` see identical fading.
    pub fn train(
        &mut self,
        env: &mut RisEnv,
        episodes: usize,
        rng: &mut RngStream,
        env_rng: &mut RngStream,
    ) -> Vec<TrainTrace> {
        let mut trace = Vec::with_capacity(episodes);
        for episode in 0..episodes {
            let mut state = env.reset(env_rng).to_vec();
            let mut reward_sum = 0.0;
            let mut losses = [0.0f64; 4];
            let mut n_updates = 0usize;
            for _ in 0..env.cfg.steps_per_episode {
                let action = if self.env_steps < self.cfg.warmup_steps {
                    (0..self.action_dim)
                        .map(|_| rng.uniform_range(-1.0, 1.0))
                        .collect()
                } else {
                    self.sample_action(&state, rng).action
                };
                self.env_steps += 1;
                let (next, reward) = env.step(&action, env_rng).expect("env step failed");
                let next_vec = next.to_vec();
                reward_sum += reward;
                self.buffer.push(Transition {
                    state: state.clone(),
                    action,
                    reward,
                    next_state: next_vec.clone(),
                });
                for _ in 0..self.cfg.updates_per_step {
                    if let Some((q1, q2, pi, v)) = self.update(rng) {
                        losses[0] += q1;
                        losses[1] += q2;
                        losses[2] += pi;
                        losses[3] += v;
                        n_updates += 1;
                    }
                }
                state = next_vec;
            }
            let steps = env.cfg.steps_per_episode as f64;
            let denom = n_updates.max(1) as f64;
            trace.push(TrainTrace {
                episode,
                mean_reward: reward_sum / steps,
                v_loss: losses[3] / denom,
                q1_loss: losses[0] / denom,
                q2_loss: losses[1] / denom,
                pi_loss: losses[2] / denom,
                alpha: self.cfg.alpha,
            });
        }
        trace
    }

    const NET_NAMES: [&'static str; 5] = ["policy", "v", "v_target", "q1", "q2"];

    fn nets_mut(&mut self) -> [&mut MlpNetwork; 5] {
        [
            &mut self.policy,
            &mut self.v,
            &mut self.v_target,
            &mut self.q1,
            &mut self.q2,
        ]
    }

    /// Writes one text checkpoint per network into `dir`.
    pub fn save_checkpoint(&self, dir: &std::path::Path) -> Result<(), crate::nn::NnError> {
        std::fs::create_dir_all(dir)?;
        let nets = [&self.policy, &self.v, &self.v_target, &self.q1, &self.q2];
        for (name, net) in Self::NET_NAMES.iter().zip(nets) {
            net.save(std::fs::File::create(dir.join(format!("{name}.mlp")))?)?;
        }
        Ok(())
    }

    /// Replaces the network weights with a saved checkpoint. Optimizer and
    /// replay state are not persisted; a loaded agent is for evaluation or
    /// fresh continued training.
    pub fn load_checkpoint(&mut self, dir: &std::path::Path) -> Result<(), crate::nn::NnError> {
        for (name, net) in Self::NET_NAMES.iter().zip(self.nets_mut()) {
            let file = std::fs::File::open(dir.join(format!("{name}.mlp")))?;
            let loaded = MlpNetwork::load(std::io::BufReader::new(file))?;
            if loaded.dims() != net.dims() {
                return Err(crate::nn::NnError::Checkpoint(format!(
                    "{name}: dims {:?} do not match configured {:?}",
                    loaded.dims(),
                    net.dims()
                )));
            }
            *net = loaded;
        }
        Ok(())
    }
}

impl Actor for SacAgent {
    fn act(&self, state: &[f64], deterministic: bool, rng: &mut RngStream) -> Vec<f64> {
        let head = self.head(state);
        if deterministic {
            head.deterministic()
        } else {
            head.sample_squashed(rng).action
        }
    }
}

/// Loss and policy-parameter gradient of
/// mean_s [alpha * log pi(a|s) - min(Q1, Q2)(s, a)], a = tanh(mean + std*eps),
/// with the noise fixed so the computation is a deterministic function of the
/// policy parameters (which is what the finite-difference check needs).
pub fn policy_loss_and_grad(
    policy: &MlpNetwork,
    q1: &MlpNetwork,
    q2: &MlpNetwork,
    state_dim: usize,
    states: &[&[f64]],
    noises: &[Vec<f64>],
    alpha: f64,
) -> (f64, MlpGrad) {
    let n = states.len() as f64;
    let d = policy.output_dim() / 2;
    let mut grad = MlpGrad::zeros_like(policy);
    let mut loss = 0.0;
    for (s, eps) in states.iter().zip(noises) {
        let cache = policy.forward_cached(s).expect("state length");
        let raw_out = cache.output().to_vec();
        let head = GaussianHead::from_net_output(&raw_out);
        let std: Vec<f64> = head.log_std.iter().map(|l| l.exp()).collect();
        let pre_tanh: Vec<f64> = (0..d).map(|i| head.mean[i] + std[i] * eps[i]).collect();
        let action: Vec<f64> = pre_tanh.iter().map(|u| u.tanh()).collect();
        let log_prob = crate::nn::squashed_log_prob(&head.mean, &head.log_std, &pre_tanh);

        let mut x = Vec::with_capacity(state_dim + d);
        x.extend_from_slice(s);
        x.extend_from_slice(&action);
        let c1 = q1.forward_cached(&x).expect("q input");
        let c2 = q2.forward_cached(&x).expect("q input");
        let (q1_val, q2_val) = (c1.output()[0], c2.output()[0]);
        let (q_min, min_net, min_cache) = if q1_val <= q2_val {
            (q1_val, q1, &c1)
        } else {
            (q2_val, q2, &c2)
        };
        loss += (alpha * log_prob - q_min) / n;

        // gradient of q_min w.r.t. the action slice of its input
        let (_, dq_input) = min_net.backward(min_cache, &[1.0]);
        let dq_da = &dq_input[state_dim..];

        let mut d_out = vec![0.0; 2 * d];
        for i in 0..d {
            let t = action[i];
            let sech2 = 1.0 - t * t;
            // d/du of the squashing correction -ln(1 - tanh^2 + eps)
            let corr = 2.0 * t * sech2 / (sech2 + crate::nn::SQUASH_EPS);
            let du_dmean = 1.0;
            let du_dlogstd = std[i] * eps[i];
            let dlp_dmean = corr * du_dmean;
            let dlp_dlogstd = -1.0 + corr * du_dlogstd;
            let dq_dmean = dq_da[i] * sech2 * du_dmean;
            let dq_dlogstd = dq_da[i] * sech2 * du_dlogstd;
            d_out[i] = (alpha * dlp_dmean - dq_dmean) / n;
            // clamped log_std has zero derivative
            let raw = raw_out[d + i];
            d_out[d + i] = if raw > LOG_STD_MIN && raw < LOG_STD_MAX {
                (alpha * dlp_dlogstd - dq_dlogstd) / n
            } else {
                0.0
            };
        }
        let (g, _) = policy.backward(&cache, &d_out);
        grad.add(&g);
    }
    (loss, grad)
}
