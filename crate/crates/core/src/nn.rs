//! Minimal fully connected networks with hand-derived backpropagation, the
//! Adam optimizer, and the tanh-squashed Gaussian policy head. ReLU hidden
//! layers, linear output. All math in f64; gradients are verified against
//! central finite differences in the test suite.

use crate::numerics::RngStream;
use std::io::{BufRead, Write};

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;
/// Guard inside log(1 - tanh^2 + eps) of the squashing correction.
pub const SQUASH_EPS: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum NnError {
    #[error("input length mismatch: expected {expected}, got {got}")]
    InputLength { expected: usize, got: usize },
    #[error("shape mismatch between parameters and gradients/optimizer state")]
    ShapeMismatch,
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One affine layer, weights stored row-major as out x in.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub out_dim: usize,
    pub in_dim: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Layer {
    fn zeros(out_dim: usize, in_dim: usize) -> Self {
        Self {
            out_dim,
            in_dim,
            w: vec![0.0; out_dim * in_dim],
            b: vec![0.0; out_dim],
        }
    }
}

/// Fully connected network: affine -> ReLU chain with a linear output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpNetwork {
    dims: Vec<usize>,
    pub layers: Vec<Layer>,
}

/// Cached activations of one forward pass; activations[0] is the input and
/// the last entry is the linear output.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("empty cache")
    }
}

/// Per-parameter gradients, shaped like the network.
#[derive(Debug, Clone)]
pub struct MlpGrad {
    pub layers: Vec<Layer>,
}

impl MlpGrad {
    pub fn zeros_like(net: &MlpNetwork) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| Layer::zeros(l.out_dim, l.in_dim))
                .collect(),
        }
    }

    pub fn add(&mut self, other: &MlpGrad) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.w.iter_mut().zip(&b.w) {
                *x += y;
            }
            for (x, y) in a.b.iter_mut().zip(&b.b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for l in &mut self.layers {
            for x in &mut l.w {
                *x *= s;
            }
            for x in &mut l.b {
                *x *= s;
            }
        }
    }
}

impl MlpNetwork {
    /// Random init: weights uniform in +-1/sqrt(fan_in), biases zero.
    pub fn new(dims: &[usize], rng: &mut RngStream) -> Self {
        assert!(dims.len() >= 2, "need at least input and output dims");
        let layers = dims
            .windows(2)
            .map(|w| {
                let (n_in, n_out) = (w[0], w[1]);
                let bound = 1.0 / (n_in as f64).sqrt();
                Layer {
                    out_dim: n_out,
                    in_dim: n_in,
                    w: (0..n_out * n_in)
                        .map(|_| rng.uniform_range(-bound, bound))
                        .collect(),
                    b: vec![0.0; n_out],
                }
            })
            .collect();
        Self {
            dims: dims.to_vec(),
            layers,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NnError> {
        let cache = self.forward_cached(x)?;
        Ok(cache.activations.into_iter().last().unwrap())
    }

    pub fn forward_cached(&self, x: &[f64]) -> Result<ForwardCache, NnError> {
        if x.len() != self.input_dim() {
            return Err(NnError::InputLength {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.to_vec());
        for (li, layer) in self.layers.iter().enumerate() {
            let input = activations.last().unwrap();
            let mut out = layer.b.clone();
            for (j, o) in out.iter_mut().enumerate() {
                let row = &layer.w[j * layer.in_dim..(j + 1) * layer.in_dim];
                let mut acc = 0.0;
                for (wi, xi) in row.iter().zip(input.iter()) {
                    acc += wi * xi;
                }
                *o += acc;
            }
            if li + 1 < self.layers.len() {
                for o in &mut out {
                    if *o < 0.0 {
                        *o = 0.0;
                    }
                }
            }
            activations.push(out);
        }
        Ok(ForwardCache { activations })
    }

    /// Backpropagate `upstream` (gradient of a scalar loss w.r.t. the output)
    /// through the cached pass. Returns parameter gradients and the gradient
    /// w.r.t. the input.
    pub fn backward(&self, cache: &ForwardCache, upstream: &[f64]) -> (MlpGrad, Vec<f64>) {
        assert_eq!(
            cache.activations.len(),
            self.layers.len() + 1,
            "cache does not match network depth"
        );
        assert_eq!(upstream.len(), self.output_dim());
        let mut grad = MlpGrad::zeros_like(self);
        let mut delta = upstream.to_vec();
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let input = &cache.activations[li];
            let output = &cache.activations[li + 1];
            // hidden layers carry a ReLU: zero the gradient where the unit was off
            if li != self.layers.len() - 1 {
                for (d, &o) in delta.iter_mut().zip(output.iter()) {
                    if o <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            let g = &mut grad.layers[li];
            let mut dx = vec![0.0; layer.in_dim];
            for (j, &dj) in delta.iter().enumerate() {
                g.b[j] += dj;
                let wrow = &layer.w[j * layer.in_dim..(j + 1) * layer.in_dim];
                let grow = &mut g.w[j * layer.in_dim..(j + 1) * layer.in_dim];
                for i in 0..layer.in_dim {
                    grow[i] += dj * input[i];
                    dx[i] += dj * wrow[i];
                }
            }
            delta = dx;
        }
        (grad, delta)
    }

    /// Text checkpoint: versioned header, dims, then parameters in
    /// declaration order (per layer: weights row-major, then biases).
    pub fn save<W: Write>(&self, mut w: W) -> Result<(), NnError> {
        writeln!(w, "mlp-checkpoint-v1")?;
        let dims: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        writeln!(w, "{}", dims.join(" "))?;
        for layer in &self.layers {
            for v in layer.w.iter().chain(layer.b.iter()) {
                writeln!(w, "{v:.17e}")?;
            }
        }
        Ok(())
    }

    pub fn load<R: BufRead>(r: R) -> Result<Self, NnError> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| NnError::Checkpoint("empty file".into()))??;
        if header.trim() != "mlp-checkpoint-v1" {
            return Err(NnError::Checkpoint(format!("bad header: {header}")));
        }
        let dim_line = lines
            .next()
            .ok_or_else(|| NnError::Checkpoint("missing dims".into()))??;
        let dims: Vec<usize> = dim_line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| NnError::Checkpoint(format!("bad dim: {t}"))))
            .collect::<Result<_, _>>()?;
        if dims.len() < 2 {
            return Err(NnError::Checkpoint("need at least two dims".into()));
        }
        let mut net = MlpNetwork {
            dims: dims.clone(),
            layers: dims
                .windows(2)
                .map(|w| Layer::zeros(w[1], w[0]))
                .collect(),
        };
        for layer in &mut net.layers {
            for slot in layer.w.iter_mut().chain(layer.b.iter_mut()) {
                let line = lines
                    .next()
                    .ok_or_else(|| NnError::Checkpoint("truncated parameters".into()))??;
                *slot = line
                    .trim()
                    .parse()
                    .map_err(|_| NnError::Checkpoint(format!("bad value: {line}")))?;
            }
        }
        Ok(net)
    }
}

/// Bias-corrected Adam over one network's parameters.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Vec<Layer>,
    v: Vec<Layer>,
}

impl AdamState {
    pub fn new(net: &MlpNetwork, lr: f64) -> Self {
        let zeros = || {
            net.layers
                .iter()
                .map(|l| Layer::zeros(l.out_dim, l.in_dim))
                .collect::<Vec<_>>()
        };
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: zeros(),
            v: zeros(),
        }
    }

    pub fn step(&mut self, net: &mut MlpNetwork, grad: &MlpGrad) -> Result<(), NnError> {
        if net.layers.len() != grad.layers.len() || net.layers.len() != self.m.len() {
            return Err(NnError::ShapeMismatch);
        }
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for ((layer, g), (m, v)) in net
            .layers
            .iter_mut()
            .zip(&grad.layers)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            if layer.w.len() != g.w.len() || layer.b.len() != g.b.len() {
                return Err(NnError::ShapeMismatch);
            }
            let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
                for i in 0..p.len() {
                    m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                    v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                    let m_hat = m[i] / bc1;
                    let v_hat = v[i] / bc2;
                    p[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
                }
            };
            update(&mut layer.w, &g.w, &mut m.w, &mut v.w);
            update(&mut layer.b, &g.b, &mut m.b, &mut v.b);
        }
        Ok(())
    }
}

/// Soft update: target <- tau * source + (1 - tau) * target.
pub fn soft_update(target: &mut MlpNetwork, source: &MlpNetwork, tau: f64) {
    for (t, s) in target.layers.iter_mut().zip(&source.layers) {
        for (tp, sp) in t.w.iter_mut().zip(&s.w) {
            *tp = tau * sp + (1.0 - tau) * *tp;
        }
        for (tp, sp) in t.b.iter_mut().zip(&s.b) {
            *tp = tau * sp + (1.0 - tau) * *tp;
        }
    }
}

/// Diagonal Gaussian over pre-tanh space; log_std is clamped at construction.
#[derive(Debug, Clone)]
pub struct GaussianHead {
    pub mean: Vec<f64>,
    pub log_std: Vec<f64>,
}

/// One reparameterized draw through the tanh squashing.
#[derive(Debug, Clone)]
pub struct SquashedSample {
    /// tanh(u), componentwise in (-1, 1).
    pub action: Vec<f64>,
    /// Pre-tanh value u = mean + std * noise.
    pub pre_tanh: Vec<f64>,
    /// The standard normal draw.
    pub noise: Vec<f64>,
    pub log_prob: f64,
}

impl GaussianHead {
    /// Split a policy network output of length 2d into mean and clamped
    /// log_std halves.
    pub fn from_net_output(out: &[f64]) -> Self {
        assert!(out.len() % 2 == 0, "policy output must have even length");
        let d = out.len() / 2;
        Self {
            mean: out[..d].to_vec(),
            log_std: out[d..].iter().map(|&x| x.clamp(LOG_STD_MIN, LOG_STD_MAX)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn sample_squashed(&self, rng: &mut RngStream) -> SquashedSample {
        let d = self.dim();
        let noise: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
        let pre_tanh: Vec<f64> = (0..d)
            .map(|i| self.mean[i] + self.log_std[i].exp() * noise[i])
            .collect();
        let action: Vec<f64> = pre_tanh.iter().map(|u| u.tanh()).collect();
        let log_prob = squashed_log_prob(&self.mean, &self.log_std, &pre_tanh);
        SquashedSample {
            action,
            pre_tanh,
            noise,
            log_prob,
        }
    }

    /// Mode of the squashed distribution, used for evaluation rollouts.
    pub fn deterministic(&self) -> Vec<f64> {
        self.mean.iter().map(|m| m.tanh()).collect()
    }
}

/// Log density of a = tanh(u) under the squashed Gaussian, evaluated at the
/// pre-tanh point u: sum_d [log N(u_d) - log(1 - tanh(u_d)^2 + eps)].
pub fn squashed_log_prob(mean: &[f64], log_std: &[f64], pre_tanh: &[f64]) -> f64 {
    const HALF_LN_TAU: f64 = 0.918_938_533_204_672_74; // 0.5 * ln(2*pi)
    let mut lp = 0.0;
    for i in 0..mean.len() {
        let std = log_std[i].exp();
        let z = (pre_tanh[i] - mean[i]) / std;
        lp += -0.5 * z * z - log_std[i] - HALF_LN_TAU;
        let t = pre_tanh[i].tanh();
        lp -= (1.0 - t * t + SQUASH_EPS).ln();
    }
    lp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_zero_net_gives_zero() {
        let mut rng = RngStream::new(1);
        let mut net = MlpNetwork::new(&[3, 4, 2], &mut rng);
        for l in &mut net.layers {
            l.w.iter_mut().for_each(|w| *w = 0.0);
            l.b.iter_mut().for_each(|b| *b = 0.0);
        }
        assert_eq!(net.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn forward_single_linear_identity() {
        let mut rng = RngStream::new(2);
        let mut net = MlpNetwork::new(&[3, 3], &mut rng);
        let l = &mut net.layers[0];
        l.w.iter_mut().for_each(|w| *w = 0.0);
        for i in 0..3 {
            l.w[i * 3 + i] = 1.0;
        }
        let x = [0.5, -1.5, 2.0];
        let y = net.forward(&x).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn forward_matches_scalar_oracle() {
        let mut rng = RngStream::new(3);
        let net = MlpNetwork::new(&[4, 5, 3], &mut rng);
        let x: Vec<f64> = (0..4).map(|_| rng.uniform_range(-1.0, 1.0)).collect();

        // independent scalar-loop oracle
        let mut h = vec![0.0; 5];
        for j in 0..5 {
            let mut s = net.layers[0].b[j];
            for i in 0..4 {
                s += net.layers[0].w[j * 4 + i] * x[i];
            }
            h[j] = s.max(0.0);
        }
        let mut y = vec![0.0; 3];
        for j in 0..3 {
            let mut s = net.layers[1].b[j];
            for i in 0..5 {
                s += net.layers[1].w[j * 5 + i] * h[i];
            }
            y[j] = s;
        }

        let got = net.forward(&x).unwrap();
        for (a, b) in got.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_rejects_bad_length() {
        let mut rng = RngStream::new(4);
        let net = MlpNetwork::new(&[4, 2], &mut rng);
        assert!(matches!(
            net.forward(&[1.0]),
            Err(NnError::InputLength { expected: 4, got: 1 })
        ));
    }

    /// Central finite differences over every parameter and input entry.
    fn finite_difference_check(dims: &[usize], seed: u64) {
        let mut rng = RngStream::new(seed);
        let net = MlpNetwork::new(dims, &mut rng);
        let x: Vec<f64> = (0..dims[0]).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
        let upstream: Vec<f64> = (0..*dims.last().unwrap())
            .map(|_| rng.uniform_range(-1.0, 1.0))
            .collect();
        let cache = net.forward_cached(&x).unwrap();
        let (grad, dx) = net.backward(&cache, &upstream);

        let loss = |net: &MlpNetwork, x: &[f64]| -> f64 {
            net.forward(x)
                .unwrap()
                .iter()
                .zip(&upstream)
                .map(|(y, u)| y * u)
                .sum()
        };
        let h = 1e-5;
        let mut max_rel: f64 = 0.0;
        let mut check = |analytic: f64, mut perturb: Box<dyn FnMut(f64) -> f64>| {
            let fd = (perturb(h) - perturb(-h)) / (2.0 * h);
            let denom = analytic.abs().max(fd.abs()).max(1e-6);
            max_rel = max_rel.max((analytic - fd).abs() / denom);
        };
        for li in 0..net.layers.len() {
            for wi in 0..net.layers[li].w.len() {
                let base = net.clone();
                let xx = x.clone();
                check(
                    grad.layers[li].w[wi],
                    Box::new(move |d| {
                        let mut n = base.clone();
                        n.layers[li].w[wi] += d;
                        loss(&n, &xx)
                    }),
                );
            }
            for bi in 0..net.layers[li].b.len() {
                let base = net.clone();
                let xx = x.clone();
                check(
                    grad.layers[li].b[bi],
                    Box::new(move |d| {
                        let mut n = base.clone();
                        n.layers[li].b[bi] += d;
                        loss(&n, &xx)
                    }),
                );
            }
        }
        for xi in 0..x.len() {
            let base = net.clone();
            let xx = x.clone();
            check(
                dx[xi],
                Box::new(move |d| {
                    let mut x2 = xx.clone();
                    x2[xi] += d;
                    loss(&base, &x2)
                }),
            );
        }
        assert!(max_rel < 1e-4, "max relative error {max_rel}");
    }

    #[test]
    fn backward_matches_finite_differences() {
        finite_difference_check(&[5, 8, 8, 3], 10);
        finite_difference_check(&[3, 6, 2], 11);
        finite_difference_check(&[2, 4, 4, 1], 12);
    }

    #[test]
    fn backward_zero_upstream_gives_zero_grads() {
        let mut rng = RngStream::new(13);
        let net = MlpNetwork::new(&[3, 4, 2], &mut rng);
        let cache = net.forward_cached(&[0.1, 0.2, 0.3]).unwrap();
        let (grad, dx) = net.backward(&cache, &[0.0, 0.0]);
        assert!(grad.layers.iter().all(|l| l.w.iter().chain(l.b.iter()).all(|&g| g == 0.0)));
        assert!(dx.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn relu_blocks_gradient_when_off() {
        let mut rng = RngStream::new(14);
        let mut net = MlpNetwork::new(&[1, 1, 1], &mut rng);
        // force the hidden unit negative for positive input
        net.layers[0].w[0] = -1.0;
        net.layers[0].b[0] = 0.0;
        let cache = net.forward_cached(&[2.0]).unwrap();
        let (grad, dx) = net.backward(&cache, &[1.0]);
        assert_eq!(grad.layers[0].w[0], 0.0);
        assert_eq!(dx[0], 0.0);
    }

    #[test]
    fn adam_zero_grad_no_change() {
        let mut rng = RngStream::new(15);
        let mut net = MlpNetwork::new(&[3, 4, 2], &mut rng);
        let before = net.clone();
        let grad = MlpGrad::zeros_like(&net);
        let mut opt = AdamState::new(&net, 1e-3);
        opt.step(&mut net, &grad).unwrap();
        assert_eq!(net, before);
    }

    #[test]
    fn adam_first_step_magnitude() {
        // with bias correction, the first step is lr * g/|g| per coordinate
        let mut rng = RngStream::new(16);
        let mut net = MlpNetwork::new(&[2, 2], &mut rng);
        let before = net.clone();
        let mut grad = MlpGrad::zeros_like(&net);
        for (i, g) in grad.layers[0].w.iter_mut().enumerate() {
            *g = if i % 2 == 0 { 0.7 } else { -0.3 };
        }
        let lr = 1e-3;
        let mut opt = AdamState::new(&net, lr);
        opt.step(&mut net, &grad).unwrap();
        for i in 0..4 {
            let delta = net.layers[0].w[i] - before.layers[0].w[i];
            let expect = -lr * grad.layers[0].w[i].signum();
            assert!(
                (delta - expect).abs() < 1e-9 * lr.abs().max(1.0),
                "delta {delta} expect {expect}"
            );
        }
    }

    #[test]
    fn adam_constant_gradient_descends() {
        let mut rng = RngStream::new(17);
        let mut net = MlpNetwork::new(&[1, 1], &mut rng);
        let mut grad = MlpGrad::zeros_like(&net);
        grad.layers[0].w[0] = 1.0;
        let mut opt = AdamState::new(&net, 1e-2);
        let mut last = net.layers[0].w[0];
        for _ in 0..20 {
            opt.step(&mut net, &grad).unwrap();
            assert!(net.layers[0].w[0] < last);
            last = net.layers[0].w[0];
        }
    }

    #[test]
    fn adam_rejects_shape_mismatch() {
        let mut rng = RngStream::new(18);
        let mut net = MlpNetwork::new(&[2, 2], &mut rng);
        let other = MlpNetwork::new(&[3, 3], &mut rng);
        let grad = MlpGrad::zeros_like(&other);
        let mut opt = AdamState::new(&net, 1e-3);
        assert!(matches!(opt.step(&mut net, &grad), Err(NnError::ShapeMismatch)));
    }

    #[test]
    fn soft_update_endpoints_and_contraction() {
        let mut rng = RngStream::new(19);
        let source = MlpNetwork::new(&[3, 3], &mut rng);
        let mut target = MlpNetwork::new(&[3, 3], &mut rng);

        let mut t1 = target.clone();
        soft_update(&mut t1, &source, 1.0);
        assert_eq!(t1, source);

        let mut t0 = target.clone();
        soft_update(&mut t0, &source, 0.0);
        assert_eq!(t0, target);

        // geometric decay of the distance with frozen source
        let dist = |a: &MlpNetwork, b: &MlpNetwork| -> f64 {
            a.layers
                .iter()
                .zip(&b.layers)
                .flat_map(|(x, y)| x.w.iter().zip(&y.w))
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let tau = 0.25;
        let d0 = dist(&target, &source);
        soft_update(&mut target, &source, tau);
        let d1 = dist(&target, &source);
        soft_update(&mut target, &source, tau);
        let d2 = dist(&target, &source);
        assert!((d1 / d0 - (1.0 - tau)).abs() < 1e-12);
        assert!((d2 / d1 - (1.0 - tau)).abs() < 1e-12);
    }

    #[test]
    fn squashed_sample_degenerate_std() {
        let head = GaussianHead {
            mean: vec![0.8, -0.4],
            log_std: vec![LOG_STD_MIN, LOG_STD_MIN],
        };
        let mut rng = RngStream::new(20);
        let s = head.sample_squashed(&mut rng);
        for (a, m) in s.action.iter().zip(&head.mean) {
            assert!((a - m.tanh()).abs() < 1e-6);
        }
        assert!(s.log_prob.is_finite());
    }

    #[test]
    fn squashed_log_prob_finite_for_large_pre_tanh() {
        let mean = vec![0.0];
        let log_std = vec![0.0];
        for u in [-10.0, -5.0, 0.0, 5.0, 10.0] {
            let lp = squashed_log_prob(&mean, &log_std, &[u]);
            assert!(lp.is_finite(), "log_prob at u={u} is {lp}");
        }
    }

    #[test]
    fn squashed_density_integrates_to_one() {
        // quadrature in action space for a 1-D head
        let mean = vec![0.3];
        let log_std = vec![-0.5];
        let n = 400_000;
        let mut integral = 0.0;
        for i in 0..n {
            let a = -1.0 + 2.0 * (i as f64 + 0.5) / n as f64;
            // avoid the exact endpoints where atanh diverges
            let u = a.atanh();
            if !u.is_finite() {
                continue;
            }
            let lp = squashed_log_prob(&mean, &log_std, &[u]);
            integral += lp.exp() * (2.0 / n as f64);
        }
        assert!((integral - 1.0).abs() < 1e-3, "integral {integral}");
    }

    #[test]
    fn head_from_net_output_clamps() {
        let head = GaussianHead::from_net_output(&[0.1, -0.2, 5.0, -30.0]);
        assert_eq!(head.mean, vec![0.1, -0.2]);
        assert_eq!(head.log_std, vec![LOG_STD_MAX, LOG_STD_MIN]);
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut rng = RngStream::new(21);
        let net = MlpNetwork::new(&[4, 6, 3], &mut rng);
        let mut buf = Vec::new();
        net.save(&mut buf).unwrap();
        let back = MlpNetwork::load(std::io::BufReader::new(&buf[..])).unwrap();
        assert_eq!(net, back);
    }

    #[test]
    fn checkpoint_rejects_bad_header() {
        let data = b"not-a-checkpoint\n1 2\n";
        assert!(matches!(
            MlpNetwork::load(std::io::BufReader::new(&data[..])),
            Err(NnError::Checkpoint(_))
        ));
    }

    #[test]
    fn forward_is_deterministic() {
        let mut rng = RngStream::new(22);
        let net = MlpNetwork::new(&[3, 8, 2], &mut rng);
        let x = [0.4, -0.6, 1.2];
        assert_eq!(net.forward(&x).unwrap(), net.forward(&x).unwrap());
    }
}
