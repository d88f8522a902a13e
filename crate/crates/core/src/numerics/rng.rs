use super::Complex;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Seeded random stream with a pinned algorithm (ChaCha8 + explicit
/// bit-to-float conversion + Box-Muller), so identical seeds reproduce
/// identical sequences on any platform.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in [0, 1), 53 random mantissa bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform index in 0..n.
    pub fn index(&mut self, n: usize) -> usize {
        // n here is a buffer/batch size, far below 2^53: modulo bias negligible,
        // but map through the float path for a bias-free draw anyway.
        (self.uniform() * n as f64) as usize % n
    }

    /// Standard normal via Box-Muller (cosine branch).
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform(); // (0, 1]
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Circularly symmetric complex normal CN(0,1): each component has
    /// variance 1/2.
    pub fn sample_cn01(&mut self) -> Complex {
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        Complex::new(
            self.standard_normal() * scale,
            self.standard_normal() * scale,
        )
    }

    /// Child stream with a seed derived from this stream's seed and a label.
    /// Used to give schemes/seeds/sweep points independent, reproducible streams.
    pub fn child(&self, label: &str) -> RngStream {
        RngStream::new(derive_seed(self.seed, label))
    }
}

/// Deterministic seed derivation: splitmix64 over the base seed mixed with
/// an FNV-1a hash of the label.
pub fn derive_seed(base: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in label.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    splitmix64(base ^ h)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}
