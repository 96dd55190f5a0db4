//! Deterministic random streams.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] seeded with a
//! 64-bit value. Independent streams are derived with [`mix`], so a stream
//! is fully identified by `(seed, purpose tag, index)` and never depends on
//! scheduling. Standard normals use the polar Box–Muller transform so that
//! the uniform-to-normal mapping is explicit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Purpose tags for derived streams.
pub mod tag {
    pub const TRUTH: u64 = 0x7472_7574;
    pub const SAMPLING: u64 = 0x7361_6d70;
    pub const NOISE: u64 = 0x6e6f_6973;
    pub const FACTORS: u64 = 0x6661_6374;
    pub const TRIAL: u64 = 0x7472_6961;
}

#[inline]
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a stream seed: `splitmix64(splitmix64(splitmix64(seed) ^ tag) ^ index)`.
pub fn mix(seed: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ tag) ^ index)
}

pub fn stream(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw on `[0, 1)`.
#[inline]
pub fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

/// Polar Box–Muller standard normal generator. Each accepted pair of
/// uniforms yields two normals; the second is cached for the next call.
#[derive(Debug, Default, Clone)]
pub struct StandardNormal {
    spare: Option<f64>,
}

impl StandardNormal {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * uniform(rng) - 1.0;
            let v = 2.0 * uniform(rng) - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let factor = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * factor);
                return u * factor;
            }
        }
    }
}

/// A seeded stream paired with its normal generator.
pub struct Sampler {
    rng: StreamRng,
    normal: StandardNormal,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: stream(seed),
            normal: StandardNormal::new(),
        }
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        uniform(&mut self.rng)
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        self.normal.sample(&mut self.rng)
    }
}
