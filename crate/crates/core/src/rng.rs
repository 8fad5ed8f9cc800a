//! Seeded, stream-addressable random numbers.
//!
//! A [`RandomStream`] is a ChaCha12 generator keyed by `(seed, stream_id)`.
//! The ChaCha stream counter carries the id, so every task in a batch can own
//! an independent sequence while the whole batch stays reproducible from a
//! single base seed.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha12Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.random::<f64>()
    }

    /// Uniform index in `0..n`. `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.rng.random::<f64>() < p
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Draws from Gamma(shape, scale).
    pub fn gamma(&mut self, shape: f64, scale: f64) -> Result<f64> {
        let dist = Gamma::new(shape, scale)
            .map_err(|e| Error::invalid(format!("gamma({shape}, {scale}): {e}")))?;
        Ok(dist.sample(&mut self.rng))
    }

    /// Fills `out` with Gamma(shape, scale) draws.
    pub fn gamma_fill(&mut self, shape: f64, scale: f64, out: &mut [f64]) -> Result<()> {
        let dist = Gamma::new(shape, scale)
            .map_err(|e| Error::invalid(format!("gamma({shape}, {scale}): {e}")))?;
        for v in out.iter_mut() {
            *v = dist.sample(&mut self.rng);
        }
        Ok(())
    }
}

/// 64-bit FNV-1a, used to derive stable stream ids from textual keys.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Stream id for a keyed task, e.g. `(image_id, level, seed)` in a ladder.
pub fn stream_key(parts: &[&str]) -> u64 {
    let mut buf = Vec::new();
    for (i, p) in parts.iter().enumerate() {
        if i > 0 {
            buf.push(0);
        }
        buf.extend_from_slice(p.as_bytes());
    }
    fnv1a64(&buf)
}
