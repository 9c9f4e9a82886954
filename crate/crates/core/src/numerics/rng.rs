//! Splittable, counter-based random streams.
//!
//! A stream is identified by a base seed and a path of `(label, index)`
//! pairs. The path is hashed (SHA-256, length-prefixed so distinct paths never
//! share an encoding) into a ChaCha8 key; draws are the ChaCha keystream, so a
//! stream is a pure function of its identity and the number of draws taken.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

const DOMAIN_TAG: &[u8] = b"krrlab/rng-stream/v1";

#[derive(Clone, Debug)]
pub struct RngStream {
    base_seed: u64,
    path: Vec<(String, u64)>,
    core: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl RngStream {
    pub fn new(base_seed: u64) -> Self {
        Self::with_path(base_seed, Vec::new())
    }

    fn with_path(base_seed: u64, path: Vec<(String, u64)>) -> Self {
        let mut h = Sha256::new();
        h.update(DOMAIN_TAG);
        h.update(base_seed.to_le_bytes());
        for (label, index) in &path {
            h.update((label.len() as u64).to_le_bytes());
            h.update(label.as_bytes());
            h.update(index.to_le_bytes());
        }
        let key: [u8; 32] = h.finalize().into();
        Self { base_seed, path, core: ChaCha8Rng::from_seed(key), spare_normal: None }
    }

    /// Child stream at `path ++ [(label, index)]`, starting from its first draw.
    pub fn derive(&self, label: &str, index: u64) -> RngStream {
        let mut path = self.path.clone();
        path.push((label.to_owned(), index));
        Self::with_path(self.base_seed, path)
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn path(&self) -> &[(String, u64)] {
        &self.path
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.core.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`.
    #[inline]
    fn uniform_open_low(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box–Muller; the second variate of each pair is cached.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform_open_low();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare_normal = Some(radius * s);
        radius * c
    }

    #[inline]
    pub fn rademacher(&mut self) -> f64 {
        if self.next_u64() >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Free-function form of [`RngStream::derive`].
pub fn derive_substream(s: &RngStream, label: &str, index: u64) -> RngStream {
    s.derive(label, index)
}
