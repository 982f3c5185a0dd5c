//! Deterministic, platform-stable random streams.
//!
//! Each `(seed, stream)` pair selects an independent ChaCha8 keystream, so
//! replicate `k` of a simulation can be drawn without touching replicates
//! `0..k`. That keeps parallel results independent of the worker count.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Child stream keyed by `index`. Distinct indices give distinct streams.
    pub fn derive(&self, index: u64) -> Self {
        Self {
            seed: self.seed,
            stream: splitmix64(self.stream ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D))),
        }
    }

    pub fn rng(&self) -> StreamRng {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(self.stream);
        StreamRng { inner }
    }
}

/// Generator attached to one [`RandomStream`].
#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: ChaCha8Rng,
}

impl StreamRng {
    /// Uniform variate on the open interval (0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_stream_same_sequence() {
        let s = RandomStream::new(42, 7);
        let a: Vec<f64> = {
            let mut r = s.rng();
            (0..100).map(|_| r.uniform()).collect()
        };
        let b: Vec<f64> = {
            let mut r = s.rng();
            (0..100).map(|_| r.uniform()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn streams_differ() {
        let s = RandomStream::new(42, 0);
        let mut a = s.derive(0).rng();
        let mut b = s.derive(1).rng();
        let mut c = RandomStream::new(43, 0).derive(0).rng();
        let x = a.next_u64();
        assert_ne!(x, b.next_u64());
        assert_ne!(x, c.next_u64());
    }

    #[test]
    fn uniform_is_open_interval() {
        let mut r = RandomStream::new(1, 1).rng();
        let mut sum = 0.0;
        for _ in 0..100_000 {
            let u = r.uniform();
            assert!(u > 0.0 && u < 1.0);
            sum += u;
        }
        assert!((sum / 100_000.0 - 0.5).abs() < 0.005);
    }

    #[test]
    fn pinned_first_draw() {
        // Guards against silent changes of the generator across versions.
        let mut r = RandomStream::new(0, 0).rng();
        let first = r.next_u64();
        let mut again = RandomStream::new(0, 0).rng();
        assert_eq!(first, again.next_u64());
        assert_eq!(first, 13_080_132_717_333_068_652);
    }
}
