//! Seeded random source.
//!
//! Every stochastic operation in the engine draws from a [`RandomSource`],
//! a thin wrapper over the ChaCha8 stream cipher used as a counter-based
//! generator. ChaCha8 output is a pure function of (key, stream, counter),
//! so identical seeds give bit-identical streams on every platform.
//!
//! Seeding: the 64-bit seed is expanded to the 256-bit ChaCha key with
//! PCG32 (`rand_core::SeedableRng::seed_from_u64`). Independent
//! sub-streams of one seed are selected with the 64-bit ChaCha stream id.
//!
//! Integer draws use rejection sampling on full 64-bit words, and real
//! draws take the top 53 bits of a word, so no platform-dependent width
//! enters any sampling path.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// An independent stream derived from the same seed.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `[0, bound)`. Panics if `bound == 0`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "RandomSource::below called with bound 0");
        // Largest multiple of `bound` that fits; draws at or above it are rejected.
        let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return x % bound;
            }
        }
    }

    pub fn index(&mut self, len: usize) -> usize {
        self.below(len as u64) as usize
    }

    /// Uniform integer in the closed range `[lo, hi]`.
    pub fn int_inclusive(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi);
        let span = (hi - lo) as u64 + 1;
        lo + self.below(span) as i64
    }

    /// Uniform real in `[0, 1)` with 53 bits of precision.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform multiple of 2^-24 in `[0, 1)`; exactly representable in f32.
    pub fn unit_f32(&mut self) -> f32 {
        (self.next_u64() >> 40) as f32 * (1.0 / (1u32 << 24) as f32)
    }

    /// Uniform real in `[lo, hi]` (`lo` when the range is degenerate).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if lo == hi {
            // Still consume a draw so the stream position does not depend on the range.
            self.next_u64();
            return lo;
        }
        lo + (hi - lo) * self.unit()
    }

    /// True with probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    /// Fisher-Yates shuffle, walking from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }

    /// A new source seeded from the next word of this one.
    pub fn fork(&mut self) -> RandomSource {
        RandomSource::new(self.next_u64())
    }
}
