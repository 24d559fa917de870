//! Random streams and seed derivation.
//!
//! Every stochastic operation takes a [`RandomStream`] so tests can replay a
//! scripted sequence of draws instead of a real generator.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The two kinds of draw the algorithms consume.
pub trait RandomStream {
    /// Uniform real in `[0, 1)`.
    fn uniform(&mut self) -> f64;
    /// Uniform index in `0..upper`. `upper` must be positive.
    fn index(&mut self, upper: usize) -> usize;

    /// Uniform real in `[lo, hi]`.
    fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}

impl<R: Rng> RandomStream for R {
    fn uniform(&mut self) -> f64 {
        self.random::<f64>()
    }

    fn index(&mut self, upper: usize) -> usize {
        self.random_range(0..upper)
    }
}

/// Generator used everywhere a seed is given.
pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A stream that replays pre-recorded draws. Panics when a queue runs dry,
/// which in a test means the code consumed more randomness than scripted.
#[derive(Debug, Clone, Default)]
pub struct ScriptedStream {
    uniforms: VecDeque<f64>,
    indices: VecDeque<usize>,
}

impl ScriptedStream {
    pub fn new(indices: impl IntoIterator<Item = usize>, uniforms: impl IntoIterator<Item = f64>) -> Self {
        Self {
            uniforms: uniforms.into_iter().collect(),
            indices: indices.into_iter().collect(),
        }
    }

    pub fn remaining(&self) -> (usize, usize) {
        (self.indices.len(), self.uniforms.len())
    }
}

impl RandomStream for ScriptedStream {
    fn uniform(&mut self) -> f64 {
        self.uniforms.pop_front().expect("scripted stream: uniform queue exhausted")
    }

    fn index(&mut self, upper: usize) -> usize {
        let i = self.indices.pop_front().expect("scripted stream: index queue exhausted");
        assert!(i < upper, "scripted index {i} out of range 0..{upper}");
        i
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a sequence of indices by
/// folding each index through SplitMix64: `s = splitmix64(s ^ splitmix64(i))`.
pub fn derive_seed(parent: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(parent), |s, &i| splitmix64(s ^ splitmix64(i)))
}
