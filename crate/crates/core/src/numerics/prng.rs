use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Seedable deterministic generator: ChaCha8 (from `rand_chacha`) keyed by
/// `seed_from_u64(seed)`, with independent sub-streams selected through the
/// ChaCha stream counter.
///
/// The algorithm is part of the reproducibility contract of every seeded
/// output (simulation envelopes, synthetic data). Do not swap it.
#[derive(Debug, Clone)]
pub struct Prng(ChaCha8Rng);

const TWO_POW_MINUS_53: f64 = 1.0 / (1u64 << 53) as f64;

impl Prng {
    pub fn new(seed: u64) -> Self {
        Prng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Generator for sub-stream `stream` of `seed`. Used to give every
    /// simulation index its own stream so parallel runs match sequential ones.
    pub fn split(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Prng(rng)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_POW_MINUS_53
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * TWO_POW_MINUS_53
    }
}
