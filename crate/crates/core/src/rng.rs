use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

// Stream ids keep generators that share a user seed statistically independent.
pub(crate) const STREAM_SYMMETRIC: u64 = 0;
pub(crate) const STREAM_ORTHOGONAL: u64 = 1;
pub(crate) const STREAM_POINTS: u64 = 2;
pub(crate) const STREAM_PERMUTATIONS: u64 = 3;
pub(crate) const STREAM_INVARIANCE: u64 = 4;
pub(crate) const STREAM_MIDPOINT: u64 = 5;

/// Base of the per-trial streams used by the certifier; dimension, attempt and
/// trial index are packed below it.
pub(crate) const STREAM_TRIALS: u64 = 1 << 63;

pub(crate) fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn trial_stream(n: usize, attempt: usize, trial: usize) -> u64 {
    STREAM_TRIALS | ((n as u64 & 0x7fff) << 48) | ((attempt as u64 & 0xffff) << 32) | (trial as u64 & 0xffff_ffff)
}

pub(crate) fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}
