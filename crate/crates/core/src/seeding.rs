//! Deterministic RNG stream derivation.
//!
//! Stream `k` is the ChaCha8 keystream keyed by the master seed with stream
//! id `k`: a pure function of `(master_seed, k)` that never depends on how
//! many other streams were drawn.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Derives stream `k` of `master_seed`.
pub fn stream(master_seed: u64, k: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(k);
    rng
}

/// Streams `0..n` belong to the nodes, `n` to the topology and `n + 1` to the
/// loss stream (drift, node offsets, data partition).
pub fn seed_streams(master_seed: u64, n: usize) -> Vec<Rng> {
    (0..n as u64 + 2).map(|k| stream(master_seed, k)).collect()
}

pub fn topology_stream(master_seed: u64, n: usize) -> Rng {
    stream(master_seed, n as u64)
}

pub fn loss_stream(master_seed: u64, n: usize) -> Rng {
    stream(master_seed, n as u64 + 1)
}
