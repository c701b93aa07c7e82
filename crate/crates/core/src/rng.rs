//! Per-replica random streams derived from a master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::urn::signs::splitmix64;

pub type ReplicaRng = ChaCha8Rng;

/// Stream for replica `index`: ChaCha8 keyed by the master seed, stream id = index.
pub fn replica_rng(master: u64, index: u64) -> ReplicaRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Seed of the Rademacher signs used by replica `index`.
pub fn replica_sign_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ splitmix64(index ^ 0xA076_1D64_78BD_642F))
}
