//! Deterministic seed and stream derivation.
//!
//! Every random quantity in the crate is drawn from a ChaCha stream keyed by
//! `(seed, purpose, entity)`: the seed selects the key, while a purpose tag
//! and an entity index (edge id, replicate id, ...) select the stream nonce.
//! Distinct purposes and entities therefore never share a stream, results do
//! not depend on thread scheduling, and per-entity sampling can run in
//! parallel while staying bit-reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tag mixed into the stream nonce; keeps unrelated sampling stages
/// statistically independent even for equal entity indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub(crate) enum StreamKind {
    /// Germ count and positions of the Poisson-Voronoi tessellation.
    Germs = 1,
    /// Users along one street edge (entity = edge id).
    Users = 2,
    /// Occupation levels of the crossroads of one system.
    Occupation = 3,
    /// Bootstrap resampling of replicate results.
    Bootstrap = 4,
    /// Anchor choice when reading angle pairs off crossroads.
    Angles = 5,
}

/// RNG for the given purpose and entity under `seed`.
pub(crate) fn stream(seed: u64, kind: StreamKind, entity: u64) -> ChaCha8Rng {
    debug_assert!(entity < (1 << 56), "entity index exceeds stream capacity");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((kind as u64) << 56) | entity);
    rng
}

/// Derives the sub-seed of replicate `index` from a master seed.
///
/// Replicates of a Monte Carlo run each get their own seed so they can be
/// generated independently (and in parallel) while the whole run remains a
/// pure function of the master seed.
pub fn replicate_seed(master: u64, index: u64) -> u64 {
    // SplitMix-style avalanche over master and index.
    let mut z = master ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
