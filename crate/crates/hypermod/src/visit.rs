//! Sweep-order control shared by the Louvain optimizers.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Order in which units (nodes, supernodes, or origin sets) are visited
/// within a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VisitOrder {
    /// Ascending id; the deterministic default.
    Ascending,
    /// Seeded permutation, fixed for the whole call.
    Shuffled(u64),
}

pub(crate) fn visit_order(count: usize, visit: VisitOrder) -> Vec<usize> {
    let mut order: Vec<usize> = (0..count).collect();
    if let VisitOrder::Shuffled(seed) = visit {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
    }
    order
}

/// splitmix64 mix of a base seed and a salt; decorrelates per-round orders.
pub(crate) fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
