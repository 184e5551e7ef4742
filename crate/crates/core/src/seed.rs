//! Seed discipline.
//!
//! Every random computation takes one master seed. Independent tasks
//! (environments, paths, grid cells) draw from child seeds obtained with
//! [`child_seed`], a SplitMix64 mix of the master seed and the task index.
//! The mapping depends only on `(master, index)`, so a batch split across
//! any number of threads reproduces the sequential result.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th child task of `master`.
pub fn child_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_mul(GOLDEN) ^ 0xA5A5_A5A5))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for the `index`-th child task.
pub fn child_rng(master: u64, index: u64) -> Rng {
    rng(child_seed(master, index))
}
