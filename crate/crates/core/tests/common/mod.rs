//! Shared generators for the integration tests.
#![allow(dead_code)]

use crn_sense::coop_single::NodeStats;
use crn_sense::pmf_algebra::{Hypothesis, JointPmf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 20261015;

pub fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    r.set_stream(stream);
    r
}

/// Generator for a seed drawn by proptest.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random pmf over `k` nodes; roughly one entry in eight is zeroed.
pub fn random_joint(rng: &mut ChaCha8Rng, s: Hypothesis, k: usize) -> JointPmf {
    let n = 1usize << k;
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random_bool(0.125) {
                0.0
            } else {
                rng.random::<f64>()
            }
        })
        .collect();
    if v.iter().all(|&x| x == 0.0) {
        v[0] = 1.0;
    }
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    JointPmf::new(s, k, v).expect("normalized")
}

/// Node with both rates strictly inside (0, 1).
pub fn random_node(rng: &mut ChaCha8Rng) -> NodeStats {
    NodeStats::new(rng.random_range(0.02..0.98), rng.random_range(0.02..0.98)).unwrap()
}
