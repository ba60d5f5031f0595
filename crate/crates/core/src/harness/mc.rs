//! Seeded Monte Carlo engine.
//!
//! Work is cut into fixed-size chunks and chunk `c` draws from ChaCha8
//! stream `c` of the base seed, so results do not depend on how rayon
//! schedules the chunks or on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fusion::optimal_rule;
use crate::geo::{link_channels, LinkChannels, NodeChannel, Polar, PowerModel, Scene};
use crate::indicators::IndicatorStats;
use crate::pmf_algebra::build_indexer;

/// Trials per RNG stream.
pub const CHUNK: usize = 8192;

/// Independent generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `trials` trials in chunks; `f(rng, n)` runs `n` trials and returns
/// a partial tally. Partial tallies come back in chunk order.
pub fn run_chunked<T, F>(seed: u64, trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = CHUNK.min(trials - c * CHUNK);
            f(&mut stream_rng(seed, c as u64), n)
        })
        .collect()
}

/// Bernoulli proportion with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Proportion {
    pub hits: u64,
    pub trials: u64,
}

impl Proportion {
    pub fn mean(&self) -> f64 {
        if self.trials == 0 {
            f64::NAN
        } else {
            self.hits as f64 / self.trials as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        let p = self.mean();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// Normal-approximation 95% interval.
    pub fn ci95(&self) -> (f64, f64) {
        let h = 1.959963984540054 * self.std_error();
        (self.mean() - h, self.mean() + h)
    }

    fn merge(parts: impl IntoIterator<Item = Proportion>) -> Proportion {
        parts.into_iter().fold(
            Proportion { hits: 0, trials: 0 },
            |acc, p| Proportion {
                hits: acc.hits + p.hits,
                trials: acc.trials + p.trials,
            },
        )
    }
}

/// Sample mean of a real statistic with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl MeanEstimate {
    pub fn ci95(&self) -> (f64, f64) {
        let h = 1.959963984540054 * self.std_error;
        (self.mean - h, self.mean + h)
    }
}

/// Mean of `f(rng)` over `trials` draws.
pub fn mc_mean<F>(seed: u64, trials: usize, f: F) -> MeanEstimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    // Sum and sum of squares per chunk, reduced in chunk order.
    let parts = run_chunked(seed, trials, |rng, n| {
        let mut s = 0.0;
        let mut ss = 0.0;
        for _ in 0..n {
            let x = f(rng);
            s += x;
            ss += x * x;
        }
        (s, ss)
    });
    let (s, ss) = parts
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
    let n = trials as f64;
    let mean = s / n;
    let var = if trials > 1 {
        ((ss - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    MeanEstimate {
        mean,
        std_error: (var / n).sqrt(),
        samples: trials as u64,
    }
}

/// Draws received powers in dB and applies each node's threshold test.
struct ChannelSampler {
    idle: Normal<f64>,
    idle_prob: f64,
}

impl ChannelSampler {
    fn new(model: &PowerModel, idle_prob: f64) -> Result<Self> {
        let idle = Normal::new(model.mu0, model.sigma0())
            .map_err(|e| Error::Numeric(format!("noise distribution: {e}")))?;
        Ok(Self { idle, idle_prob })
    }

    fn ps_idle(&self, rng: &mut ChaCha8Rng) -> bool {
        rng.random_bool(self.idle_prob)
    }

    fn free(&self, rng: &mut ChaCha8Rng, ch: &NodeChannel, idle: bool) -> bool {
        let power = if idle {
            self.idle.sample(rng)
        } else {
            ch.active_mean + ch.active_sd * rng.sample::<f64, _>(rand_distr::StandardNormal)
        };
        power < ch.threshold
    }
}

fn checked_channels(rx: Polar, coops: &[Polar], scene: &Scene, model: &PowerModel) -> Result<LinkChannels> {
    model.validate()?;
    scene.validate()?;
    Ok(link_channels(rx, coops, scene, model))
}

/// Sampled `Pr(rx free | tx free)`: PS state, then log-normal powers at both
/// ends, then the threshold tests.
pub fn mc_alpha(
    rx: Polar,
    scene: &Scene,
    model: &PowerModel,
    trials: usize,
    seed: u64,
) -> Result<Proportion> {
    let ch = checked_channels(rx, &[], scene, model)?;
    let sampler = ChannelSampler::new(model, ch.ps_idle_prob)?;
    let parts = run_chunked(seed, trials, |rng, n| {
        let mut p = Proportion { hits: 0, trials: 0 };
        for _ in 0..n {
            let idle = sampler.ps_idle(rng);
            let tx = sampler.free(rng, &ch.tx, idle);
            let rx = sampler.free(rng, &ch.rx, idle);
            if tx {
                p.trials += 1;
                p.hits += u64::from(rx);
            }
        }
        p
    });
    Ok(Proportion::merge(parts))
}

/// Sampled `Pr(link available | rule declares available)` for the Bayes rule
/// with weight `w` and the given cooperative nodes. `None` when the rule
/// never declared within the trials.
pub fn mc_link_given_declared(
    rx: Polar,
    coops: &[Polar],
    scene: &Scene,
    model: &PowerModel,
    w: f64,
    trials: usize,
    seed: u64,
) -> Result<Option<Proportion>> {
    let ch = checked_channels(rx, coops, scene, model)?;
    let stats = IndicatorStats::new(ch.alpha(), w)?;
    let (p1, p0) = ch.joint_pmfs()?;
    let rule = optimal_rule(&stats, &p1, &p0)?;
    let indexer = build_indexer(coops.len().max(1))?;
    let sampler = ChannelSampler::new(model, ch.ps_idle_prob)?;
    let parts = run_chunked(seed, trials, |rng, n| {
        let mut p = Proportion { hits: 0, trials: 0 };
        for _ in 0..n {
            let idle = sampler.ps_idle(rng);
            let tx = sampler.free(rng, &ch.tx, idle);
            let rx = sampler.free(rng, &ch.rx, idle);
            let mut mask = 0u32;
            for (i, c) in ch.coops.iter().enumerate() {
                if sampler.free(rng, c, idle) {
                    mask |= 1 << i;
                }
            }
            let pos = if coops.is_empty() { 0 } else { indexer.position(mask) };
            if tx && rule.declares(pos) {
                p.trials += 1;
                p.hits += u64::from(rx);
            }
        }
        p
    });
    let total = Proportion::merge(parts);
    Ok((total.trials > 0).then_some(total))
}
