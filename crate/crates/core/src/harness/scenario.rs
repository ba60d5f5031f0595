//! Seeded correlated pmf pairs for the robust-fusion experiment.
//!
//! Nodes are split into groups that are independent of each other. Inside a
//! group a common cause acts: with probability `lambda_g` every member
//! reports one shared bit (drawn with probability `pi_g` of matching the
//! hypothesis), otherwise members report independently with probabilities
//! `theta_i`. Given target marginals `m_i`, `pi_g` is the group mean and
//! `theta_i = (m_i - lambda_g pi_g) / (1 - lambda_g)`; `lambda_g` is the
//! requested strength, lowered where needed to keep every `theta_i` in
//! `[0, 1]`. The construction reproduces the marginals exactly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mc::stream_rng;
use crate::error::{Error, Result};
use crate::pmf_algebra::{build_indexer, Hypothesis, JointPmf, MAX_DENSE_NODES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelatedScenario {
    pub nodes: usize,
    /// Partition of `0..nodes`.
    pub groups: Vec<Vec<usize>>,
    /// Requested common-cause strength in `[0, 1)`.
    pub lambda: f64,
    /// First-order marginals are drawn uniformly from this range.
    pub marginal_range: [f64; 2],
}

impl Default for CorrelatedScenario {
    fn default() -> Self {
        Self {
            nodes: 6,
            groups: vec![vec![0, 1, 2], vec![3, 4, 5]],
            lambda: 0.8,
            marginal_range: [0.65, 0.85],
        }
    }
}

/// A generated pair and the parameters actually used.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioPmfs {
    pub p1: JointPmf,
    pub p0: JointPmf,
    /// `Pr(co_i = 1 | available)`.
    pub beta: Vec<f64>,
    /// `Pr(co_i = 0 | unavailable)`.
    pub gamma: Vec<f64>,
    /// Effective strength per group, for each hypothesis.
    pub lambda1: Vec<f64>,
    pub lambda0: Vec<f64>,
}

impl CorrelatedScenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::InvalidParameter {
            name: "scenario",
            reason,
        };
        if self.nodes == 0 || self.nodes > MAX_DENSE_NODES {
            return Err(bad(format!("node count {} outside 1..={MAX_DENSE_NODES}", self.nodes)));
        }
        let mut seen = vec![false; self.nodes];
        for &i in self.groups.iter().flatten() {
            if i >= self.nodes || seen[i] {
                return Err(bad(format!("groups must partition 0..{}", self.nodes)));
            }
            seen[i] = true;
        }
        if seen.iter().any(|&s| !s) || self.groups.iter().any(Vec::is_empty) {
            return Err(bad(format!("groups must partition 0..{}", self.nodes)));
        }
        if !(0.0..1.0).contains(&self.lambda) {
            return Err(bad(format!("lambda {} outside [0, 1)", self.lambda)));
        }
        let [lo, hi] = self.marginal_range;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(bad(format!("marginal range [{lo}, {hi}] outside [0, 1]")));
        }
        Ok(())
    }

    /// Draws `beta` then `gamma` from stream 0 of `seed` and builds the pair.
    pub fn generate(&self, seed: u64) -> Result<ScenarioPmfs> {
        self.validate()?;
        let mut rng = stream_rng(seed, 0);
        let [lo, hi] = self.marginal_range;
        let mut draw = || -> f64 {
            if hi > lo {
                rng.random_range(lo..hi)
            } else {
                lo
            }
        };
        let beta: Vec<f64> = (0..self.nodes).map(|_| draw()).collect();
        let gamma: Vec<f64> = (0..self.nodes).map(|_| draw()).collect();
        let (p1, lambda1) = self.build(Hypothesis::Available, &beta)?;
        let (p0, lambda0) = self.build(Hypothesis::Unavailable, &gamma)?;
        Ok(ScenarioPmfs {
            p1,
            p0,
            beta,
            gamma,
            lambda1,
            lambda0,
        })
    }

    /// `marg[i]` is the probability that node `i` reports the bit matching `s`.
    fn build(&self, s: Hypothesis, marg: &[f64]) -> Result<(JointPmf, Vec<f64>)> {
        struct Group<'a> {
            members: &'a [usize],
            pi: f64,
            lambda: f64,
            theta: Vec<f64>,
        }
        let groups: Vec<Group> = self
            .groups
            .iter()
            .map(|members| {
                let pi = members.iter().map(|&i| marg[i]).sum::<f64>() / members.len() as f64;
                let mut lambda = self.lambda;
                for &i in members {
                    let m = marg[i];
                    if m < pi {
                        lambda = lambda.min(m / pi);
                    } else if m > pi {
                        lambda = lambda.min((1.0 - m) / (1.0 - pi));
                    }
                }
                let theta = members
                    .iter()
                    .map(|&i| ((marg[i] - lambda * pi) / (1.0 - lambda)).clamp(0.0, 1.0))
                    .collect();
                Group {
                    members,
                    pi,
                    lambda,
                    theta,
                }
            })
            .collect();

        let idx = build_indexer(self.nodes)?;
        let values = idx
            .masks()
            .iter()
            .map(|&mask| {
                groups
                    .iter()
                    .map(|g| {
                        let hits: Vec<bool> = g
                            .members
                            .iter()
                            .map(|&i| (mask & (1 << i) != 0) == (s == Hypothesis::Available))
                            .collect();
                        let indep: f64 = hits
                            .iter()
                            .zip(&g.theta)
                            .map(|(&h, &t)| if h { t } else { 1.0 - t })
                            .product();
                        let mut v = (1.0 - g.lambda) * indep;
                        if hits.iter().all(|&h| h) {
                            v += g.lambda * g.pi;
                        }
                        if hits.iter().all(|&h| !h) {
                            v += g.lambda * (1.0 - g.pi);
                        }
                        v
                    })
                    .product()
            })
            .collect();
        let lambdas = groups.iter().map(|g| g.lambda).collect();
        Ok((JointPmf::new(s, self.nodes, values)?, lambdas))
    }
}
