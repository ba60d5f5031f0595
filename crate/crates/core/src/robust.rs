//! Minimax fusion when only marginals up to order `k` are known.
//!
//! Among all joint pmf pairs consistent with the known marginals, the
//! least-favorable pair maximizes the Bayes risk
//! `sum_i min(w (1-alpha) P0[i], alpha P1[i])`. Since both pmfs sum to one,
//! this equals `(w (1-alpha) + alpha - ||w (1-alpha) P0 - alpha P1||_1) / 2`,
//! so the search is an L1 minimization, posed here as a linear program with
//! epigraph variables. The robust rule is then the Bayes rule against that
//! pair.

pub mod lp;

use nalgebra::DMatrix;

use crate::coop_single::NodeStats;
use crate::error::{Error, Result};
use crate::fusion::{
    independent_rule, minimum_risk, optimal_rule, product_pmfs, rule_risk, DecisionRule,
};
use crate::indicators::IndicatorStats;
use crate::pmf_algebra::{
    build_g, joint_to_marginals, marginalize_nodes, Hypothesis, JointPmf, MarginalSet,
};

pub use lp::{lp_solve, LpSolution};

/// Largest node count accepted by the LP formulation (`5 * 2^K` columns).
pub const MAX_ROBUST_NODES: usize = 8;

/// Known marginals of both hypotheses and the decision costs.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustProblem {
    stats: IndicatorStats,
    q1: MarginalSet,
    q0: MarginalSet,
}

impl RobustProblem {
    pub fn new(stats: IndicatorStats, q1: MarginalSet, q0: MarginalSet) -> Result<Self> {
        if q1.hypothesis() != Hypothesis::Available || q0.hypothesis() != Hypothesis::Unavailable
        {
            return Err(Error::InvalidParameter {
                name: "marginals",
                reason: "expected (available, unavailable) marginals in that order".into(),
            });
        }
        if q1.k() != q0.k() || q1.order() != q0.order() {
            return Err(Error::DimensionMismatch(format!(
                "marginal sets of order {} over {} nodes and order {} over {} nodes",
                q1.order(),
                q1.k(),
                q0.order(),
                q0.k()
            )));
        }
        if q1.k() > MAX_ROBUST_NODES {
            return Err(Error::SizeLimit {
                k: q1.k(),
                limit: MAX_ROBUST_NODES,
            });
        }
        Ok(Self { stats, q1, q0 })
    }

    /// Marginals of order `k_known` taken from a known joint pair.
    pub fn from_joint(
        stats: IndicatorStats,
        p1: &JointPmf,
        p0: &JointPmf,
        k_known: usize,
    ) -> Result<Self> {
        Self::new(
            stats,
            joint_to_marginals(p1, k_known)?,
            joint_to_marginals(p0, k_known)?,
        )
    }

    pub fn stats(&self) -> &IndicatorStats {
        &self.stats
    }

    pub fn k_known(&self) -> usize {
        self.q1.order()
    }

    pub fn node_count(&self) -> usize {
        self.q1.k()
    }

    pub fn q1(&self) -> &MarginalSet {
        &self.q1
    }

    pub fn q0(&self) -> &MarginalSet {
        &self.q0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustSolution {
    pub p1_opt: JointPmf,
    pub p0_opt: JointPmf,
    /// Bayes rule against the least-favorable pair.
    pub rule: DecisionRule,
    /// Maximized Bayes risk, i.e. the risk of `rule` under the pair.
    pub objective: f64,
    /// `||w (1-alpha) P0 - alpha P1||_1` at the optimum.
    pub l1_norm: f64,
}

pub fn solve_robust(prob: &RobustProblem) -> Result<RobustSolution> {
    let k = prob.node_count();
    let m = prob.k_known();
    let n = 1usize << k;
    let c0 = prob.stats.false_alarm_cost();
    let c1 = prob.stats.miss_cost();

    // Columns: P1 | P0 | t | s+ | s-, all nonnegative.
    let cols = 5 * n;
    let g1 = build_g(Hypothesis::Available, m, k)?.as_f64();
    let g0 = build_g(Hypothesis::Unavailable, m, k)?.as_f64();
    let s_m = g1.nrows();
    let rows = 2 * s_m + 2 * n;
    let mut a = DMatrix::zeros(rows, cols);
    let mut b = vec![0.0; rows];
    for i in 0..s_m {
        for j in 0..n {
            a[(i, j)] = g1[(i, j)];
            a[(s_m + i, n + j)] = g0[(i, j)];
        }
        b[i] = prob.q1.values()[i];
        b[s_m + i] = prob.q0.values()[i];
    }
    for i in 0..n {
        // c0 P0 - c1 P1 - t + s+ = 0  and  -c0 P0 + c1 P1 - t + s- = 0
        let up = 2 * s_m + 2 * i;
        let down = up + 1;
        a[(up, i)] = -c1;
        a[(up, n + i)] = c0;
        a[(up, 2 * n + i)] = -1.0;
        a[(up, 3 * n + i)] = 1.0;
        a[(down, i)] = c1;
        a[(down, n + i)] = -c0;
        a[(down, 2 * n + i)] = -1.0;
        a[(down, 4 * n + i)] = 1.0;
    }
    let mut cost = vec![0.0; cols];
    for c in cost.iter_mut().skip(2 * n).take(n) {
        *c = 1.0;
    }
    let bounds = vec![(0.0, f64::INFINITY); cols];
    let sol = lp_solve(&cost, &a, &b, &bounds)?;
    log::debug!(
        "robust LP: K={k} k={m} alpha={} pivots={} objective={}",
        prob.stats.alpha(),
        sol.iterations,
        sol.objective
    );

    let p1_opt = JointPmf::new(Hypothesis::Available, k, sol.x[..n].to_vec())?;
    let p0_opt = JointPmf::new(Hypothesis::Unavailable, k, sol.x[n..2 * n].to_vec())?;
    let rule = optimal_rule(&prob.stats, &p1_opt, &p0_opt)?;
    let objective = minimum_risk(&prob.stats, &p1_opt, &p0_opt);
    let l1_norm = p1_opt
        .values()
        .iter()
        .zip(p0_opt.values())
        .map(|(&p1, &p0)| (c0 * p0 - c1 * p1).abs())
        .sum();
    Ok(RobustSolution {
        p1_opt,
        p0_opt,
        rule,
        objective,
        l1_norm,
    })
}

/// First-order statistics `(beta_i, gamma_i)` read off a joint pair.
pub fn first_order_nodes(p1: &JointPmf, p0: &JointPmf) -> Result<Vec<NodeStats>> {
    let q1 = joint_to_marginals(p1, 1)?;
    let q0 = joint_to_marginals(p0, 1)?;
    let betas = q1.first_order().unwrap_or(&[]);
    let gammas = q0.first_order().unwrap_or(&[]);
    betas
        .iter()
        .zip(gammas)
        .map(|(&b, &g)| NodeStats::new(b, g))
        .collect()
}

/// Risk, under the true pmfs, of the rule that assumes conditionally
/// independent nodes with the true first-order marginals.
pub fn independence_risk(stats: &IndicatorStats, p1: &JointPmf, p0: &JointPmf) -> Result<f64> {
    let nodes = first_order_nodes(p1, p0)?;
    let table = match independent_rule(stats, &nodes) {
        Ok(rule) => rule.table().to_vec(),
        // Perfect nodes have infinite reliability; the product-form test
        // is the same rule without logarithms.
        Err(Error::DegenerateStats(_)) => {
            let (q1, q0) = product_pmfs(&nodes)?;
            optimal_rule(stats, &q1, &q0)?.table().to_vec()
        }
        Err(e) => return Err(e),
    };
    Ok(rule_risk(stats, &table, p1, p0))
}

/// Robust risk of using only the nodes in `subset`, knowing their marginals
/// up to order `min(k_known, |subset|)`.
pub fn robust_risk_for_subset(
    stats: &IndicatorStats,
    p1: &JointPmf,
    p0: &JointPmf,
    subset: &[usize],
    k_known: usize,
) -> Result<f64> {
    if subset.is_empty() {
        return Ok(stats.false_alarm_cost().min(stats.miss_cost()));
    }
    let s1 = marginalize_nodes(p1, subset)?;
    let s0 = marginalize_nodes(p0, subset)?;
    let prob = RobustProblem::from_joint(*stats, &s1, &s0, k_known.min(subset.len()))?;
    Ok(solve_robust(&prob)?.objective)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(a: f64, w: f64) -> IndicatorStats {
        IndicatorStats::new(a, w).unwrap()
    }

    fn pair() -> (JointPmf, JointPmf) {
        let p1 = JointPmf::new(Hypothesis::Available, 2, vec![0.05, 0.15, 0.2, 0.6]).unwrap();
        let p0 = JointPmf::new(Hypothesis::Unavailable, 2, vec![0.5, 0.2, 0.1, 0.2]).unwrap();
        (p1, p0)
    }

    #[test]
    fn full_information_matches_optimal() {
        let (p1, p0) = pair();
        for a in [0.2, 0.5, 0.8] {
            let s = stats(a, 1.0);
            let prob = RobustProblem::from_joint(s, &p1, &p0, 2).unwrap();
            let sol = solve_robust(&prob).unwrap();
            let opt = optimal_rule(&s, &p1, &p0).unwrap();
            assert!((sol.objective - opt.risk()).abs() < 1e-9);
        }
    }

    #[test]
    fn no_information_gives_prior_risk() {
        let (p1, p0) = pair();
        for a in [0.1, 0.5, 0.95] {
            let s = stats(a, 9.0);
            let prob = RobustProblem::from_joint(s, &p1, &p0, 0).unwrap();
            let sol = solve_robust(&prob).unwrap();
            let bound = (9.0 * (1.0 - a)).min(a);
            assert!((sol.objective - bound).abs() < 1e-9, "{a}");
            assert!(sol.l1_norm >= 0.0);
        }
    }

    #[test]
    fn identity_between_objective_and_norm() {
        let (p1, p0) = pair();
        let s = stats(0.4, 2.0);
        let sol = solve_robust(&RobustProblem::from_joint(s, &p1, &p0, 1).unwrap()).unwrap();
        let c0 = s.false_alarm_cost();
        let c1 = s.miss_cost();
        assert!((sol.objective - (c0 + c1 - sol.l1_norm) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn inconsistent_marginals_infeasible() {
        // three pairwise-disjoint events cannot each have probability 0.6
        let q = MarginalSet::new(
            Hypothesis::Available,
            2,
            3,
            vec![1.0, 0.6, 0.6, 0.6, 0.0, 0.0, 0.0],
        )
        .unwrap();
        let q0 = MarginalSet::new(
            Hypothesis::Unavailable,
            2,
            3,
            vec![1.0, 0.5, 0.5, 0.5, 0.25, 0.25, 0.25],
        )
        .unwrap();
        let prob = RobustProblem::new(stats(0.5, 1.0), q, q0).unwrap();
        assert_eq!(solve_robust(&prob), Err(Error::Infeasible));
    }
}
