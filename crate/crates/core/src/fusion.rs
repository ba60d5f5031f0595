//! Bayes-optimal fusion of `K` cooperative indicators.
//!
//! A fusion rule is a truth table over the `2^K` observation patterns (in
//! [`SubsetIndexer`](crate::pmf_algebra::SubsetIndexer) order) telling the
//! transmitter whether to declare the link available when its own indicator
//! reads free. The optimum declares a pattern iff its likelihood ratio clears
//! `w (1 - alpha) / alpha`.

use crate::coop_single::NodeStats;
use crate::error::{Error, Result};
use crate::indicators::{lrt_declares, IndicatorStats};
use crate::pmf_algebra::{
    build_indexer, complete_joint, Hypothesis, JointPmf, MarginalSet, SubsetIndexer,
};

/// A deterministic fusion rule and its Bayesian risk.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRule {
    k: usize,
    table: Vec<bool>,
    risk: f64,
}

impl DecisionRule {
    pub fn k(&self) -> usize {
        self.k
    }

    /// `Gamma[i]`: declare availability on pattern `i`.
    pub fn table(&self) -> &[bool] {
        &self.table
    }

    pub fn risk(&self) -> f64 {
        self.risk
    }

    pub fn declares(&self, pattern: usize) -> bool {
        self.table[pattern]
    }

    /// Declares on at least one pattern.
    pub fn is_admissive(&self) -> bool {
        self.table.iter().any(|&g| g)
    }

    /// Table as a bitmask over pattern positions.
    pub fn table_bits(&self) -> u64 {
        self.table
            .iter()
            .enumerate()
            .filter(|(_, &g)| g)
            .fold(0, |acc, (i, _)| acc | (1 << i))
    }
}

fn check_pair(p1: &JointPmf, p0: &JointPmf) -> Result<()> {
    if p1.hypothesis() != Hypothesis::Available || p0.hypothesis() != Hypothesis::Unavailable {
        return Err(Error::InvalidParameter {
            name: "pmfs",
            reason: "expected (available, unavailable) pmfs in that order".into(),
        });
    }
    if p1.k() != p0.k() {
        return Err(Error::DimensionMismatch(format!(
            "pmfs over {} and {} nodes",
            p1.k(),
            p0.k()
        )));
    }
    Ok(())
}

/// Risk of an arbitrary table: `sum_i Gamma[i] w (1-alpha) P0[i] + (1-Gamma[i]) alpha P1[i]`.
pub fn rule_risk(stats: &IndicatorStats, table: &[bool], p1: &JointPmf, p0: &JointPmf) -> f64 {
    let fa = stats.false_alarm_cost();
    let miss = stats.miss_cost();
    table
        .iter()
        .zip(p1.values().iter().zip(p0.values()))
        .map(|(&g, (&a, &b))| if g { fa * b } else { miss * a })
        .sum()
}

/// Likelihood-ratio test over all patterns. Ties declare, except on patterns
/// impossible under both hypotheses, which never declare (they carry no risk
/// and would otherwise declare at every alpha).
pub fn optimal_rule(stats: &IndicatorStats, p1: &JointPmf, p0: &JointPmf) -> Result<DecisionRule> {
    check_pair(p1, p0)?;
    let (alpha, w) = (stats.alpha(), stats.w());
    let table: Vec<bool> = p1
        .values()
        .iter()
        .zip(p0.values())
        .map(|(&a, &b)| (a > 0.0 || b > 0.0) && lrt_declares(alpha, w, a, b))
        .collect();
    let risk = rule_risk(stats, &table, p1, p0);
    Ok(DecisionRule {
        k: p1.k(),
        table,
        risk,
    })
}

/// `sum_i min(w (1-alpha) P0[i], alpha P1[i])` without building the table.
pub fn minimum_risk(stats: &IndicatorStats, p1: &JointPmf, p0: &JointPmf) -> f64 {
    let fa = stats.false_alarm_cost();
    let miss = stats.miss_cost();
    p1.values()
        .iter()
        .zip(p0.values())
        .map(|(&a, &b)| (fa * b).min(miss * a))
        .sum()
}

/// Joint pmf of independent nodes under one hypothesis.
pub fn product_pmf(s: Hypothesis, nodes: &[NodeStats]) -> Result<JointPmf> {
    if nodes.is_empty() {
        return Ok(JointPmf::trivial(s));
    }
    let indexer = build_indexer(nodes.len())?;
    let values = (0..indexer.len())
        .map(|i| {
            let mask = indexer.mask(i);
            nodes
                .iter()
                .enumerate()
                .map(|(n, node)| {
                    let bit = mask & (1 << n) != 0;
                    match s {
                        Hypothesis::Available => node.likelihood_available(bit),
                        Hypothesis::Unavailable => node.likelihood_unavailable(bit),
                    }
                })
                .product()
        })
        .collect();
    JointPmf::new(s, nodes.len(), values)
}

/// Both conditional pmfs of independent nodes.
pub fn product_pmfs(nodes: &[NodeStats]) -> Result<(JointPmf, JointPmf)> {
    Ok((
        product_pmf(Hypothesis::Available, nodes)?,
        product_pmf(Hypothesis::Unavailable, nodes)?,
    ))
}

/// Likelihood-ratio product of one node, oriented by correlation sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reliability {
    value: f64,
    positive: bool,
}

impl Reliability {
    pub fn value(&self) -> f64 {
        self.value
    }

    /// Correlation with the receiver indicator is nonnegative.
    pub fn is_positive(&self) -> bool {
        self.positive
    }

    /// Observation value that counts as agreement with availability.
    pub fn agreeing_bit(&self) -> bool {
        self.positive
    }
}

pub fn reliability(node: &NodeStats) -> Result<Reliability> {
    let (b, g) = (node.beta(), node.gamma());
    if b <= 0.0 || b >= 1.0 || g <= 0.0 || g >= 1.0 {
        return Err(Error::DegenerateStats(format!(
            "reliability is infinite for beta = {b}, gamma = {g}"
        )));
    }
    let delta_plus = g * b / ((1.0 - g) * (1.0 - b));
    let positive = node.skew() >= 0.0;
    let value = if positive { delta_plus } else { 1.0 / delta_plus };
    Ok(Reliability { value, positive })
}

/// Log-domain counting-style rule for conditionally independent nodes.
///
/// Declares pattern `c` iff
/// `ln alpha + sum_{agreeing i} ln M_R(i) >= ln(w (1-alpha)) + sum_{rho_i>=0} ln(gamma_i/(1-beta_i)) + sum_{rho_i<0} ln((1-gamma_i)/beta_i)`.
/// The risk is evaluated under the product pmfs.
pub fn independent_rule(stats: &IndicatorStats, nodes: &[NodeStats]) -> Result<DecisionRule> {
    if nodes.is_empty() {
        return Err(Error::InvalidParameter {
            name: "nodes",
            reason: "at least one cooperative node is required".into(),
        });
    }
    let rel: Vec<Reliability> = nodes.iter().map(reliability).collect::<Result<_>>()?;
    let offset: f64 = nodes
        .iter()
        .zip(&rel)
        .map(|(n, r)| {
            if r.positive {
                (n.gamma() / (1.0 - n.beta())).ln()
            } else {
                ((1.0 - n.gamma()) / n.beta()).ln()
            }
        })
        .sum();
    let rhs = (stats.w() * (1.0 - stats.alpha())).ln() + offset;
    let lhs_base = stats.alpha().ln();
    let indexer = build_indexer(nodes.len())?;
    let table = (0..indexer.len())
        .map(|i| {
            let mask = indexer.mask(i);
            let evidence: f64 = rel
                .iter()
                .enumerate()
                .filter(|(n, r)| (mask & (1 << n) != 0) == r.agreeing_bit())
                .map(|(_, r)| r.value.ln())
                .sum();
            // alpha = 0 or w (1 - alpha) = 0 give infinite sides; IEEE
            // comparison then matches the product-form test, ties included.
            lhs_base + evidence >= rhs
        })
        .collect::<Vec<bool>>();
    let (p1, p0) = product_pmfs(nodes)?;
    let risk = rule_risk(stats, &table, &p1, &p0);
    Ok(DecisionRule {
        k: nodes.len(),
        table,
        risk,
    })
}

/// Named shapes of a two-node fusion table (given the transmitter senses free).
///
/// Oriented forms use the literal `l_i = Co_i` when node `i` is positively
/// correlated with the receiver and `!Co_i` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TwoNodeCase {
    PassTx,
    Always0,
    /// `l_1 OR l_2`
    Or,
    /// `l_1 AND l_2`
    And,
    /// Only the literal of this node (0-based) matters.
    Single(usize),
    /// `Co_1 == Co_2`
    Equality,
    /// `Co_1 != Co_2`
    Xor,
    /// `Co_1 OR !Co_2`
    OrNot,
    /// `Co_1 AND !Co_2`
    AndNot,
    /// Any other table, as a bitmask over pattern positions.
    Other(u8),
}

impl TwoNodeCase {
    pub fn label(&self) -> String {
        match self {
            Self::PassTx => "pass_tx".into(),
            Self::Always0 => "always_0".into(),
            Self::Or => "or".into(),
            Self::And => "and".into(),
            Self::Single(n) => format!("single_{}", n + 1),
            Self::Equality => "equality".into(),
            Self::Xor => "xor".into(),
            Self::OrNot => "co1_or_not_co2".into(),
            Self::AndNot => "co1_and_not_co2".into(),
            Self::Other(bits) => format!("other_{bits:04b}"),
        }
    }

    /// Reads the case off a table in canonical two-node order
    /// `(0,0), (1,0), (0,1), (1,1)`.
    pub fn classify(table: &[bool], positive: [bool; 2]) -> Self {
        assert_eq!(table.len(), 4, "two-node table has four entries");
        let f = |c1: bool, c2: bool| table[usize::from(c1) + 2 * usize::from(c2)];
        let matches = |g: &dyn Fn(bool, bool) -> bool| {
            [(false, false), (true, false), (false, true), (true, true)]
                .iter()
                .all(|&(a, b)| f(a, b) == g(a, b))
        };
        let l1 = |c1: bool| c1 == positive[0];
        let l2 = |c2: bool| c2 == positive[1];
        if table.iter().all(|&g| g) {
            Self::PassTx
        } else if table.iter().all(|&g| !g) {
            Self::Always0
        } else if matches(&|a, b| l1(a) || l2(b)) {
            Self::Or
        } else if matches(&|a, b| l1(a) && l2(b)) {
            Self::And
        } else if matches(&|a, _| l1(a)) {
            Self::Single(0)
        } else if matches(&|_, b| l2(b)) {
            Self::Single(1)
        } else if matches(&|a, b| a == b) {
            Self::Equality
        } else if matches(&|a, b| a != b) {
            Self::Xor
        } else if matches(&|a, b| a || !b) {
            Self::OrNot
        } else if matches(&|a, b| a && !b) {
            Self::AndNot
        } else {
            let bits = table
                .iter()
                .enumerate()
                .filter(|(_, &g)| g)
                .fold(0u8, |acc, (i, _)| acc | (1 << i));
            Self::Other(bits)
        }
    }
}

/// Optimal rule for two conditionally independent nodes plus its case label.
pub fn two_node_independent(
    stats: &IndicatorStats,
    n1: &NodeStats,
    n2: &NodeStats,
) -> Result<(DecisionRule, TwoNodeCase)> {
    let (p1, p0) = product_pmfs(&[*n1, *n2])?;
    let rule = optimal_rule(stats, &p1, &p0)?;
    let case = TwoNodeCase::classify(rule.table(), [n1.skew() >= 0.0, n2.skew() >= 0.0]);
    Ok((rule, case))
}

/// Two nodes whose indicators are correlated when the receiver is busy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoNodeCorr {
    n1: NodeStats,
    n2: NodeStats,
    rho12: f64,
}

impl TwoNodeCorr {
    pub fn new(n1: NodeStats, n2: NodeStats, rho12: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&rho12) {
            return Err(Error::InvalidParameter {
                name: "rho12",
                reason: format!("{rho12} is not a correlation coefficient"),
            });
        }
        Ok(Self { n1, n2, rho12 })
    }

    /// Symmetric error rates: `beta_i = gamma_i`.
    pub fn symmetric(b1: f64, b2: f64, rho12: f64) -> Result<Self> {
        Self::new(NodeStats::new(b1, b1)?, NodeStats::new(b2, b2)?, rho12)
    }

    pub fn nodes(&self) -> [NodeStats; 2] {
        [self.n1, self.n2]
    }

    pub fn rho12(&self) -> f64 {
        self.rho12
    }

    /// `Delta = sqrt(g1 g2 (1-g1)(1-g2)) rho12`.
    pub fn delta(&self) -> f64 {
        let (g1, g2) = (self.n1.gamma(), self.n2.gamma());
        (g1 * g2 * (1.0 - g1) * (1.0 - g2)).sqrt() * self.rho12
    }

    /// `-(1-b1)(1-b2)`, the lower bound in the symmetric scenario.
    pub fn delta_min(&self) -> f64 {
        -(1.0 - self.n1.beta()) * (1.0 - self.n2.beta())
    }

    /// `(1-b1) b2`, the upper bound in the symmetric scenario.
    pub fn delta_max(&self) -> f64 {
        (1.0 - self.n1.beta()) * self.n2.beta()
    }

    /// Exact range of `Delta` keeping all four busy-state entries in `[0, 1]`.
    pub fn feasible_delta_range(&self) -> (f64, f64) {
        let (g1, g2) = (self.n1.gamma(), self.n2.gamma());
        let lo = (-(g1 * g2)).max(-(1.0 - g1) * (1.0 - g2));
        let hi = ((1.0 - g1) * g2).min(g1 * (1.0 - g2));
        (lo, hi)
    }

    /// Free-state pmf: independent product.
    pub fn p1(&self) -> Result<JointPmf> {
        product_pmf(Hypothesis::Available, &[self.n1, self.n2])
    }

    /// Busy-state pmf rebuilt from the marginals and the shifted tail mass.
    pub fn p0(&self) -> Result<JointPmf> {
        let (g1, g2) = (self.n1.gamma(), self.n2.gamma());
        let q = MarginalSet::new(Hypothesis::Unavailable, 1, 2, vec![1.0, g1, g2])?;
        complete_joint(&q, g1 * g2 + self.delta())
    }
}

/// Optimal rule for two correlated nodes plus its case label.
pub fn two_node_correlated(
    stats: &IndicatorStats,
    tc: &TwoNodeCorr,
) -> Result<(DecisionRule, TwoNodeCase)> {
    let p1 = tc.p1()?;
    let p0 = tc.p0()?;
    let rule = optimal_rule(stats, &p1, &p0)?;
    let case = TwoNodeCase::classify(rule.table(), [tc.n1.skew() >= 0.0, tc.n2.skew() >= 0.0]);
    Ok((rule, case))
}

/// Per-pattern switching points `alpha^C_i = w P0[i] / (P1[i] + w P0[i])`;
/// `None` for patterns impossible under both hypotheses.
pub fn alpha_thresholds(w: f64, p1: &JointPmf, p0: &JointPmf) -> Result<Vec<Option<f64>>> {
    check_pair(p1, p0)?;
    Ok(p1
        .values()
        .iter()
        .zip(p0.values())
        .map(|(&a, &b)| {
            let den = a + w * b;
            (den > 0.0).then(|| w * b / den)
        })
        .collect())
}

/// Smallest alpha at which the optimal rule declares any pattern:
/// `w / (w + max_i P1[i]/P0[i])`.
pub fn critical_alpha(w: f64, p1: &JointPmf, p0: &JointPmf) -> Result<f64> {
    check_pair(p1, p0)?;
    let mut lambda_max: f64 = 0.0;
    for (&a, &b) in p1.values().iter().zip(p0.values()) {
        if b == 0.0 {
            if a > 0.0 {
                return Ok(0.0);
            }
        } else {
            lambda_max = lambda_max.max(a / b);
        }
    }
    if w == 0.0 {
        return Ok(0.0);
    }
    Ok(w / (w + lambda_max))
}

/// Critical boundary with no cooperative node.
pub fn critical_alpha_alone(w: f64) -> f64 {
    let p1 = JointPmf::trivial(Hypothesis::Available);
    let p0 = JointPmf::trivial(Hypothesis::Unavailable);
    critical_alpha(w, &p1, &p0).expect("trivial pmfs are consistent")
}

/// Pattern bits for a two-node position, exposed for labelling output.
pub fn two_node_pattern(indexer: &SubsetIndexer, pos: usize) -> (bool, bool) {
    let bits = indexer.pattern(pos);
    (bits[0], bits[1])
}
