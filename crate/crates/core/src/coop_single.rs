//! One cooperative node: its detection statistics, the correlation of its
//! indicator with the receiver's, and the resulting four-way fusion rule.

use crate::error::{check_probability, Error, Result};
use crate::indicators::{inference_rule, lrt_declares, IndicatorStats, RuleKind};

/// `beta = Pr(co = 1 | rx = 1, tx = 1)`, `gamma = Pr(co = 0 | rx = 0, tx = 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeStats {
    beta: f64,
    gamma: f64,
}

impl NodeStats {
    pub fn new(beta: f64, gamma: f64) -> Result<Self> {
        check_probability("beta", beta)?;
        check_probability("gamma", gamma)?;
        Ok(Self { beta, gamma })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `Pr(co = bit | rx = 1, tx = 1)`.
    pub fn likelihood_available(&self, co: bool) -> f64 {
        if co {
            self.beta
        } else {
            1.0 - self.beta
        }
    }

    /// `Pr(co = bit | rx = 0, tx = 1)`.
    pub fn likelihood_unavailable(&self, co: bool) -> f64 {
        if co {
            1.0 - self.gamma
        } else {
            self.gamma
        }
    }

    /// `beta + gamma - 1`; its sign is the sign of the correlation.
    pub fn skew(&self) -> f64 {
        self.beta + self.gamma - 1.0
    }
}

/// Correlation coefficient between the cooperative and receiver indicators.
pub fn correlation(alpha: f64, node: &NodeStats) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::DegenerateStats(format!(
            "correlation undefined at alpha = {alpha}"
        )));
    }
    let (b, g) = (node.beta, node.gamma);
    let co_on = alpha * b + (1.0 - alpha) * (1.0 - g);
    let co_off = alpha * (1.0 - b) + (1.0 - alpha) * g;
    if co_on <= 0.0 || co_off <= 0.0 {
        return Err(Error::DegenerateStats(format!(
            "cooperative indicator is constant for beta = {b}, gamma = {g}"
        )));
    }
    Ok((alpha * (1.0 - alpha)).sqrt() * node.skew() / (co_on * co_off).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SingleCoopKind {
    Always0,
    PassTx,
    /// `1^Tx * 1^Co`
    TxAndCo,
    /// `1^Tx * (1 - 1^Co)`
    TxAndNotCo,
}

impl From<RuleKind> for SingleCoopKind {
    fn from(kind: RuleKind) -> Self {
        match kind {
            RuleKind::Always0 => SingleCoopKind::Always0,
            RuleKind::PassTx => SingleCoopKind::PassTx,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleCoopRule {
    pub kind: SingleCoopKind,
    /// `w gamma / (1 - beta + w gamma)`: threshold for declaring on `co = 0`.
    pub alpha1: f64,
    /// `w (1 - gamma) / (beta + w (1 - gamma))`: threshold for declaring on `co = 1`.
    pub alpha2: f64,
}

impl SingleCoopRule {
    /// Link estimate for the given transmitter and cooperative indicators.
    pub fn decide(&self, tx: bool, co: bool) -> bool {
        tx && match self.kind {
            SingleCoopKind::Always0 => false,
            SingleCoopKind::PassTx => true,
            SingleCoopKind::TxAndCo => co,
            SingleCoopKind::TxAndNotCo => !co,
        }
    }

    /// Decisions for `co = 0` and `co = 1` when the transmitter senses free spectrum.
    pub fn table(&self) -> [bool; 2] {
        [self.decide(true, false), self.decide(true, true)]
    }

    /// Bayesian risk of this rule under `stats` and `node`.
    pub fn risk(&self, stats: &IndicatorStats, node: &NodeStats) -> f64 {
        [false, true]
            .into_iter()
            .map(|co| {
                if self.decide(true, co) {
                    stats.false_alarm_cost() * node.likelihood_unavailable(co)
                } else {
                    stats.miss_cost() * node.likelihood_available(co)
                }
            })
            .sum()
    }
}

fn thresholds(w: f64, node: &NodeStats) -> (f64, f64) {
    let (b, g) = (node.beta, node.gamma);
    let alpha1 = w * g / (1.0 - b + w * g);
    let alpha2 = w * (1.0 - g) / (b + w * (1.0 - g));
    (alpha1, alpha2)
}

/// Four-case rule for one cooperative node.
///
/// At `alpha == max(alpha1, alpha2)` the rule passes `1^Tx`; at
/// `alpha == min(alpha1, alpha2)` it blocks. An uncorrelated node falls back
/// to the no-cooperation rule.
pub fn single_coop_rule(stats: &IndicatorStats, node: &NodeStats) -> SingleCoopRule {
    let (alpha1, alpha2) = thresholds(stats.w(), node);
    let alpha = stats.alpha();
    let skew = node.skew();
    let kind = if skew == 0.0 {
        inference_rule(stats).kind.into()
    } else if alpha >= alpha1.max(alpha2) {
        SingleCoopKind::PassTx
    } else if alpha <= alpha1.min(alpha2) {
        SingleCoopKind::Always0
    } else if skew > 0.0 {
        SingleCoopKind::TxAndCo
    } else {
        SingleCoopKind::TxAndNotCo
    };
    SingleCoopRule {
        kind,
        alpha1,
        alpha2,
    }
}

/// Same rule derived directly from the per-outcome likelihood-ratio tests,
/// with ties declaring availability.
pub fn single_coop_lrt(stats: &IndicatorStats, node: &NodeStats) -> SingleCoopRule {
    let (alpha1, alpha2) = thresholds(stats.w(), node);
    let (a, w) = (stats.alpha(), stats.w());
    let on = lrt_declares(a, w, node.likelihood_available(true), node.likelihood_unavailable(true));
    let off = lrt_declares(a, w, node.likelihood_available(false), node.likelihood_unavailable(false));
    let kind = match (off, on) {
        (true, true) => SingleCoopKind::PassTx,
        (false, true) => SingleCoopKind::TxAndCo,
        (true, false) => SingleCoopKind::TxAndNotCo,
        (false, false) => SingleCoopKind::Always0,
    };
    SingleCoopRule {
        kind,
        alpha1,
        alpha2,
    }
}

/// Correlation level below which a node is ignored under the minimum error
/// probability criterion (`w = 1`).
pub fn psi(node: &NodeStats) -> f64 {
    let (b, g) = (node.beta, node.gamma);
    let agree = b * g + (1.0 - b) * (1.0 - g);
    if agree <= 0.0 {
        return 0.0;
    }
    (node.skew() / (2.0 * agree).sqrt()).abs()
}

/// Minimum error probability rule (`w = 1`): use the node only when
/// `|rho| > psi`, otherwise fall back to `1[alpha >= 1/2] 1^Tx`.
pub fn min_error_rule(alpha: f64, node: &NodeStats) -> Result<SingleCoopRule> {
    let stats = IndicatorStats::new(alpha, 1.0)?;
    let (alpha1, alpha2) = thresholds(1.0, node);
    let fallback = if alpha >= 0.5 {
        SingleCoopKind::PassTx
    } else {
        SingleCoopKind::Always0
    };
    let kind = if node.skew() == 0.0 || alpha <= 0.0 || alpha >= 1.0 {
        fallback
    } else {
        let rho = correlation(stats.alpha(), node)?;
        if rho.abs() <= psi(node) {
            fallback
        } else if rho > 0.0 {
            SingleCoopKind::TxAndCo
        } else {
            SingleCoopKind::TxAndNotCo
        }
    };
    Ok(SingleCoopRule {
        kind,
        alpha1,
        alpha2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(b: f64, g: f64) -> NodeStats {
        NodeStats::new(b, g).unwrap()
    }

    #[test]
    fn correlation_examples() {
        assert_eq!(correlation(0.3, &node(0.8, 0.2)).unwrap(), 0.0);
        assert!((correlation(0.5, &node(0.75, 0.75)).unwrap() - 0.5).abs() < 1e-15);
        assert!((correlation(0.5, &node(0.25, 0.25)).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn correlation_degenerate() {
        assert!(matches!(
            correlation(0.0, &node(0.8, 0.7)),
            Err(Error::DegenerateStats(_))
        ));
        assert!(matches!(
            correlation(1.0, &node(0.8, 0.7)),
            Err(Error::DegenerateStats(_))
        ));
        assert!(matches!(
            correlation(0.5, &node(1.0, 0.0)),
            Err(Error::DegenerateStats(_))
        ));
    }

    #[test]
    fn independent_node_degenerates() {
        for i in 1..100 {
            let alpha = i as f64 / 100.0;
            let s = IndicatorStats::new(alpha, 1.0).unwrap();
            let r = single_coop_rule(&s, &node(0.8, 0.2));
            let want = if alpha >= 0.5 {
                SingleCoopKind::PassTx
            } else {
                SingleCoopKind::Always0
            };
            assert_eq!(r.kind, want, "alpha={alpha}");
        }
        let r = single_coop_rule(&IndicatorStats::new(0.5, 1.0).unwrap(), &node(0.8, 0.2));
        assert!((r.alpha1 - 0.5).abs() < 1e-12 && (r.alpha2 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn four_case_examples() {
        let n = node(0.9, 0.8);
        let r = single_coop_rule(&IndicatorStats::new(0.8, 9.0).unwrap(), &n);
        assert_eq!(r.kind, SingleCoopKind::TxAndCo);
        // alpha1 = 7.2 / 7.3, alpha2 = 1.8 / 2.7
        assert!((r.alpha1 - 7.2 / 7.3).abs() < 1e-12);
        assert!((r.alpha2 - 2.0 / 3.0).abs() < 1e-12);
        let r = single_coop_rule(&IndicatorStats::new(0.5, 9.0).unwrap(), &n);
        assert_eq!(r.kind, SingleCoopKind::Always0);
        let r = single_coop_rule(&IndicatorStats::new(0.99, 9.0).unwrap(), &n);
        assert_eq!(r.kind, SingleCoopKind::PassTx);
        let r = single_coop_rule(&IndicatorStats::new(0.5, 1.0).unwrap(), &node(0.2, 0.3));
        assert_eq!(r.kind, SingleCoopKind::TxAndNotCo);
    }

    #[test]
    fn boundary_placement() {
        let n = node(0.9, 0.8);
        let (a1, a2) = thresholds(9.0, &n);
        let hi = single_coop_rule(&IndicatorStats::new(a1, 9.0).unwrap(), &n);
        assert_eq!(hi.kind, SingleCoopKind::PassTx);
        let lo = single_coop_rule(&IndicatorStats::new(a2, 9.0).unwrap(), &n);
        assert_eq!(lo.kind, SingleCoopKind::Always0);
    }

    #[test]
    fn psi_examples() {
        assert!((psi(&node(0.75, 0.75)) - 0.5 / 1.25f64.sqrt()).abs() < 1e-15);
        assert!((psi(&node(0.75, 0.75)) - 0.447213595499958).abs() < 1e-12);
        assert_eq!(psi(&node(0.8, 0.2)), 0.0);
        assert_eq!(
            min_error_rule(0.3, &node(0.8, 0.2)).unwrap().kind,
            SingleCoopKind::Always0
        );
        assert_eq!(
            min_error_rule(0.5, &node(0.75, 0.75)).unwrap().kind,
            SingleCoopKind::TxAndCo
        );
    }

    #[test]
    fn rule_risk_matches_lrt_minimum() {
        let s = IndicatorStats::new(0.6, 1.0).unwrap();
        let n = node(0.8, 0.7);
        let r = single_coop_rule(&s, &n);
        assert_eq!(r.kind, SingleCoopKind::TxAndCo);
        assert!((r.risk(&s, &n) - 0.24).abs() < 1e-12);
    }

    #[test]
    fn decide_requires_tx() {
        let r = SingleCoopRule {
            kind: SingleCoopKind::PassTx,
            alpha1: 0.0,
            alpha2: 0.0,
        };
        assert!(!r.decide(false, true));
        assert!(r.decide(true, false));
    }
}
