//! Indicator model of link availability without cooperation.
//!
//! A link is available when both ends see free spectrum. The transmitter only
//! observes its own indicator, so availability at the receiver is predicted
//! from the prior `alpha = Pr(rx = 1 | tx = 1)` under a Bayesian risk that
//! weights false alarms by `w` and missed detections by one.

use crate::error::{check_probability, Error, Result};

/// Link availability is the AND of the transmitter and receiver indicators.
pub fn link_availability(tx: bool, rx: bool) -> bool {
    tx && rx
}

/// Likelihood-ratio test in product form: declare the link available when
/// `alpha * p1 >= w * (1 - alpha) * p0`. Ties declare availability.
///
/// Every decision rule in the crate goes through this comparison so that
/// threshold behaviour is identical across modules.
#[inline]
pub fn lrt_declares(alpha: f64, w: f64, p1: f64, p0: f64) -> bool {
    alpha * p1 >= w * (1.0 - alpha) * p0
}

/// Weighting factor implied by an outage budget `zeta`: `w = (1 - zeta) / zeta`.
pub fn weight_from_outage(zeta: f64) -> Result<f64> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "zeta",
            reason: format!("outage budget {zeta} must lie in (0, 1)"),
        });
    }
    Ok((1.0 - zeta) / zeta)
}

/// Prior availability at the receiver and the false-alarm weighting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicatorStats {
    alpha: f64,
    w: f64,
}

impl IndicatorStats {
    pub fn new(alpha: f64, w: f64) -> Result<Self> {
        check_probability("alpha", alpha)?;
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "w",
                reason: format!("weighting factor {w} must be finite and nonnegative"),
            });
        }
        Ok(Self { alpha, w })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    /// Same weighting, different prior.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(alpha, self.w)
    }

    /// Cost of declaring the link available in every state: `w (1 - alpha)`.
    pub fn false_alarm_cost(&self) -> f64 {
        self.w * (1.0 - self.alpha)
    }

    /// Cost of never declaring the link available: `alpha`.
    pub fn miss_cost(&self) -> f64 {
        self.alpha
    }
}

/// Past receiver indicators `1^Rx[n-1], ..., 1^Rx[n-L]` seen by the transmitter.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObservationHistory {
    bits: Vec<bool>,
}

impl ObservationHistory {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Parses 0/1 values; anything else is rejected.
    pub fn from_binary(values: &[u8]) -> Result<Self> {
        let bits = values
            .iter()
            .map(|&v| match v {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::InvalidParameter {
                    name: "history",
                    reason: format!("observation {other} is not binary"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { bits })
    }

    pub fn depth(&self) -> usize {
        self.bits.len()
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

/// Laplace rule of succession, `(N + 1) / (L + 2)`.
pub fn laplace_estimate(hist: &ObservationHistory) -> f64 {
    laplace_from_counts(hist.ones(), hist.depth())
}

pub(crate) fn laplace_from_counts(ones: usize, depth: usize) -> f64 {
    (ones as f64 + 1.0) / (depth as f64 + 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    /// Never forward, whatever the transmitter senses.
    Always0,
    /// Forward whenever the transmitter senses the spectrum free.
    PassTx,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkDecision {
    pub kind: RuleKind,
    pub risk: f64,
}

/// Bayes-optimal rule with no observation of the receiver.
pub fn inference_rule(stats: &IndicatorStats) -> LinkDecision {
    let kind = if lrt_declares(stats.alpha, stats.w, 1.0, 1.0) {
        RuleKind::PassTx
    } else {
        RuleKind::Always0
    };
    LinkDecision {
        kind,
        risk: decision_risk(stats, kind),
    }
}

/// Risk of a fixed rule evaluated at the true prior.
pub fn decision_risk(stats: &IndicatorStats, kind: RuleKind) -> f64 {
    match kind {
        RuleKind::PassTx => stats.false_alarm_cost(),
        RuleKind::Always0 => stats.miss_cost(),
    }
}

/// Risk of trusting the transmitter's own sensing (`P_F = 1`, `P_M = 0`).
pub fn traditional_risk(stats: &IndicatorStats) -> f64 {
    stats.false_alarm_cost()
}

/// Rule chosen from the Laplace estimate of a history, with `w` from `stats`.
pub fn plugin_rule(hist: &ObservationHistory, w: f64) -> RuleKind {
    let estimate = laplace_estimate(hist);
    if lrt_declares(estimate, w, 1.0, 1.0) {
        RuleKind::PassTx
    } else {
        RuleKind::Always0
    }
}

/// Expected risk of the plug-in rule over `depth` i.i.d. Bernoulli(alpha)
/// observations, computed exactly with binomial weights.
pub fn expected_plugin_risk(stats: &IndicatorStats, depth: usize) -> f64 {
    let pass = decision_risk(stats, RuleKind::PassTx);
    let block = decision_risk(stats, RuleKind::Always0);
    binomial_pmf(depth, stats.alpha)
        .into_iter()
        .enumerate()
        .map(|(ones, weight)| {
            let estimate = laplace_from_counts(ones, depth);
            if lrt_declares(estimate, stats.w, 1.0, 1.0) {
                weight * pass
            } else {
                weight * block
            }
        })
        .sum()
}

fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    // Recurrence on C(n, k) p^k q^(n-k); the degenerate ends are exact.
    if p <= 0.0 {
        let mut out = vec![0.0; n + 1];
        out[0] = 1.0;
        return out;
    }
    if p >= 1.0 {
        let mut out = vec![0.0; n + 1];
        out[n] = 1.0;
        return out;
    }
    let q = 1.0 - p;
    let mut out = Vec::with_capacity(n + 1);
    let mut term = q.powi(n as i32);
    out.push(term);
    for k in 1..=n {
        term *= (n - k + 1) as f64 / k as f64 * p / q;
        out.push(term);
    }
    out
}
