//! Python bindings: the `crn_sense` extension module.
//!
//! Pmfs cross the boundary as flat lists in the library's pattern order
//! (see `pattern_masks`). Library errors surface as `ValueError`.

use std::collections::HashMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use crn_sense::coop_single::{self, NodeStats, SingleCoopKind};
use crn_sense::fusion;
use crn_sense::geo::{self, Point, Polar, PowerModel, Scene};
use crn_sense::harness::{self, ExperimentConfig};
use crn_sense::indicators::{self, IndicatorStats, ObservationHistory};
use crn_sense::pmf_algebra::{self, Hypothesis, JointPmf, MarginalSet};
use crn_sense::robust::{self, RobustProblem};

fn err(e: crn_sense::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn stats(alpha: f64, w: f64) -> PyResult<IndicatorStats> {
    IndicatorStats::new(alpha, w).map_err(err)
}

fn joint(s: Hypothesis, values: Vec<f64>) -> PyResult<JointPmf> {
    let n = values.len();
    if !n.is_power_of_two() || n < 2 {
        return Err(PyValueError::new_err(format!(
            "pmf length {n} is not 2^k for k >= 1"
        )));
    }
    JointPmf::new(s, n.trailing_zeros() as usize, values).map_err(err)
}

fn pair(p1: Vec<f64>, p0: Vec<f64>) -> PyResult<(JointPmf, JointPmf)> {
    Ok((
        joint(Hypothesis::Available, p1)?,
        joint(Hypothesis::Unavailable, p0)?,
    ))
}

fn scene(ps: Option<(f64, f64)>) -> Scene {
    Scene::open(ps.map(|(x, y)| Point::new(x, y)))
}

/// Node bitmask of every pattern position for `k` nodes.
#[pyfunction]
fn pattern_masks(k: usize) -> PyResult<Vec<u32>> {
    Ok(pmf_algebra::build_indexer(k).map_err(err)?.masks().to_vec())
}

#[pyfunction]
fn laplace_estimate(history: Vec<bool>) -> f64 {
    indicators::laplace_estimate(&ObservationHistory::new(history))
}

#[pyfunction]
fn inference_risk(alpha: f64, w: f64) -> PyResult<f64> {
    Ok(indicators::inference_rule(&stats(alpha, w)?).risk)
}

#[pyfunction]
fn traditional_risk(alpha: f64, w: f64) -> PyResult<f64> {
    Ok(indicators::traditional_risk(&stats(alpha, w)?))
}

#[pyfunction]
fn critical_alpha_alone(w: f64) -> f64 {
    fusion::critical_alpha_alone(w)
}

#[pyfunction]
fn correlation(alpha: f64, beta: f64, gamma: f64) -> PyResult<f64> {
    coop_single::correlation(alpha, &NodeStats::new(beta, gamma).map_err(err)?).map_err(err)
}

/// `(kind, alpha1, alpha2)` of the single-node rule.
#[pyfunction]
fn single_coop_rule(alpha: f64, w: f64, beta: f64, gamma: f64) -> PyResult<(String, f64, f64)> {
    let node = NodeStats::new(beta, gamma).map_err(err)?;
    let rule = coop_single::single_coop_rule(&stats(alpha, w)?, &node);
    let kind = match rule.kind {
        SingleCoopKind::Always0 => "always_0",
        SingleCoopKind::PassTx => "pass_tx",
        SingleCoopKind::TxAndCo => "tx_and_co",
        SingleCoopKind::TxAndNotCo => "tx_and_not_co",
    };
    Ok((kind.into(), rule.alpha1, rule.alpha2))
}

/// `(table, risk)` of the likelihood-ratio fusion rule.
#[pyfunction]
fn optimal_rule(alpha: f64, w: f64, p1: Vec<f64>, p0: Vec<f64>) -> PyResult<(Vec<bool>, f64)> {
    let (p1, p0) = pair(p1, p0)?;
    let rule = fusion::optimal_rule(&stats(alpha, w)?, &p1, &p0).map_err(err)?;
    Ok((rule.table().to_vec(), rule.risk()))
}

#[pyfunction]
fn critical_alpha(w: f64, p1: Vec<f64>, p0: Vec<f64>) -> PyResult<f64> {
    let (p1, p0) = pair(p1, p0)?;
    fusion::critical_alpha(w, &p1, &p0).map_err(err)
}

/// Marginals of order `order`; `hypothesis` is 1 (available) or 0.
#[pyfunction]
fn joint_to_marginals(values: Vec<f64>, hypothesis: u8, order: usize) -> PyResult<Vec<f64>> {
    let s = Hypothesis::from_bit(hypothesis).map_err(err)?;
    let q = pmf_algebra::joint_to_marginals(&joint(s, values)?, order).map_err(err)?;
    Ok(q.values().to_vec())
}

/// Joint pmf from marginals of order `k - 1` and the tail mass.
#[pyfunction]
fn complete_joint(marginals: Vec<f64>, hypothesis: u8, k: usize, tail: f64) -> PyResult<Vec<f64>> {
    let s = Hypothesis::from_bit(hypothesis).map_err(err)?;
    if k == 0 {
        return Err(PyValueError::new_err("k must be at least 1"));
    }
    let q = MarginalSet::new(s, k - 1, k, marginals).map_err(err)?;
    Ok(pmf_algebra::complete_joint(&q, tail).map_err(err)?.values().to_vec())
}

/// Worst-case risk when only marginals up to `k_known` of the pair are known.
#[pyfunction]
fn robust_risk(alpha: f64, w: f64, p1: Vec<f64>, p0: Vec<f64>, k_known: usize) -> PyResult<f64> {
    let (p1, p0) = pair(p1, p0)?;
    let prob = RobustProblem::from_joint(stats(alpha, w)?, &p1, &p0, k_known).map_err(err)?;
    Ok(robust::solve_robust(&prob).map_err(err)?.objective)
}

/// `Pr(rx free | tx free)` under the default power model, transmitter at the origin.
#[pyfunction]
#[pyo3(signature = (r, theta, ps=None))]
fn alpha_from_geometry(r: f64, theta: f64, ps: Option<(f64, f64)>) -> f64 {
    geo::alpha_from_geometry(Polar::new(r, theta), &scene(ps), &PowerModel::fig4())
}

#[pyfunction]
fn coverage_radius(w: f64) -> f64 {
    geo::coverage_radius(&PowerModel::fig4(), w)
}

/// Table name to headed CSV text, and the ordered summary pairs.
type ExperimentOutput = (HashMap<String, String>, Vec<(String, String)>);

/// Runs an experiment from a JSON config.
#[pyfunction]
fn run_experiment(py: Python<'_>, config_json: &str) -> PyResult<ExperimentOutput> {
    let cfg = ExperimentConfig::from_json(config_json).map_err(err)?;
    let report = py
        .detach(|| harness::run_experiment(&cfg))
        .map_err(err)?;
    let tables = report
        .tables
        .iter()
        .filter_map(|t| Some((t.name.clone(), report.csv(&t.name)?)))
        .collect();
    Ok((tables, report.summary.clone()))
}

#[pymodule]
#[pyo3(name = "crn_sense")]
fn crn_sense_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(pattern_masks, m)?)?;
    m.add_function(wrap_pyfunction!(laplace_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(inference_risk, m)?)?;
    m.add_function(wrap_pyfunction!(traditional_risk, m)?)?;
    m.add_function(wrap_pyfunction!(critical_alpha_alone, m)?)?;
    m.add_function(wrap_pyfunction!(correlation, m)?)?;
    m.add_function(wrap_pyfunction!(single_coop_rule, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_rule, m)?)?;
    m.add_function(wrap_pyfunction!(critical_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(joint_to_marginals, m)?)?;
    m.add_function(wrap_pyfunction!(complete_joint, m)?)?;
    m.add_function(wrap_pyfunction!(robust_risk, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_from_geometry, m)?)?;
    m.add_function(wrap_pyfunction!(coverage_radius, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
