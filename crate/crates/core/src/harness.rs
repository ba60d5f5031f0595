//! Experiment drivers, configuration and report plumbing.
//!
//! Every driver takes an [`ExperimentConfig`], fills in the defaults of the
//! experiment, and returns a [`RunReport`] whose CSV tables carry the fully
//! resolved configuration in a `#` header block. CSV bytes depend only on
//! the configuration and seed; wall time is kept out of them.

pub mod mc;
pub mod scenario;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coop_single::{single_coop_rule, NodeStats};
use crate::error::{Error, Result};
use crate::fusion::{
    critical_alpha, critical_alpha_alone, optimal_rule, product_pmfs, two_node_correlated,
    TwoNodeCorr,
};
use crate::geo::{
    connectivity, coverage_radius, neighborhood, select_cooperative_node, AngularMask, CrNode,
    NeighborhoodMap, Point, PolarGrid, PowerModel, RuleConfig, Scene,
};
use crate::indicators::{
    expected_plugin_risk, inference_rule, plugin_rule, decision_risk, traditional_risk,
    IndicatorStats, ObservationHistory,
};
use crate::pmf_algebra::{Hypothesis, JointPmf};
use crate::robust::{independence_risk, solve_robust, RobustProblem};

pub use scenario::{CorrelatedScenario, ScenarioPmfs};

pub const DEFAULT_SEED: u64 = 20261015;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentId {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Custom,
}

impl ExperimentId {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Fig5 => "fig5",
            Self::Fig6 => "fig6",
            Self::Fig7 => "fig7",
            Self::Custom => "custom",
        }
    }
}

/// One experiment run. Absent fields take the experiment's defaults; fields
/// an experiment does not read are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    /// Observation depth `L` of the plug-in rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_trials: Option<usize>,
    /// `(beta, gamma)` per cooperative node.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho12: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<CorrelatedScenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_known: Option<Vec<usize>>,
    /// Joint pmf CSV files `[available, unavailable]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pmf_files: Option<[PathBuf; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<PowerModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<PolarGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<AngularMask>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<Scene>,
    /// PS positions to sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ps: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_tx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<Vec<f64>>,
    /// Cooperative node positions (candidates in the neighborhood sweeps).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cooperative: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radios: Option<Vec<CrNode>>,
    /// PS position for the connectivity example.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_ps: Option<Point>,
}

fn config_error(reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: "config",
        reason: reason.into(),
    }
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId) -> Self {
        Self {
            experiment,
            seed: None,
            output: None,
            w: None,
            depth: None,
            alpha_step: None,
            mc_trials: None,
            nodes: None,
            rho12: None,
            scenario: None,
            k_known: None,
            pmf_files: None,
            model: None,
            grid: None,
            mask: None,
            scene: None,
            ps: None,
            b_tx: None,
            kappa: None,
            cooperative: None,
            radios: None,
            link_ps: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| config_error(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn seed_or_default(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    fn alpha_grid(&self) -> Result<Vec<f64>> {
        let step = self.alpha_step.unwrap_or(0.01);
        if !(step > 0.0 && step <= 1.0) {
            return Err(config_error(format!("alpha_step {step} outside (0, 1]")));
        }
        let n = (1.0 / step).round() as usize;
        if ((n as f64) * step - 1.0).abs() > 1e-9 {
            return Err(config_error(format!("alpha_step {step} does not divide 1")));
        }
        Ok((0..=n).map(|i| i as f64 / n as f64).collect())
    }

    fn node_stats(&self) -> Result<Vec<NodeStats>> {
        self.nodes
            .as_deref()
            .unwrap_or_default()
            .iter()
            .map(|&[b, g]| NodeStats::new(b, g))
            .collect()
    }
}

/// How a table is drawn by the optional gnuplot script.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Column 1 against every other column.
    Lines,
    /// One `x, y` polyline per distinct label in column 1.
    Polylines { x: usize, y: usize },
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub plot: PlotKind,
}

impl Table {
    fn new(name: impl Into<String>, columns: &[&str], plot: PlotKind) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            plot,
        }
    }

    fn with_columns(name: impl Into<String>, columns: Vec<String>, plot: PlotKind) -> Self {
        Self {
            name: name.into(),
            columns,
            rows: Vec::new(),
            plot,
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    fn gnuplot(&self) -> Option<String> {
        let file = self.file_name();
        let mut s = String::new();
        s += "set datafile separator ','\nset datafile commentschars '#'\n";
        s += &format!("set terminal pngcairo size 900,600\nset output '{}.png'\n", self.name);
        match self.plot {
            PlotKind::None => return None,
            PlotKind::Lines => {
                s += &format!("set xlabel '{}'\nset key outside\n", self.columns[0]);
                let curves: Vec<String> = (2..=self.columns.len())
                    .map(|c| {
                        format!(
                            "'{file}' skip 1 using 1:{c} with lines title '{}'",
                            self.columns[c - 1]
                        )
                    })
                    .collect();
                s += &format!("plot {}\n", curves.join(", \\\n     "));
            }
            PlotKind::Polylines { x, y } => {
                let mut labels: Vec<&str> = self.rows.iter().map(|r| r[0].as_str()).collect();
                labels.dedup();
                s += "set size ratio -1\nset key outside\n";
                s += &format!(
                    "plot for [s in \"{}\"] '{file}' skip 1 using (strcol(1) eq s ? ${} : NaN):{} with lines title s\n",
                    labels.join(" "),
                    x + 1,
                    y + 1
                );
            }
        }
        Some(s)
    }
}

/// Output of one driver.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub experiment: ExperimentId,
    pub seed: u64,
    pub wall_time: Duration,
    /// The resolved configuration, echoed into every CSV header.
    pub config: ExperimentConfig,
    pub tables: Vec<Table>,
    /// Scalar results in insertion order.
    pub summary: Vec<(String, String)>,
}

impl RunReport {
    fn new(config: ExperimentConfig) -> Self {
        Self {
            experiment: config.experiment,
            seed: config.seed_or_default(),
            wall_time: Duration::ZERO,
            config,
            tables: Vec::new(),
            summary: Vec::new(),
        }
    }

    fn note(&mut self, key: impl Into<String>, value: impl ToString) {
        self.summary.push((key.into(), value.to_string()));
    }

    fn header(&self, table: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# crn-sense {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "# experiment: {}", self.experiment.as_str());
        let _ = writeln!(s, "# table: {table}");
        let _ = writeln!(s, "# seed: {}", self.seed);
        let _ = writeln!(s, "# config: {}", self.config.to_json());
        s
    }

    /// CSV text of a table, metadata header included.
    pub fn csv(&self, name: &str) -> Option<String> {
        let t = self.tables.iter().find(|t| t.name == name)?;
        Some(self.render(t))
    }

    fn render(&self, t: &Table) -> String {
        let mut s = self.header(&t.name);
        s += &t.columns.join(",");
        s.push('\n');
        for row in &t.rows {
            s += &row.join(",");
            s.push('\n');
        }
        s
    }

    /// Summary as a `key,value` CSV with the same header block.
    pub fn summary_csv(&self) -> String {
        let name = format!("{}_summary", self.experiment.as_str());
        let mut s = self.header(&name);
        s += "key,value\n";
        for (k, v) in &self.summary {
            let _ = writeln!(s, "{k},{v}");
        }
        s
    }

    /// Writes every table, the summary and optionally gnuplot scripts into
    /// `dir`. Returns the written paths.
    pub fn write_to(&self, dir: &Path, gnuplot: bool) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for t in &self.tables {
            let path = dir.join(t.file_name());
            std::fs::write(&path, self.render(t))?;
            written.push(path);
            if gnuplot {
                if let Some(script) = t.gnuplot() {
                    let path = dir.join(format!("{}.gp", t.name));
                    std::fs::write(&path, script)?;
                    written.push(path);
                }
            }
        }
        let path = dir.join(format!("{}_summary.csv", self.experiment.as_str()));
        std::fs::write(&path, self.summary_csv())?;
        written.push(path);
        Ok(written)
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn timed(start: Instant, mut report: RunReport) -> RunReport {
    report.wall_time = start.elapsed();
    report
}

fn expect_id(config: &ExperimentConfig, id: ExperimentId) -> Result<()> {
    if config.experiment != id {
        return Err(config_error(format!(
            "config is for {}, not {}",
            config.experiment.as_str(),
            id.as_str()
        )));
    }
    Ok(())
}

/// Risk versus `alpha` without cooperation and with single cooperative nodes.
pub fn run_fig3(config: &ExperimentConfig) -> Result<RunReport> {
    let start = Instant::now();
    expect_id(config, ExperimentId::Fig3)?;
    let mut cfg = config.clone();
    cfg.seed = Some(cfg.seed_or_default());
    let w = *cfg.w.get_or_insert(9.0);
    let depth = *cfg.depth.get_or_insert(15);
    cfg.alpha_step.get_or_insert(0.01);
    let trials = *cfg.mc_trials.get_or_insert(20_000);
    cfg.nodes
        .get_or_insert_with(|| vec![[0.8, 0.2], [0.9, 0.8], [0.7, 0.6]]);
    let nodes = cfg.node_stats()?;
    let grid = cfg.alpha_grid()?;
    let seed = cfg.seed_or_default();
    if trials == 0 {
        return Err(config_error("mc_trials must be positive"));
    }

    let mut cols = vec![
        "alpha".to_string(),
        "traditional".into(),
        "known_alpha".into(),
        "plugin_exact".into(),
        "plugin_mc".into(),
        "plugin_mc_se".into(),
        "plugin_mc_lo95".into(),
        "plugin_mc_hi95".into(),
    ];
    for n in &nodes {
        cols.push(format!("coop_b{}_g{}", n.beta(), n.gamma()));
    }
    let mut table = Table::with_columns("fig3_risk", cols, PlotKind::Lines);

    let rows: Vec<Result<Vec<String>>> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let stats = IndicatorStats::new(alpha, w)?;
            // one derived seed per grid point keeps points independent
            let point_seed = mc::stream_rng(seed, i as u64).random::<u64>();
            let mc = mc::mc_mean(point_seed, trials, |rng| {
                let bits = (0..depth).map(|_| rng.random_bool(alpha)).collect();
                decision_risk(&stats, plugin_rule(&ObservationHistory::new(bits), w))
            });
            let (lo, hi) = mc.ci95();
            let mut row = vec![
                num(alpha),
                num(traditional_risk(&stats)),
                num(inference_rule(&stats).risk),
                num(expected_plugin_risk(&stats, depth)),
                num(mc.mean),
                num(mc.std_error),
                num(lo),
                num(hi),
            ];
            for n in &nodes {
                row.push(num(single_coop_rule(&stats, n).risk(&stats, n)));
            }
            Ok(row)
        })
        .collect();
    for row in rows {
        table.push(row?);
    }

    let mut report = RunReport::new(cfg);
    report.note("alpha_critical", critical_alpha_alone(w));
    report.note("depth", depth);
    report.note("mc_trials_per_alpha", trials);
    report.tables.push(table);
    Ok(timed(start, report))
}

/// Two nodes with correlated busy-state indicators, one curve per `rho12`.
pub fn run_fig6(config: &ExperimentConfig) -> Result<RunReport> {
    let start = Instant::now();
    expect_id(config, ExperimentId::Fig6)?;
    let mut cfg = config.clone();
    cfg.seed = Some(cfg.seed_or_default());
    let w = *cfg.w.get_or_insert(1.0);
    cfg.alpha_step.get_or_insert(0.01);
    cfg.nodes.get_or_insert_with(|| vec![[0.75, 0.75], [0.7, 0.7]]);
    let rhos = cfg.rho12.get_or_insert_with(|| vec![0.0, 0.4, 0.8]).clone();
    let nodes = cfg.node_stats()?;
    if nodes.len() != 2 {
        return Err(config_error("fig6 needs exactly two nodes"));
    }
    let grid = cfg.alpha_grid()?;

    let mut pairs = Vec::with_capacity(rhos.len());
    for &rho in &rhos {
        let tc = TwoNodeCorr::new(nodes[0], nodes[1], rho)?;
        // surfaces infeasible correlations before any output is produced
        tc.p0()?;
        pairs.push(tc);
    }
    let (s1, s0) = product_pmfs(&nodes[..1])?;

    let mut cols = vec!["alpha".to_string(), "no_coop".into(), "node1_only".into()];
    let mut label_cols = Vec::new();
    for rho in &rhos {
        cols.push(format!("rho_{rho}"));
        label_cols.push(format!("case_rho_{rho}"));
    }
    let mut table = Table::with_columns("fig6_risk", cols, PlotKind::Lines);
    let mut cases = Table::with_columns(
        "fig6_cases",
        std::iter::once("alpha".to_string()).chain(label_cols).collect(),
        PlotKind::None,
    );
    for &alpha in &grid {
        let stats = IndicatorStats::new(alpha, w)?;
        let mut row = vec![
            num(alpha),
            num(inference_rule(&stats).risk),
            num(optimal_rule(&stats, &s1, &s0)?.risk()),
        ];
        let mut labels = vec![num(alpha)];
        for tc in &pairs {
            let (rule, case) = two_node_correlated(&stats, tc)?;
            row.push(num(rule.risk()));
            labels.push(case.label());
        }
        table.push(row);
        cases.push(labels);
    }

    let mut report = RunReport::new(cfg);
    report.note("alpha_critical_no_coop", critical_alpha_alone(w));
    report.note("alpha_critical_node1_only", critical_alpha(w, &s1, &s0)?);
    for tc in &pairs {
        report.note(
            format!("alpha_critical_rho_{}", tc.rho12()),
            critical_alpha(w, &tc.p1()?, &tc.p0()?)?,
        );
    }
    report.tables.push(table);
    report.tables.push(cases);
    Ok(timed(start, report))
}

/// Robust risk for each known marginal order on the seeded correlated
/// scenario, with the optimal and independence-assumption baselines.
pub fn run_fig7(config: &ExperimentConfig) -> Result<RunReport> {
    expect_id(config, ExperimentId::Fig7)?;
    run_robust_sweep(config, "fig7")
}

/// Robust sweep over `alpha` and `k_known` for a scenario or pmf files.
pub fn run_robust(config: &ExperimentConfig) -> Result<RunReport> {
    run_robust_sweep(config, "robust")
}

fn run_robust_sweep(config: &ExperimentConfig, prefix: &str) -> Result<RunReport> {
    let start = Instant::now();
    let mut cfg = config.clone();
    cfg.seed = Some(cfg.seed_or_default());
    let w = *cfg.w.get_or_insert(1.0);
    cfg.alpha_step.get_or_insert(0.02);
    let (p1, p0, origin) = match &cfg.pmf_files {
        Some([f1, f0]) => (
            read_joint(f1, Hypothesis::Available)?,
            read_joint(f0, Hypothesis::Unavailable)?,
            None,
        ),
        None => {
            let seed = cfg.seed_or_default();
            let scn = cfg.scenario.get_or_insert_with(CorrelatedScenario::default);
            let out = scn.generate(seed)?;
            (out.p1.clone(), out.p0.clone(), Some(out))
        }
    };
    let k = p1.k();
    let ks = cfg.k_known.get_or_insert_with(|| (0..=k).collect()).clone();
    if let Some(&bad) = ks.iter().find(|&&m| m > k) {
        return Err(config_error(format!("k_known {bad} exceeds node count {k}")));
    }
    let grid = cfg.alpha_grid()?;

    let mut cols = vec!["alpha".to_string(), "optimal".into(), "independence".into()];
    cols.extend(ks.iter().map(|m| format!("robust_k{m}")));
    let mut table = Table::with_columns(format!("{prefix}_risk"), cols, PlotKind::Lines);

    let rows: Vec<Result<Vec<f64>>> = grid
        .par_iter()
        .map(|&alpha| {
            let stats = IndicatorStats::new(alpha, w)?;
            let mut row = vec![
                alpha,
                optimal_rule(&stats, &p1, &p0)?.risk(),
                independence_risk(&stats, &p1, &p0)?,
            ];
            for &m in &ks {
                let prob = RobustProblem::from_joint(stats, &p1, &p0, m)?;
                row.push(solve_robust(&prob)?.objective);
            }
            Ok(row)
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    for row in &rows {
        table.push(row.iter().map(|&x| num(x)).collect());
    }

    let mut report = RunReport::new(cfg);
    if let Some(out) = &origin {
        report.note("beta", join_nums(&out.beta));
        report.note("gamma", join_nums(&out.gamma));
        report.note("lambda_available", join_nums(&out.lambda1));
        report.note("lambda_unavailable", join_nums(&out.lambda0));
    }
    // Smallest order whose robust curve never exceeds the independence curve.
    let below = |j: usize| rows.iter().all(|r| r[3 + j] <= r[2]);
    let first = (0..ks.len()).find(|&j| (j..ks.len()).all(below));
    report.note(
        "min_order_at_or_below_independence",
        first.map_or("none".to_string(), |j| ks[j].to_string()),
    );
    report.tables.push(table);
    Ok(timed(start, report))
}

fn join_nums(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(" ")
}

/// Reads a joint pmf CSV, inferring the node count from the row count.
pub fn read_joint(path: &Path, s: Hypothesis) -> Result<JointPmf> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    let rows = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .count()
        .saturating_sub(1);
    if !rows.is_power_of_two() {
        return Err(Error::InvalidPmf(format!(
            "{}: {rows} rows is not a power of two",
            path.display()
        )));
    }
    JointPmf::from_csv(s, rows.trailing_zeros() as usize, &text)
}

/// Neighborhood sweep shared by the two map experiments.
struct MapRun {
    label: String,
    ps: Option<Point>,
    b_tx: f64,
    kappa: f64,
    coop: Option<Point>,
    map: NeighborhoodMap,
}

fn map_tables(prefix: &str, runs: &[MapRun], coverage_area: f64) -> (Table, Table) {
    let mut areas = Table::new(
        format!("{prefix}_areas"),
        &[
            "label", "ps_x", "ps_y", "b_tx", "kappa", "coop_x", "coop_y", "area",
            "coverage_area", "ratio",
        ],
        PlotKind::None,
    );
    let mut boundary = Table::new(
        format!("{prefix}_boundary"),
        &["label", "theta", "r", "x", "y"],
        PlotKind::Polylines { x: 3, y: 4 },
    );
    let opt = |p: Option<Point>, f: fn(&Point) -> f64| p.as_ref().map_or("".into(), |p| num(f(p)));
    for run in runs {
        let area = run.map.area();
        areas.push(vec![
            run.label.clone(),
            opt(run.ps, |p| p.x),
            opt(run.ps, |p| p.y),
            num(run.b_tx),
            num(run.kappa),
            opt(run.coop, |p| p.x),
            opt(run.coop, |p| p.y),
            num(area),
            num(coverage_area),
            num(area / coverage_area),
        ]);
        let origin = Point::new(0.0, 0.0);
        for ((theta, r), p) in run
            .map
            .theta_centers
            .iter()
            .zip(run.map.boundary_radii())
            .zip(run.map.boundary(origin))
        {
            boundary.push(vec![run.label.clone(), num(*theta), num(r), num(p.x), num(p.y)]);
        }
    }
    (areas, boundary)
}

struct MapDefaults {
    ps: Vec<Point>,
    cooperative: Vec<Point>,
    b_tx: f64,
    kappa: Vec<f64>,
}

fn run_maps(config: &ExperimentConfig, id: ExperimentId, d: MapDefaults) -> Result<RunReport> {
    let start = Instant::now();
    expect_id(config, id)?;
    let mut cfg = config.clone();
    cfg.seed = Some(cfg.seed_or_default());
    let w = *cfg.w.get_or_insert(9.0);
    let model = *cfg.model.get_or_insert_with(PowerModel::fig4);
    let grid = *cfg.grid.get_or_insert_with(PolarGrid::default);
    let ps_list = cfg.ps.get_or_insert(d.ps).clone();
    let coops = cfg.cooperative.get_or_insert(d.cooperative).clone();
    let b_tx = *cfg.b_tx.get_or_insert(d.b_tx);
    let kappas = cfg.kappa.get_or_insert(d.kappa).clone();
    let mask = cfg.mask;
    model.validate()?;

    let origin = Point::new(0.0, 0.0);
    let r_cov = coverage_radius(&model, w);
    let cover_rule = RuleConfig::new(w).with_grid(grid).with_mask(mask);
    let cover = neighborhood(&Scene::open(None), &model, &cover_rule)?;
    let coverage_area = cover.area();

    let mut report_notes = vec![
        ("coverage_radius".to_string(), num(r_cov)),
        (
            "coverage_area_closed_form".to_string(),
            num(std::f64::consts::PI * r_cov * r_cov),
        ),
        ("coverage_area_grid".to_string(), num(coverage_area)),
    ];
    let mut runs = vec![MapRun {
        label: "coverage".into(),
        ps: None,
        b_tx: 0.0,
        kappa: 1.0,
        coop: None,
        map: cover,
    }];
    for (pi, &ps) in ps_list.iter().enumerate() {
        for (ki, &kappa) in kappas.iter().enumerate() {
            let scene = Scene::new(Some(ps), origin, b_tx, kappa)?;
            let tag = if kappas.len() > 1 {
                format!("ps{pi}_k{ki}")
            } else {
                format!("ps{pi}")
            };
            let base = RuleConfig::new(w).with_grid(grid).with_mask(mask);
            runs.push(MapRun {
                label: format!("{tag}_none"),
                ps: Some(ps),
                b_tx,
                kappa,
                coop: None,
                map: neighborhood(&scene, &model, &base)?,
            });
            for (ci, &c) in coops.iter().enumerate() {
                let rule = base.clone().with_cooperative(vec![c]);
                runs.push(MapRun {
                    label: format!("{tag}_coop{ci}"),
                    ps: Some(ps),
                    b_tx,
                    kappa,
                    coop: Some(c),
                    map: neighborhood(&scene, &model, &rule)?,
                });
            }
            if !coops.is_empty() {
                let zeta = 1.0 / (w + 1.0);
                let (best, _) = select_cooperative_node(&coops, &scene, &model, zeta, grid, mask)?;
                report_notes.push((format!("{tag}_selected_coop"), best.to_string()));
            }
        }
    }
    let (areas, boundary) = map_tables(id.as_str(), &runs, coverage_area);
    let mut report = RunReport::new(cfg);
    report.summary = report_notes;
    report.tables.push(areas);
    report.tables.push(boundary);
    Ok(timed(start, report))
}

/// Neighborhood maps with and without a cooperative node for PS positions
/// near and far from the transmitter, plus the directed-link example.
pub fn run_fig4(config: &ExperimentConfig) -> Result<RunReport> {
    let start = Instant::now();
    let mut report = run_maps(
        config,
        ExperimentId::Fig4,
        MapDefaults {
            ps: vec![Point::new(0.7, 0.0), Point::new(1.7, 0.0)],
            cooperative: vec![
                Point::new(0.4, 0.3),
                Point::new(-0.3, 0.4),
                Point::new(-0.6, -0.2),
            ],
            b_tx: 0.0,
            kappa: vec![1.0],
        },
    )?;
    let cfg = &mut report.config;
    let model = cfg.model.expect("resolved");
    let w = cfg.w.expect("resolved");
    let kappa = cfg.kappa.as_ref().expect("resolved")[0];
    let radios = cfg
        .radios
        .get_or_insert_with(|| {
            vec![
                CrNode { position: Point::new(0.0, 0.0), b: 0.0 },
                CrNode { position: Point::new(1.0, 0.0), b: 0.0 },
            ]
        })
        .clone();
    let link_ps = *cfg.link_ps.get_or_insert(Point::new(1.7, 0.0));
    let helper = cfg.cooperative.as_ref().expect("resolved").first().copied();

    let mut links = Table::new(
        "fig4_links",
        &["case", "from", "to", "alpha", "alpha_c", "connected"],
        PlotKind::None,
    );
    let mut cases = vec![("none", Vec::new())];
    if let Some(h) = helper {
        cases.push(("coop0", vec![h]));
    }
    for (case, coop) in cases {
        for e in connectivity(&radios, Some(link_ps), kappa, &model, w, &coop)? {
            links.push(vec![
                case.to_string(),
                e.from.to_string(),
                e.to.to_string(),
                num(e.alpha),
                num(e.alpha_c),
                e.connected.to_string(),
            ]);
        }
    }
    report.tables.push(links);
    report.wall_time += start.elapsed();
    Ok(report)
}

/// Neighborhood shrinkage under obstacles of two sizes, with and without a
/// cooperative node on the far side.
pub fn run_fig5(config: &ExperimentConfig) -> Result<RunReport> {
    run_maps(
        config,
        ExperimentId::Fig5,
        MapDefaults {
            ps: vec![Point::new(0.5, 0.0)],
            cooperative: vec![Point::new(-0.5, 0.0)],
            b_tx: 25.0,
            kappa: vec![0.3, 0.7],
        },
    )
}

/// Risk curves for one scenario: independent nodes from `nodes`, or a joint
/// pair from `pmf_files`.
pub fn run_risk_curve(config: &ExperimentConfig) -> Result<RunReport> {
    let start = Instant::now();
    let mut cfg = config.clone();
    cfg.seed = Some(cfg.seed_or_default());
    let w = *cfg.w.get_or_insert(9.0);
    cfg.alpha_step.get_or_insert(0.01);
    let (p1, p0) = match &cfg.pmf_files {
        Some([f1, f0]) => (
            read_joint(f1, Hypothesis::Available)?,
            read_joint(f0, Hypothesis::Unavailable)?,
        ),
        None => {
            let nodes = cfg.node_stats()?;
            if nodes.is_empty() {
                return Err(config_error("risk-curve needs `nodes` or `pmf_files`"));
            }
            product_pmfs(&nodes)?
        }
    };
    let grid = cfg.alpha_grid()?;
    let mut table = Table::new(
        "risk_curve",
        &["alpha", "traditional", "known_alpha", "cooperative"],
        PlotKind::Lines,
    );
    for &alpha in &grid {
        let stats = IndicatorStats::new(alpha, w)?;
        table.push(vec![
            num(alpha),
            num(traditional_risk(&stats)),
            num(inference_rule(&stats).risk),
            num(optimal_rule(&stats, &p1, &p0)?.risk()),
        ]);
    }
    let mut report = RunReport::new(cfg);
    report.note("alpha_critical_no_coop", critical_alpha_alone(w));
    report.note("alpha_critical", critical_alpha(w, &p1, &p0)?);
    report.tables.push(table);
    Ok(timed(start, report))
}

/// Per-cell verdicts for one scene.
pub fn run_neighborhood(config: &ExperimentConfig) -> Result<RunReport> {
    let start = Instant::now();
    let mut cfg = config.clone();
    cfg.seed = Some(cfg.seed_or_default());
    let w = *cfg.w.get_or_insert(9.0);
    let model = *cfg.model.get_or_insert_with(PowerModel::fig4);
    let grid = *cfg.grid.get_or_insert_with(PolarGrid::default);
    let scene = *cfg.scene.get_or_insert_with(|| Scene::open(None));
    let coops = cfg.cooperative.get_or_insert_with(Vec::new).clone();
    let rule = RuleConfig::new(w)
        .with_grid(grid)
        .with_mask(cfg.mask)
        .with_cooperative(coops);
    let map = neighborhood(&scene, &model, &rule)?;
    let cover = neighborhood(
        &Scene::open(None),
        &model,
        &RuleConfig::new(w).with_grid(grid).with_mask(cfg.mask),
    )?;
    let mut table = Table::new(
        "neighborhood",
        &["r", "theta", "alpha", "alpha_c", "admissible"],
        PlotKind::None,
    );
    for (i, &r) in map.r_centers.iter().enumerate() {
        for (j, &theta) in map.theta_centers.iter().enumerate() {
            let k = i * map.theta_centers.len() + j;
            table.push(vec![
                num(r),
                num(theta),
                num(map.alpha[k]),
                num(map.alpha_c[k]),
                u8::from(map.admissible[k]).to_string(),
            ]);
        }
    }
    let mut report = RunReport::new(cfg);
    let (area, coverage) = (map.area(), cover.area());
    report.note("area", area);
    report.note("coverage_area", coverage);
    report.note("ratio", area / coverage);
    report.tables.push(table);
    Ok(timed(start, report))
}

/// Directed edge list for a set of radios.
pub fn run_connectivity(config: &ExperimentConfig) -> Result<RunReport> {
    let start = Instant::now();
    let mut cfg = config.clone();
    cfg.seed = Some(cfg.seed_or_default());
    let w = *cfg.w.get_or_insert(9.0);
    let model = *cfg.model.get_or_insert_with(PowerModel::fig4);
    let kappa = cfg.kappa.get_or_insert_with(|| vec![1.0])[0];
    let coops = cfg.cooperative.get_or_insert_with(Vec::new).clone();
    let radios = cfg
        .radios
        .clone()
        .ok_or_else(|| config_error("connectivity needs `radios`"))?;
    let edges = connectivity(&radios, cfg.link_ps, kappa, &model, w, &coops)?;
    let mut table = Table::new(
        "connectivity",
        &["from", "to", "alpha", "alpha_c", "connected"],
        PlotKind::None,
    );
    for e in &edges {
        table.push(vec![
            e.from.to_string(),
            e.to.to_string(),
            num(e.alpha),
            num(e.alpha_c),
            e.connected.to_string(),
        ]);
    }
    let mut report = RunReport::new(cfg);
    report.note("edges", edges.len());
    report.note("connected", edges.iter().filter(|e| e.connected).count());
    report.tables.push(table);
    Ok(timed(start, report))
}

/// Dispatches a figure experiment by id.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    match config.experiment {
        ExperimentId::Fig3 => run_fig3(config),
        ExperimentId::Fig4 => run_fig4(config),
        ExperimentId::Fig5 => run_fig5(config),
        ExperimentId::Fig6 => run_fig6(config),
        ExperimentId::Fig7 => run_fig7(config),
        ExperimentId::Custom => Err(config_error(
            "custom configs are run through a specific subcommand",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        let err = ExperimentConfig::from_json(r#"{"experiment":"fig3","bogus":1}"#);
        assert!(matches!(err, Err(Error::InvalidParameter { name: "config", .. })));
        let ok = ExperimentConfig::from_json(r#"{"experiment":"fig6","rho12":[0.0]}"#).unwrap();
        assert_eq!(ok.rho12, Some(vec![0.0]));
    }

    #[test]
    fn alpha_grid_exact() {
        let mut c = ExperimentConfig::new(ExperimentId::Fig3);
        c.alpha_step = Some(0.01);
        let g = c.alpha_grid().unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g[7], 0.07);
        c.alpha_step = Some(0.3);
        assert!(c.alpha_grid().is_err());
    }

    #[test]
    fn fig6_header_echoes_defaults() {
        let mut c = ExperimentConfig::new(ExperimentId::Fig6);
        c.alpha_step = Some(0.1);
        let r = run_fig6(&c).unwrap();
        let csv = r.csv("fig6_risk").unwrap();
        assert!(csv.contains("\"rho12\":[0.0,0.4,0.8]"));
        assert!(csv.lines().nth(5).unwrap().starts_with("alpha,"));
    }

    #[test]
    fn infeasible_rho_rejected() {
        let mut c = ExperimentConfig::new(ExperimentId::Fig6);
        c.rho12 = Some(vec![-0.99]);
        assert!(matches!(run_fig6(&c), Err(Error::InvalidPmf(_))));
    }
}
