//! Received-power model tying the indicator statistics to positions.
//!
//! Every node compares its received power (dB) with a threshold. With the
//! primary system (PS) idle the power is noise only, `N(mu0, sigma0^2)`;
//! with the PS active it is the noise-plus-signal approximation of
//! [`effective_lognormal`] at the node's mean PS power
//! `K0 - 10 a log10(d) - b`. Given the PS state, the nodes' measurements are
//! independent, so `alpha`, `beta`, `gamma` and whole joint pmfs are ratios of
//! mixtures of products of Gaussian tail probabilities.
//!
//! Shadowing follows a linear obstacle model around the transmitter: a node
//! at distance `r` whose projection on the PS direction stays short of the PS
//! sees `max(b_tx (1 - r / 2 kappa), 0)`; past the PS it sees none. The same
//! rule is applied to cooperative nodes at their own position.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::coop_single::NodeStats;
use crate::error::{check_probability, Error, Result};
use crate::fusion::{critical_alpha, critical_alpha_alone};
use crate::pmf_algebra::{build_indexer, Hypothesis, JointPmf, MAX_DENSE_NODES};

/// Gaussian right tail, `Pr(Z > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse of [`q_function`] on `(0, 1)`.
pub fn q_inverse(p: f64) -> f64 {
    std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Position at polar offset `(r, theta)` from `self`, theta from the +x axis.
    pub fn offset(&self, polar: Polar) -> Point {
        Point::new(
            self.x + polar.r * polar.theta.cos(),
            self.y + polar.r * polar.theta.sin(),
        )
    }

    /// Polar offset of `other` as seen from `self`.
    pub fn polar_to(&self, other: &Point) -> Polar {
        let dx = other.x - self.x;
        let dy = other.y - self.y;
        Polar {
            r: dx.hypot(dy),
            theta: dy.atan2(dx),
        }
    }
}

/// Polar coordinates around the transmitter; `theta` is absolute (from +x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polar {
    pub r: f64,
    pub theta: f64,
}

impl Polar {
    pub const fn new(r: f64, theta: f64) -> Self {
        Self { r, theta }
    }
}

/// Channel and detector constants, all in dB except `a` and the probability.
///
/// The receiver's outage SINR is folded into `l0`: the receiver threshold at
/// distance `r` from the transmitter is `l0 - 10 a log10(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerModel {
    pub mu0: f64,
    pub sigma0_sq: f64,
    pub sigma_s_sq: f64,
    pub k0: f64,
    pub a: f64,
    pub l0: f64,
    pub tau_tx: f64,
    pub tau_co: f64,
    /// `Pr(PS idle)`.
    pub ps_idle_prob: f64,
}

impl PowerModel {
    /// Parameters of the neighborhood experiments.
    pub const fn fig4() -> Self {
        Self {
            mu0: 0.0,
            sigma0_sq: 1.0,
            sigma_s_sq: 8.0,
            k0: 10.0,
            a: 3.0,
            l0: 3.0,
            tau_tx: 3.0,
            tau_co: 3.0,
            ps_idle_prob: 0.6,
        }
    }

    pub fn with_ps_idle_prob(mut self, p: f64) -> Self {
        self.ps_idle_prob = p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma0_sq > 0.0 && self.sigma_s_sq > self.sigma0_sq) {
            return Err(Error::InvalidParameter {
                name: "sigma_s_sq",
                reason: format!(
                    "need sigma_s_sq > sigma0_sq > 0, got {} and {}",
                    self.sigma_s_sq, self.sigma0_sq
                ),
            });
        }
        if !(self.a > 0.0) {
            return Err(Error::InvalidParameter {
                name: "a",
                reason: format!("path-loss exponent {} must be positive", self.a),
            });
        }
        for (name, v) in [
            ("mu0", self.mu0),
            ("k0", self.k0),
            ("l0", self.l0),
            ("tau_tx", self.tau_tx),
            ("tau_co", self.tau_co),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{v} is not finite"),
                });
            }
        }
        check_probability("ps_idle_prob", self.ps_idle_prob)
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0_sq.sqrt()
    }

    pub fn sigma_s(&self) -> f64 {
        self.sigma_s_sq.sqrt()
    }

    /// Receiver threshold at distance `r` from the transmitter.
    pub fn tau_rx(&self, r: f64) -> f64 {
        self.l0 - 10.0 * self.a * r.log10()
    }

    /// Mean received PS power at distance `d` under shadowing `b`.
    pub fn mean_ps_power(&self, d: f64, b: f64) -> f64 {
        self.k0 - 10.0 * self.a * d.log10() - b
    }
}

/// Log-normal stand-in for noise plus PS signal: `(mu_cr, sigma_cr^2)`.
pub fn effective_lognormal(mu_s: f64, model: &PowerModel) -> (f64, f64) {
    let mu0 = model.mu0;
    let sigma_s = model.sigma_s();
    let (s0, ss) = (model.sigma0_sq, model.sigma_s_sq);
    let mu = if mu_s <= mu0 - sigma_s {
        mu0
    } else if mu_s >= mu0 + sigma_s {
        mu_s
    } else {
        (mu_s + mu0 + sigma_s) / 2.0
    };
    let var = if mu_s <= mu0 - sigma_s {
        s0
    } else if mu_s >= mu0 + 2.0 * sigma_s {
        ss
    } else {
        (ss - s0) / (3.0 * sigma_s) * (mu_s - mu0) + (ss + 2.0 * s0) / 3.0
    };
    (mu, var)
}

/// Transmitter, PS and obstacle layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    /// `None` models a network with no primary system (coverage).
    pub ps: Option<Point>,
    pub tx: Point,
    /// Shadowing (dB) at the transmitter.
    pub b_tx: f64,
    /// Obstacle size (length units).
    pub kappa: f64,
}

impl Scene {
    pub fn new(ps: Option<Point>, tx: Point, b_tx: f64, kappa: f64) -> Result<Self> {
        let scene = Self {
            ps,
            tx,
            b_tx,
            kappa,
        };
        scene.validate()?;
        Ok(scene)
    }

    /// Transmitter at the origin, no obstacles.
    pub fn open(ps: Option<Point>) -> Self {
        Self {
            ps,
            tx: Point::new(0.0, 0.0),
            b_tx: 0.0,
            kappa: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "kappa",
                reason: format!("obstacle size {} must be positive", self.kappa),
            });
        }
        if !(self.b_tx >= 0.0 && self.b_tx.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "b_tx",
                reason: format!("shadowing {} must be nonnegative", self.b_tx),
            });
        }
        Ok(())
    }

    /// Distance from the transmitter to the PS.
    pub fn d_tx(&self) -> Option<f64> {
        self.ps.map(|ps| self.tx.distance(&ps))
    }
}

/// Shadowing at a node placed at `at` (polar around the transmitter).
pub fn shadowing_at(at: Polar, scene: &Scene) -> f64 {
    let inner = (scene.b_tx * (1.0 - at.r / (2.0 * scene.kappa))).max(0.0);
    let Some(ps) = scene.ps else {
        return inner;
    };
    let d_tx = scene.tx.distance(&ps);
    if d_tx == 0.0 {
        return inner;
    }
    // r cos(theta) with theta measured from the PS direction.
    let ps_dir = scene.tx.polar_to(&ps).theta;
    let along = at.r * (at.theta - ps_dir).cos();
    if along <= d_tx {
        inner
    } else {
        0.0
    }
}

/// Probability that one node reports the spectrum free, per PS state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeChannel {
    pub threshold: f64,
    /// Mean and standard deviation of the received power with the PS active.
    pub active_mean: f64,
    pub active_sd: f64,
    pub free_if_idle: f64,
    pub free_if_active: f64,
}

impl NodeChannel {
    fn new(model: &PowerModel, threshold: f64, ps_distance: Option<f64>, shadowing: f64) -> Self {
        let free_if_idle = q_function((model.mu0 - threshold) / model.sigma0());
        let (active_mean, active_sd) = match ps_distance {
            Some(d) => {
                let (mu, var) = effective_lognormal(model.mean_ps_power(d, shadowing), model);
                (mu, var.sqrt())
            }
            // No PS: an "active" PS contributes nothing.
            None => (model.mu0, model.sigma0()),
        };
        let free_if_active = q_function((active_mean - threshold) / active_sd);
        Self {
            threshold,
            active_mean,
            active_sd,
            free_if_idle,
            free_if_active,
        }
    }

    /// `Pr(free | PS idle)` for `idle`, `Pr(free | PS active)` otherwise.
    pub fn free(&self, idle: bool) -> f64 {
        if idle {
            self.free_if_idle
        } else {
            self.free_if_active
        }
    }
}

/// Channels of the transmitter, the receiver at `rx` and cooperative nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkChannels {
    pub ps_idle_prob: f64,
    pub tx: NodeChannel,
    pub rx: NodeChannel,
    pub coops: Vec<NodeChannel>,
}

pub fn link_channels(
    rx: Polar,
    coops: &[Polar],
    scene: &Scene,
    model: &PowerModel,
) -> LinkChannels {
    let ps_dist = |p: Polar| scene.ps.map(|ps| scene.tx.offset(p).distance(&ps));
    let tx = NodeChannel::new(model, model.tau_tx, scene.d_tx(), scene.b_tx);
    let rx_ch = NodeChannel::new(
        model,
        model.tau_rx(rx.r),
        ps_dist(rx),
        shadowing_at(rx, scene),
    );
    let coops = coops
        .iter()
        .map(|&c| NodeChannel::new(model, model.tau_co, ps_dist(c), shadowing_at(c, scene)))
        .collect();
    LinkChannels {
        ps_idle_prob: model.ps_idle_prob,
        tx,
        rx: rx_ch,
        coops,
    }
}

impl LinkChannels {
    /// `Pr(rx free | tx free)`.
    pub fn alpha(&self) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (idle, p) in [(true, self.ps_idle_prob), (false, 1.0 - self.ps_idle_prob)] {
            let t = p * self.tx.free(idle);
            num += t * self.rx.free(idle);
            den += t;
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }

    /// Joint pmfs of the cooperative indicators given `(tx free, rx = s)`.
    /// Errors with `DegenerateStats` when the conditioning event is impossible.
    pub fn joint_pmfs(&self) -> Result<(JointPmf, JointPmf)> {
        let k = self.coops.len();
        if k > MAX_DENSE_NODES {
            return Err(Error::SizeLimit {
                k,
                limit: MAX_DENSE_NODES,
            });
        }
        if k == 0 {
            return Ok((
                JointPmf::trivial(Hypothesis::Available),
                JointPmf::trivial(Hypothesis::Unavailable),
            ));
        }
        let indexer = build_indexer(k)?;
        let mut p1 = vec![0.0; indexer.len()];
        let mut p0 = vec![0.0; indexer.len()];
        let mut d1 = 0.0;
        let mut d0 = 0.0;
        for (idle, p) in [(true, self.ps_idle_prob), (false, 1.0 - self.ps_idle_prob)] {
            let base = p * self.tx.free(idle);
            let w1 = base * self.rx.free(idle);
            let w0 = base * (1.0 - self.rx.free(idle));
            d1 += w1;
            d0 += w0;
            for pos in 0..indexer.len() {
                let mask = indexer.mask(pos);
                let pattern: f64 = self
                    .coops
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let f = c.free(idle);
                        if mask & (1 << i) != 0 {
                            f
                        } else {
                            1.0 - f
                        }
                    })
                    .product();
                p1[pos] += w1 * pattern;
                p0[pos] += w0 * pattern;
            }
        }
        if d1 <= 0.0 || d0 <= 0.0 {
            return Err(Error::DegenerateStats(
                "receiver state is deterministic given a free transmitter".into(),
            ));
        }
        let normalize = |v: Vec<f64>, d: f64| -> Vec<f64> {
            let mut out: Vec<f64> = v.into_iter().map(|x| x / d).collect();
            let total: f64 = out.iter().sum();
            for x in out.iter_mut() {
                *x /= total;
            }
            out
        };
        Ok((
            JointPmf::new(Hypothesis::Available, k, normalize(p1, d1))?,
            JointPmf::new(Hypothesis::Unavailable, k, normalize(p0, d0))?,
        ))
    }
}

/// `alpha = Pr(rx free | tx free)` for a receiver at `rx`.
pub fn alpha_from_geometry(rx: Polar, scene: &Scene, model: &PowerModel) -> f64 {
    link_channels(rx, &[], scene, model).alpha()
}

/// `(beta, gamma)` of a cooperative node at `co` for a receiver at `rx`.
pub fn beta_gamma_from_geometry(
    co: Polar,
    rx: Polar,
    scene: &Scene,
    model: &PowerModel,
) -> Result<NodeStats> {
    let (p1, p0) = link_channels(rx, &[co], scene, model).joint_pmfs()?;
    NodeStats::new(p1.values()[1], p0.values()[0])
}

/// Closed-form coverage radius: the distance at which `alpha` without a PS
/// falls to `w / (w + 1)`.
pub fn coverage_radius(model: &PowerModel, w: f64) -> f64 {
    let needed = model.mu0 + model.sigma0() * q_inverse(1.0 / (w + 1.0));
    10f64.powf((model.l0 - needed) / (10.0 * model.a))
}

/// Directional restriction `theta in [center - half_width, center + half_width]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngularMask {
    pub center: f64,
    pub half_width: f64,
}

impl AngularMask {
    pub fn contains(&self, theta: f64) -> bool {
        let d = (theta - self.center).rem_euclid(std::f64::consts::TAU);
        let d = d.min(std::f64::consts::TAU - d);
        d <= self.half_width
    }
}

/// Polar grid around the transmitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarGrid {
    pub n_r: usize,
    pub n_theta: usize,
    /// Defaults to twice the coverage radius.
    pub r_max: Option<f64>,
}

impl Default for PolarGrid {
    fn default() -> Self {
        Self {
            n_r: 200,
            n_theta: 360,
            r_max: None,
        }
    }
}

/// Decision configuration for a neighborhood computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleConfig {
    pub w: f64,
    #[serde(default)]
    pub cooperative: Vec<Point>,
    #[serde(default)]
    pub grid: PolarGrid,
    #[serde(default)]
    pub mask: Option<AngularMask>,
}

impl RuleConfig {
    pub fn new(w: f64) -> Self {
        Self {
            w,
            cooperative: Vec::new(),
            grid: PolarGrid::default(),
            mask: None,
        }
    }

    pub fn with_cooperative(mut self, nodes: Vec<Point>) -> Self {
        self.cooperative = nodes;
        self
    }

    pub fn with_grid(mut self, grid: PolarGrid) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_mask(mut self, mask: Option<AngularMask>) -> Self {
        self.mask = mask;
        self
    }
}

/// Per-cell `alpha` and the admissibility verdict `alpha >= alpha_C`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodMap {
    pub r_centers: Vec<f64>,
    pub theta_centers: Vec<f64>,
    pub dr: f64,
    pub dtheta: f64,
    /// Row-major over `(r, theta)`.
    pub alpha: Vec<f64>,
    pub alpha_c: Vec<f64>,
    pub admissible: Vec<bool>,
    pub mask: Option<AngularMask>,
}

impl NeighborhoodMap {
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.theta_centers.len() + j
    }

    pub fn is_admissible(&self, i: usize, j: usize) -> bool {
        self.admissible[self.idx(i, j)]
    }

    pub fn alpha_at(&self, i: usize, j: usize) -> f64 {
        self.alpha[self.idx(i, j)]
    }

    fn cell_area(&self, i: usize) -> f64 {
        self.r_centers[i] * self.dr * self.dtheta
    }

    /// Area of the admissible region inside the configured mask.
    pub fn area(&self) -> f64 {
        self.area_where(|theta| self.mask.is_none_or(|m| m.contains(theta)))
    }

    /// Admissible area restricted to `keep(theta)`.
    pub fn area_where(&self, keep: impl Fn(f64) -> bool) -> f64 {
        let mut total = 0.0;
        for (j, &theta) in self.theta_centers.iter().enumerate() {
            if !keep(theta) {
                continue;
            }
            for i in 0..self.r_centers.len() {
                if self.is_admissible(i, j) {
                    total += self.cell_area(i);
                }
            }
        }
        total
    }

    /// Outermost admissible radius per angle (0 when nothing is admissible).
    pub fn boundary_radii(&self) -> Vec<f64> {
        (0..self.theta_centers.len())
            .map(|j| {
                (0..self.r_centers.len())
                    .rev()
                    .find(|&i| self.is_admissible(i, j))
                    .map_or(0.0, |i| self.r_centers[i])
            })
            .collect()
    }

    /// Boundary polyline around `origin`.
    pub fn boundary(&self, origin: Point) -> Vec<Point> {
        self.boundary_radii()
            .iter()
            .zip(&self.theta_centers)
            .map(|(&r, &theta)| origin.offset(Polar::new(r, theta)))
            .collect()
    }
}

/// Critical boundary for a receiver at `rx` given the cooperative nodes.
/// Returns `(alpha, alpha_c)`.
pub fn link_verdict(
    rx: Polar,
    coops: &[Polar],
    scene: &Scene,
    model: &PowerModel,
    w: f64,
) -> Result<(f64, f64)> {
    let ch = link_channels(rx, coops, scene, model);
    let alpha = ch.alpha();
    if coops.is_empty() {
        return Ok((alpha, critical_alpha_alone(w)));
    }
    match ch.joint_pmfs() {
        Ok((p1, p0)) => Ok((alpha, critical_alpha(w, &p1, &p0)?)),
        // The receiver's state is certain given a free transmitter; the
        // cooperative nodes cannot change that verdict.
        Err(Error::DegenerateStats(_)) => Ok((alpha, critical_alpha_alone(w))),
        Err(e) => Err(e),
    }
}

pub fn neighborhood(
    scene: &Scene,
    model: &PowerModel,
    rule: &RuleConfig,
) -> Result<NeighborhoodMap> {
    model.validate()?;
    scene.validate()?;
    if rule.grid.n_r == 0 || rule.grid.n_theta == 0 {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "grid needs at least one cell in each direction".into(),
        });
    }
    if !(rule.w >= 0.0 && rule.w.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "w",
            reason: format!("weighting factor {} must be finite and nonnegative", rule.w),
        });
    }
    let r_max = rule
        .grid
        .r_max
        .unwrap_or_else(|| 2.0 * coverage_radius(model, rule.w));
    let dr = r_max / rule.grid.n_r as f64;
    let dtheta = std::f64::consts::TAU / rule.grid.n_theta as f64;
    let r_centers: Vec<f64> = (0..rule.grid.n_r).map(|i| (i as f64 + 0.5) * dr).collect();
    let theta_centers: Vec<f64> = (0..rule.grid.n_theta)
        .map(|j| (j as f64 + 0.5) * dtheta)
        .collect();
    let coops: Vec<Polar> = rule
        .cooperative
        .iter()
        .map(|p| scene.tx.polar_to(p))
        .collect();
    let cells: Vec<(f64, f64)> = r_centers
        .par_iter()
        .flat_map_iter(|&r| {
            let coops = &coops;
            theta_centers.iter().map(move |&theta| {
                link_verdict(Polar::new(r, theta), coops, scene, model, rule.w)
                    .expect("validated inputs")
            })
        })
        .collect();
    let alpha: Vec<f64> = cells.iter().map(|c| c.0).collect();
    let alpha_c: Vec<f64> = cells.iter().map(|c| c.1).collect();
    let admissible = cells.iter().map(|&(a, ac)| a >= ac).collect();
    Ok(NeighborhoodMap {
        r_centers,
        theta_centers,
        dr,
        dtheta,
        alpha,
        alpha_c,
        admissible,
        mask: rule.mask,
    })
}

/// A cognitive radio in a multi-node layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrNode {
    pub position: Point,
    /// Shadowing (dB) this radio experiences when it transmits.
    #[serde(default)]
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkEdge {
    pub from: usize,
    pub to: usize,
    pub alpha: f64,
    pub alpha_c: f64,
    pub connected: bool,
}

/// Directed connectivity: `i -> j` iff radio `j` lies in radio `i`'s
/// neighborhood when `i` transmits. Every ordered pair is reported.
pub fn connectivity(
    radios: &[CrNode],
    ps: Option<Point>,
    kappa: f64,
    model: &PowerModel,
    w: f64,
    cooperative: &[Point],
) -> Result<Vec<LinkEdge>> {
    model.validate()?;
    if radios.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "radios",
            reason: "connectivity needs at least two radios".into(),
        });
    }
    let mut edges = Vec::with_capacity(radios.len() * (radios.len() - 1));
    for (i, from) in radios.iter().enumerate() {
        let scene = Scene::new(ps, from.position, from.b, kappa)?;
        let coops: Vec<Polar> = cooperative
            .iter()
            .map(|p| from.position.polar_to(p))
            .collect();
        for (j, to) in radios.iter().enumerate() {
            if i == j {
                continue;
            }
            let rx = from.position.polar_to(&to.position);
            let (alpha, alpha_c) = link_verdict(rx, &coops, &scene, model, w)?;
            edges.push(LinkEdge {
                from: i,
                to: j,
                alpha,
                alpha_c,
                connected: alpha >= alpha_c,
            });
        }
    }
    Ok(edges)
}

/// Picks the candidate whose single-node cooperation yields the largest
/// (masked) neighborhood, with `w = (1 - zeta) / zeta`. Ties go to the lowest
/// index. Returns the index and every candidate's area.
pub fn select_cooperative_node(
    candidates: &[Point],
    scene: &Scene,
    model: &PowerModel,
    zeta: f64,
    grid: PolarGrid,
    mask: Option<AngularMask>,
) -> Result<(usize, Vec<f64>)> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter {
            name: "candidates",
            reason: "no candidate positions".into(),
        });
    }
    let w = crate::indicators::weight_from_outage(zeta)?;
    let areas = candidates
        .iter()
        .map(|&c| {
            let rule = RuleConfig::new(w)
                .with_cooperative(vec![c])
                .with_grid(grid)
                .with_mask(mask);
            neighborhood(scene, model, &rule).map(|m| m.area())
        })
        .collect::<Result<Vec<f64>>>()?;
    let best = areas
        .iter()
        .enumerate()
        .fold(0, |best, (i, &a)| if a > areas[best] { i } else { best });
    Ok((best, areas))
}
