//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so every line is printed in order; the
//! process exits non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use crn_sense::coop_single::{correlation, min_error_rule, psi, single_coop_rule, NodeStats};
use crn_sense::fusion::{
    critical_alpha, critical_alpha_alone, independent_rule, optimal_rule, product_pmfs, rule_risk,
};
use crn_sense::geo::{
    alpha_from_geometry, connectivity, coverage_radius, link_verdict, neighborhood, CrNode, Point,
    Polar, PowerModel, RuleConfig, Scene,
};
use crn_sense::harness::mc::{mc_alpha, mc_link_given_declared};
use crn_sense::harness::{CorrelatedScenario, DEFAULT_SEED};
use crn_sense::indicators::{inference_rule, traditional_risk, IndicatorStats};
use crn_sense::pmf_algebra::{
    build_g, build_indexer, complete_joint, invert_g_bar, joint_to_marginals, marginalize_nodes,
    Hypothesis, IncidenceBuilder,
};
use crn_sense::robust::{independence_risk, lp_solve, solve_robust, RobustProblem};

use common::{random_joint, random_node, rng};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn stats(alpha: f64, w: f64) -> IndicatorStats {
    IndicatorStats::new(alpha, w).unwrap()
}

fn c01_critical_boundary() -> Outcome {
    let a = critical_alpha_alone(9.0);
    outcome((a - 0.9).abs() <= 1e-12, format!("alpha_C = {a}"))
}

fn c02_risk_dominance() -> Outcome {
    // alpha = i/1000: inference declares iff i >= 9 (1000 - i), i.e. i >= 900
    let mut bad = Vec::new();
    for i in 0..=1000u32 {
        let s = stats(f64::from(i) / 1000.0, 9.0);
        let inf = inference_rule(&s).risk;
        let trad = traditional_risk(&s);
        let equal_expected = i >= 900;
        if inf > trad || (inf == trad) != equal_expected {
            bad.push(i);
        }
    }
    outcome(bad.is_empty(), format!("1001 grid points, violations at {bad:?}"))
}

fn c03_min_error_equivalence() -> Outcome {
    let grid: Vec<f64> = (0..=20).map(|i| f64::from(i) / 20.0).collect();
    let (mut compared, mut boundary, mut mismatches) = (0, 0, Vec::new());
    for &b in &grid {
        for &g in &grid {
            let node = NodeStats::new(b, g).unwrap();
            for &a in &grid {
                let s = stats(a, 1.0);
                let prop = single_coop_rule(&s, &node);
                let on_threshold = (a - prop.alpha1).abs() < 1e-12 || (a - prop.alpha2).abs() < 1e-12;
                let on_psi = correlation(a, &node).is_ok_and(|r| (r.abs() - psi(&node)).abs() < 1e-12);
                let Ok(cor) = min_error_rule(a, &node) else {
                    boundary += 1;
                    continue;
                };
                if on_threshold || on_psi {
                    boundary += 1;
                    continue;
                }
                compared += 1;
                if prop.table() != cor.table() {
                    mismatches.push((a, b, g));
                }
            }
        }
    }
    outcome(
        mismatches.is_empty() && compared > 8000,
        format!("{compared} points compared, {boundary} boundary points skipped, mismatches {mismatches:?}"),
    )
}

fn c04_concavity() -> Outcome {
    let mut r = rng(4);
    let mut worst = f64::NEG_INFINITY;
    let mut n = 0;
    while n < 100 {
        let (b, g): (f64, f64) = (r.random(), r.random());
        if b + g <= 1.0 {
            continue;
        }
        n += 1;
        let node = NodeStats::new(b, g).unwrap();
        let rho = |i: i32| correlation(f64::from(i) * 1e-3, &node).unwrap();
        for i in 2..=998 {
            worst = worst.max(rho(i - 1) - 2.0 * rho(i) + rho(i + 1));
        }
    }
    outcome(worst <= 1e-9, format!("max second difference {worst:e}"))
}

fn c05_matrix_algebra() -> Outcome {
    let mut inc = IncidenceBuilder::new();
    let mut failures = Vec::new();
    for k in 1..=8 {
        let idx = build_indexer(k).unwrap();
        let mut all: Vec<u32> = idx.masks().to_vec();
        for m in 0..=k {
            for pos in idx.block(m) {
                if idx.mask(pos).count_ones() as usize != m {
                    failures.push(format!("k={k} column {pos} weight"));
                }
            }
            for n in 0..=k {
                let a = inc.get(n, m, k);
                for (i, ri) in idx.block(n).enumerate() {
                    for (j, cj) in idx.block(m).enumerate() {
                        let contains = idx.mask(cj) & idx.mask(ri) == idx.mask(ri);
                        if a[(i, j)] != i64::from(contains) {
                            failures.push(format!("A^{n}_({m},{k})[{i},{j}]"));
                        }
                    }
                }
            }
        }
        all.sort_unstable();
        all.dedup();
        if all.len() != 1 << k {
            failures.push(format!("k={k} columns not distinct"));
        }
    }
    let mut inverses = 0;
    for k in 1..=6 {
        for m in 0..=k {
            for s in [Hypothesis::Available, Hypothesis::Unavailable] {
                let g = build_g(s, m, k).unwrap();
                let sq = g.square_block();
                let inv = invert_g_bar(&g);
                let id = DMatrix::<i64>::identity(sq.nrows(), sq.nrows());
                if &inv * &sq != id || &sq * &inv != id {
                    failures.push(format!("inverse s={s:?} m={m} k={k}"));
                }
                inverses += 1;
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("incidence k<=8 exhaustive, {inverses} exact inverses; failures {failures:?}"),
    )
}

fn c06_roundtrip() -> Outcome {
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    for t in 0..1000 {
        let k = 1 + t % 6;
        let s = if t % 2 == 0 { Hypothesis::Available } else { Hypothesis::Unavailable };
        let p = random_joint(&mut r, s, k);
        let q = joint_to_marginals(&p, k - 1).unwrap();
        let back = complete_joint(&q, p.tail_mass()).unwrap();
        for (a, b) in p.values().iter().zip(back.values()) {
            worst = worst.max((a - b).abs());
        }
    }
    outcome(worst <= 1e-12, format!("1000 pmfs, max error {worst:e}"))
}

fn c07_fusion_optimality() -> Outcome {
    let mut r = rng(7);
    let mut worst: f64 = 0.0;
    for t in 0..200 {
        let k = 1 + t % 3;
        let p1 = random_joint(&mut r, Hypothesis::Available, k);
        let p0 = random_joint(&mut r, Hypothesis::Unavailable, k);
        let s = stats(r.random(), r.random_range(0.1..10.0));
        let n = 1usize << k;
        let best = (0u32..1 << n)
            .map(|bits| {
                let table: Vec<bool> = (0..n).map(|i| bits & (1 << i) != 0).collect();
                rule_risk(&s, &table, &p1, &p0)
            })
            .fold(f64::INFINITY, f64::min);
        let opt = optimal_rule(&s, &p1, &p0).unwrap().risk();
        worst = worst.max((opt - best).abs());
    }
    outcome(worst <= 1e-12, format!("200 instances, max gap {worst:e}"))
}

fn c08_reliability_rule() -> Outcome {
    let mut r = rng(8);
    let (mut worst, mut ties, mut bad) = (0.0f64, 0, 0);
    for t in 0..200 {
        let k = 1 + t % 6;
        let nodes: Vec<NodeStats> = (0..k).map(|_| random_node(&mut r)).collect();
        let s = stats(r.random(), r.random_range(0.1..10.0));
        let (p1, p0) = product_pmfs(&nodes).unwrap();
        let opt = optimal_rule(&s, &p1, &p0).unwrap();
        let ind = independent_rule(&s, &nodes).unwrap();
        for (i, (&a, &b)) in opt.table().iter().zip(ind.table()).enumerate() {
            if a != b {
                let lhs = s.alpha() * p1.values()[i];
                let rhs = s.w() * (1.0 - s.alpha()) * p0.values()[i];
                if (lhs - rhs).abs() <= 1e-12 * lhs.max(rhs).max(1e-300) {
                    ties += 1;
                } else {
                    bad += 1;
                }
            }
        }
        worst = worst.max((opt.risk() - ind.risk()).abs());
    }
    outcome(
        bad == 0 && worst <= 1e-12,
        format!("200 instances, {bad} non-tie disagreements, {ties} ties, max risk gap {worst:e}"),
    )
}

fn c09_critical_alpha_nesting() -> Outcome {
    let mut r = rng(9);
    let mut violations = 0;
    for t in 0..100 {
        let k = 1 + t % 5;
        let w = r.random_range(0.1..10.0);
        let p1 = random_joint(&mut r, Hypothesis::Available, k);
        let p0 = random_joint(&mut r, Hypothesis::Unavailable, k);
        let mut prev = critical_alpha_alone(w);
        for j in 1..=k {
            let nodes: Vec<usize> = (0..j).collect();
            let a = critical_alpha(
                w,
                &marginalize_nodes(&p1, &nodes).unwrap(),
                &marginalize_nodes(&p0, &nodes).unwrap(),
            )
            .unwrap();
            if a > prev + 1e-12 {
                violations += 1;
            }
            prev = a;
        }
    }
    outcome(violations == 0, format!("100 nested families, {violations} increases"))
}

fn c10_robust() -> Outcome {
    let scn = CorrelatedScenario::default().generate(DEFAULT_SEED).unwrap();
    let (p1, p0) = (&scn.p1, &scn.p0);
    let k = p1.k();
    let rows: Vec<(f64, f64, f64, Vec<f64>)> = (0..=50)
        .into_par_iter()
        .map(|i| {
            let s = stats(f64::from(i) / 50.0, 1.0);
            let opt = optimal_rule(&s, p1, p0).unwrap().risk();
            let ind = independence_risk(&s, p1, p0).unwrap();
            let rob = (0..=k)
                .map(|m| {
                    solve_robust(&RobustProblem::from_joint(s, p1, p0, m).unwrap())
                        .unwrap()
                        .objective
                })
                .collect();
            (s.alpha(), opt, ind, rob)
        })
        .collect();
    let tol = 1e-9;
    let mut fails = Vec::new();
    let mut margin = f64::INFINITY;
    for (a, opt, ind, rob) in &rows {
        let prior = (1.0 - a).min(*a);
        for m in 0..=k {
            if rob[m] < opt - tol || rob[m] > prior + tol {
                fails.push(format!("sandwich a={a} k={m}"));
            }
            if m < k && rob[m + 1] > rob[m] + tol {
                fails.push(format!("monotone a={a} k={m}"));
            }
            if m >= 4 {
                if rob[m] > *ind {
                    fails.push(format!("independence a={a} k={m}"));
                }
                if *a > 0.0 && *a < 1.0 {
                    margin = margin.min(ind - rob[m]);
                }
            }
        }
        if (rob[k] - opt).abs() > tol {
            fails.push(format!("full information a={a}"));
        }
    }
    outcome(
        fails.is_empty(),
        format!("K={k}, 51 alphas x 7 orders; min interior margin to independence {margin:.3e}; failures {fails:?}"),
    )
}

/// `min c'x, A x = b, x >= 0` by trying every basis.
fn vertex_enumeration(c: &[f64], a: &DMatrix<f64>, b: &[f64]) -> Option<f64> {
    let (m, n) = a.shape();
    let mut best: Option<f64> = None;
    let mut cols: Vec<usize> = (0..m).collect();
    loop {
        let basis = DMatrix::from_fn(m, m, |i, j| a[(i, cols[j])]);
        if basis.determinant().abs() > 1e-9 {
            if let Some(x) = basis.lu().solve(&DVector::from_column_slice(b)) {
                if x.iter().all(|&v| v >= -1e-9) {
                    let obj: f64 = cols.iter().zip(x.iter()).map(|(&j, &v)| c[j] * v).sum();
                    best = Some(best.map_or(obj, |o: f64| o.min(obj)));
                }
            }
        }
        // next combination in lexicographic order
        let mut i = m;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if cols[i] < n - m + i {
                cols[i] += 1;
                for j in i + 1..m {
                    cols[j] = cols[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn c11_lp() -> Outcome {
    let mut r = rng(11);
    let mut worst: f64 = 0.0;
    let mut errors = Vec::new();
    for t in 0..100 {
        let boxed = t % 3 == 0;
        let n = if boxed { r.random_range(2..=10) } else { r.random_range(3..=20) };
        let m_free = r.random_range(1..=(n - 1).min(4));
        let x0: Vec<f64> = (0..n).map(|_| r.random_range(0.0..1.0)).collect();
        let mut a = DMatrix::from_fn(m_free + 1, n, |_, _| r.random_range(-1.0..1.0));
        for j in 0..n {
            a[(m_free, j)] = 1.0;
        }
        let b: Vec<f64> = (0..=m_free)
            .map(|i| (0..n).map(|j| a[(i, j)] * x0[j]).sum())
            .collect();
        let c: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let bounds: Vec<(f64, f64)> = (0..n)
            .map(|j| {
                if boxed {
                    (r.random_range(0.0..=x0[j]), x0[j] + r.random_range(0.0..0.5))
                } else {
                    (0.0, f64::INFINITY)
                }
            })
            .collect();
        let got = match lp_solve(&c, &a, &b, &bounds) {
            Ok(s) => s.objective,
            Err(e) => {
                errors.push(format!("#{t}: {e}"));
                continue;
            }
        };
        // oracle in y = x - l >= 0, with explicit slacks for finite uppers
        let rows = a.nrows() + if boxed { n } else { 0 };
        let cols = if boxed { 2 * n } else { n };
        let mut sa = DMatrix::zeros(rows, cols);
        let mut sb = vec![0.0; rows];
        let mut sc = vec![0.0; cols];
        for i in 0..a.nrows() {
            for j in 0..n {
                sa[(i, j)] = a[(i, j)];
            }
            sb[i] = b[i] - (0..n).map(|j| a[(i, j)] * bounds[j].0).sum::<f64>();
        }
        sc[..n].copy_from_slice(&c);
        if boxed {
            for j in 0..n {
                let row = a.nrows() + j;
                sa[(row, j)] = 1.0;
                sa[(row, n + j)] = 1.0;
                sb[row] = bounds[j].1 - bounds[j].0;
            }
        }
        let shift: f64 = (0..n).map(|j| c[j] * bounds[j].0).sum();
        match vertex_enumeration(&sc, &sa, &sb) {
            Some(v) => worst = worst.max((got - (v + shift)).abs()),
            None => errors.push(format!("#{t}: oracle found no vertex")),
        }
    }
    outcome(
        errors.is_empty() && worst <= 1e-9,
        format!("100 LPs, max gap {worst:e}; errors {errors:?}"),
    )
}

fn c12_geometry_oracle() -> Outcome {
    let model = PowerModel::fig4();
    let scene = Scene::open(Some(Point::new(1.7, 0.0)));
    let mut worst_z: f64 = 0.0;
    let mut fails = Vec::new();
    let mut idx = 0u64;
    for ri in 0..5 {
        for ti in 0..10 {
            let rx = Polar::new(0.3 * f64::from(ri + 1), std::f64::consts::TAU * f64::from(ti) / 10.0);
            let exact = alpha_from_geometry(rx, &scene, &model);
            let est = mc_alpha(rx, &scene, &model, 100_000, DEFAULT_SEED + idx).unwrap();
            idx += 1;
            // plus-four standard error stays meaningful when no miss was seen
            let n = est.trials as f64 + 4.0;
            let pt = (est.hits as f64 + 2.0) / n;
            let se = (pt * (1.0 - pt) / n).sqrt();
            let diff = (est.mean() - exact).abs();
            let z = if se > 0.0 { diff / se } else if diff == 0.0 { 0.0 } else { f64::INFINITY };
            worst_z = worst_z.max(z);
            if z > 3.0 {
                fails.push(format!("r={:.1} theta={:.2}: z={z:.2}", rx.r, rx.theta));
            }
        }
    }
    outcome(fails.is_empty(), format!("50 points, max |z| {worst_z:.2}; failures {fails:?}"))
}

fn c13_coverage() -> Outcome {
    let model = PowerModel::fig4();
    let r = coverage_radius(&model, 9.0);
    let map = neighborhood(&Scene::open(None), &model, &RuleConfig::new(9.0)).unwrap();
    let worst = map
        .boundary_radii()
        .iter()
        .map(|b| (b - r).abs())
        .fold(0.0, f64::max);
    outcome(
        (r - 1.141).abs() < 5e-4 && worst <= map.dr,
        format!("radius {r:.6}, max boundary deviation {worst:.5} vs cell {:.5}", map.dr),
    )
}

fn c14_asymmetry() -> Outcome {
    let model = PowerModel::fig4().with_ps_idle_prob(0.7);
    let radios = [
        CrNode { position: Point::new(0.6, 0.0), b: 0.0 },
        CrNode { position: Point::new(0.0, 0.0), b: 25.0 },
    ];
    let edges = connectivity(&radios, Some(Point::new(1.0, 0.0)), 0.3, &model, 9.0, &[]).unwrap();
    let ij = edges.iter().find(|e| e.from == 0 && e.to == 1).unwrap();
    let ji = edges.iter().find(|e| e.from == 1 && e.to == 0).unwrap();
    outcome(
        ij.connected && !ji.connected && (0.65..=0.75).contains(&ji.alpha),
        format!("i->j alpha {:.6} connected {}, j->i alpha {:.6} connected {}", ij.alpha, ij.connected, ji.alpha, ji.connected),
    )
}

fn c15_outage_bound() -> Outcome {
    let model = PowerModel::fig4();
    let w = 9.0;
    let mut scenes = Vec::new();
    'outer: for ps in [Point::new(1.7, 0.0), Point::new(0.7, 0.0), Point::new(1.2, 0.6)] {
        for coop in [None, Some(Point::new(0.4, 0.3)), Some(Point::new(-0.3, 0.4))] {
            for (r, theta) in [(0.4, 0.0), (0.8, 0.0), (0.7, 1.6), (0.9, 3.1), (1.05, 0.4)] {
                let scene = Scene::open(Some(ps));
                let rx = Polar::new(r, theta);
                let coops: Vec<Polar> = coop.iter().map(|c| scene.tx.polar_to(c)).collect();
                let (alpha, alpha_c) = link_verdict(rx, &coops, &scene, &model, w).unwrap();
                if alpha >= alpha_c {
                    scenes.push((scene, rx, coops));
                    if scenes.len() == 20 {
                        break 'outer;
                    }
                }
            }
        }
    }
    let mut fails = Vec::new();
    let mut worst = f64::INFINITY;
    for (i, (scene, rx, coops)) in scenes.iter().enumerate() {
        match mc_link_given_declared(*rx, coops, scene, &model, w, 100_000, DEFAULT_SEED + 100 + i as u64) {
            Ok(Some(p)) => {
                let slack = p.mean() - (0.9 - 3.0 * p.std_error());
                worst = worst.min(p.mean());
                if slack < 0.0 {
                    fails.push(format!("scene {i}: {:.4} (n={})", p.mean(), p.trials));
                }
            }
            Ok(None) => fails.push(format!("scene {i}: never declared")),
            Err(e) => fails.push(format!("scene {i}: {e}")),
        }
    }
    outcome(
        scenes.len() == 20 && fails.is_empty(),
        format!("{} admissive scenes, lowest conditional availability {worst:.4}; failures {fails:?}", scenes.len()),
    )
}

fn c16_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_crn-sense");
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, threads: &str| {
        let out = dir.path().join(sub);
        let status = std::process::Command::new(bin)
            .args(["reproduce", "fig3", "--seed", "7", "--threads", threads, "--out"])
            .arg(&out)
            .stdout(std::process::Stdio::null())
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out.join("fig3_risk.csv")).unwrap()
    };
    let a = run("a", "4");
    let b = run("b", "4");
    let c = run("c", "1");
    outcome(
        a == b && a == c && !a.is_empty(),
        format!("{} bytes; repeat identical {}, thread-count identical {}", a.len(), a == b, a == c),
    )
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 16] = [
        ("critical boundary without cooperation", Duration::from_millis(1), c01_critical_boundary),
        ("inference risk dominates traditional risk", Duration::from_secs(1), c02_risk_dominance),
        ("minimum-error rule matches the four-case rule", Duration::from_secs(1), c03_min_error_equivalence),
        ("correlation is concave in alpha", Duration::from_secs(5), c04_concavity),
        ("incidence properties and exact inverses", Duration::from_secs(10), c05_matrix_algebra),
        ("joint/marginal roundtrip", Duration::from_secs(30), c06_roundtrip),
        ("fusion rule is optimal over all tables", Duration::from_secs(30), c07_fusion_optimality),
        ("reliability rule equals optimal rule on products", Duration::from_secs(30), c08_reliability_rule),
        ("critical alpha shrinks as nodes are added", Duration::from_secs(10), c09_critical_alpha_nesting),
        ("robust risk sandwich, monotonicity, independence gap", Duration::from_secs(300), c10_robust),
        ("simplex matches vertex enumeration", Duration::from_secs(60), c11_lp),
        ("closed-form alpha matches Monte Carlo", Duration::from_secs(120), c12_geometry_oracle),
        ("coverage radius and map boundary", Duration::from_secs(30), c13_coverage),
        ("directed-link asymmetry construction", Duration::from_secs(10), c14_asymmetry),
        ("outage bound given a declared link", Duration::from_secs(300), c15_outage_bound),
        ("reproduce is byte-deterministic", Duration::from_secs(60), c16_determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = f();
        let elapsed = start.elapsed();
        let ok = out.ok && elapsed <= *budget;
        failed += usize::from(!ok);
        println!(
            "{} {:>2} {name} [{:.3?} / {:?}] {}",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            elapsed,
            budget,
            out.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
