//! End-to-end runs of the `crn-sense` binary.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crn-sense"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["selftest"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();

    assert_eq!(code(&run(&["robust", "--config", "missing.json"], p)), 2);

    std::fs::write(p.join("unknown.json"), r#"{"experiment":"fig6","colour":3}"#).unwrap();
    let out = run(&["reproduce", "fig6", "--config", "unknown.json"], p);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));

    std::fs::write(p.join("rho.json"), r#"{"experiment":"fig6","rho12":[-0.99]}"#).unwrap();
    assert_eq!(code(&run(&["reproduce", "fig6", "--config", "rho.json"], p)), 3);

    std::fs::write(p.join("step.json"), r#"{"experiment":"fig3","alpha_step":0.3}"#).unwrap();
    assert_eq!(code(&run(&["reproduce", "fig3", "--config", "step.json"], p)), 2);

    // clap usage errors also exit with 2
    assert_eq!(code(&run(&["reproduce", "fig9"], p)), 2);
}

#[test]
fn reproduce_writes_headed_csv_and_gnuplot() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["reproduce", "fig6", "--seed", "3", "--gnuplot", "--out", "o"], dir.path());
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(dir.path().join("o/fig6_risk.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# crn-sense "));
    assert_eq!(lines.next().unwrap(), "# experiment: fig6");
    assert_eq!(lines.next().unwrap(), "# table: fig6_risk");
    assert_eq!(lines.next().unwrap(), "# seed: 3");
    let config = lines.next().unwrap().strip_prefix("# config: ").unwrap();
    let echoed: serde_json::Value = serde_json::from_str(config).unwrap();
    assert_eq!(echoed["w"], 1.0);
    assert_eq!(echoed["seed"], 3);
    assert!(lines.next().unwrap().starts_with("alpha,"));
    assert!(dir.path().join("o/fig6_risk.gp").exists());
}

#[test]
fn convert_pmf_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let joint = "index,mask,value\n0,0,0.3\n1,1,0.1\n2,2,0.05\n3,4,0.15\n4,3,0.1\n5,5,0.1\n6,6,0.05\n7,7,0.15\n";
    std::fs::write(p.join("joint.csv"), joint).unwrap();
    let out = run(
        &["convert-pmf", "--input", "joint.csv", "--hypothesis", "1", "--order", "2", "--output", "q.csv"],
        p,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(
        &["convert-pmf", "--input", "q.csv", "--hypothesis", "1", "--tail", "0.15", "--nodes", "3", "--output", "back.csv"],
        p,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let back = std::fs::read_to_string(p.join("back.csv")).unwrap();
    let parse = |text: &str| -> Vec<f64> {
        text.lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
            .collect()
    };
    for (a, b) in parse(joint).iter().zip(parse(&back)) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    // a tail mass inconsistent with the marginals cannot be completed
    let out = run(
        &["convert-pmf", "--input", "q.csv", "--hypothesis", "1", "--tail", "0.9", "--nodes", "3"],
        p,
    );
    assert_eq!(code(&out), 3);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("c.json"), r#"{"experiment":"fig3","alpha_step":0.05,"mc_trials":30000}"#).unwrap();
    for (threads, sub) in [("1", "a"), ("3", "b")] {
        let out = run(&["reproduce", "fig3", "--config", "c.json", "--threads", threads, "--out", sub], p);
        assert_eq!(code(&out), 0);
    }
    let a = std::fs::read(p.join("a/fig3_risk.csv")).unwrap();
    let b = std::fs::read(p.join("b/fig3_risk.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn subcommands_run_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(
        p.join("n.json"),
        r#"{"experiment":"custom","w":9,"ps":[{"x":1.7,"y":0}],"grid":{"n_r":40,"n_theta":36,"r_max":null}}"#,
    )
    .unwrap();
    assert_eq!(code(&run(&["neighborhood", "--config", "n.json", "--out", "n"], p)), 0);
    std::fs::write(
        p.join("l.json"),
        r#"{"experiment":"custom","w":9,"radios":[{"position":{"x":0,"y":0}},{"position":{"x":1,"y":0}}],"link_ps":{"x":1.7,"y":0}}"#,
    )
    .unwrap();
    let out = run(&["connectivity", "--config", "l.json", "--out", "l"], p);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::write(p.join("r.json"), r#"{"experiment":"custom","w":1,"nodes":[[0.8,0.7]],"alpha_step":0.1}"#).unwrap();
    assert_eq!(code(&run(&["risk-curve", "--config", "r.json", "--out", "r"], p)), 0);
}
