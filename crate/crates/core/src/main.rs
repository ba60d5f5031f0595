//! `crn-sense` command-line interface.
//!
//! Exit codes: 0 success, 2 configuration error, 3 infeasible statistics,
//! 4 internal numeric failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crn_sense::fusion::critical_alpha_alone;
use crn_sense::harness::{self, ExperimentConfig, ExperimentId, RunReport};
use crn_sense::pmf_algebra::{
    build_g, complete_joint, invert_g_bar, joint_to_marginals, Hypothesis, JointPmf, MarginalSet,
};
use crn_sense::robust::lp_solve;
use crn_sense::Error;

#[derive(Parser)]
#[command(name = "crn-sense", version, about = "Cooperative link-availability sensing for cognitive radio networks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: the config's `output`, else `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write gnuplot scripts next to the CSV files.
    #[arg(long, global = true)]
    gnuplot: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Risk versus alpha for independent nodes or a joint pmf pair.
    RiskCurve,
    /// Robust risk for known marginals of each order.
    Robust,
    /// Per-cell admissibility map of one scene.
    Neighborhood,
    /// Directed edge list of a radio layout.
    Connectivity,
    /// Convert between a joint pmf and its marginals.
    ConvertPmf(ConvertArgs),
    /// Regenerate the data behind one figure.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
    },
    /// Quick internal consistency checks.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum Figure {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

#[derive(Args)]
struct ConvertArgs {
    /// Input CSV (`index,mask,value`).
    #[arg(long)]
    input: PathBuf,
    /// Hypothesis bit of the pmf: 1 available, 0 unavailable.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    hypothesis: u8,
    /// Joint to marginals of this order.
    #[arg(long, conflicts_with = "tail")]
    order: Option<usize>,
    /// Marginals of order K-1 plus this tail mass to the joint.
    #[arg(long, requires = "nodes")]
    tail: Option<f64>,
    /// Node count K of the marginal input.
    #[arg(long)]
    nodes: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter { .. } | Error::SizeLimit { .. } | Error::DimensionMismatch(_) => 2,
        Error::InvalidPmf(_) | Error::Infeasible | Error::DegenerateStats(_) => 3,
        Error::Unbounded | Error::Numeric(_) => 4,
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::InvalidParameter {
        name: "path",
        reason: format!("{}: {e}", path.display()),
    }
}

fn load_config(common: &Common, default: ExperimentId) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::new(default),
    };
    if let Some(seed) = common.seed {
        cfg.seed = Some(seed);
    }
    Ok(cfg)
}

fn emit(common: &Common, report: &RunReport) -> Result<(), Error> {
    let dir = common
        .out
        .clone()
        .or_else(|| report.config.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let written = report
        .write_to(&dir, common.gnuplot)
        .map_err(|e| io_error(&dir, e))?;
    for path in written {
        println!("wrote {}", path.display());
    }
    for (k, v) in &report.summary {
        println!("{k} = {v}");
    }
    println!(
        "{} finished in {:.3} s (seed {})",
        report.experiment.as_str(),
        report.wall_time.as_secs_f64(),
        report.seed
    );
    Ok(())
}

fn convert(args: &ConvertArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.input).map_err(|e| io_error(&args.input, e))?;
    let s = Hypothesis::from_bit(args.hypothesis)?;
    let out = match (args.order, args.tail) {
        (Some(m), None) => {
            let joint = harness::read_joint(&args.input, s)?;
            joint_to_marginals(&joint, m)?.to_csv()?
        }
        (None, Some(tail)) => {
            let k = args.nodes.expect("clap enforces --nodes");
            if k == 0 {
                return Err(Error::InvalidParameter {
                    name: "nodes",
                    reason: "need at least one node".into(),
                });
            }
            let q = MarginalSet::from_csv(s, k - 1, k, &text)?;
            complete_joint(&q, tail)?.to_csv()?
        }
        _ => {
            return Err(Error::InvalidParameter {
                name: "convert-pmf",
                reason: "give exactly one of --order or --tail".into(),
            })
        }
    };
    match &args.output {
        Some(path) => std::fs::write(path, out).map_err(|e| io_error(path, e))?,
        None => print!("{out}"),
    }
    Ok(())
}

/// A handful of fast checks; prints one line per check.
fn selftest() -> Result<(), Error> {
    let mut failed = 0;
    let mut check = |name: &str, ok: bool| {
        println!("{} {name}", if ok { "PASS" } else { "FAIL" });
        failed += usize::from(!ok);
    };
    check("critical boundary at w=9", (critical_alpha_alone(9.0) - 0.9).abs() < 1e-12);

    let g = build_g(Hypothesis::Available, 2, 4)?;
    let inv = invert_g_bar(&g);
    let square = g.square_block();
    let n = square.nrows();
    check(
        "integer inverse of the square incidence block",
        &inv * &square == nalgebra::DMatrix::identity(n, n),
    );

    let p = JointPmf::new(
        Hypothesis::Unavailable,
        3,
        vec![0.3, 0.1, 0.05, 0.15, 0.1, 0.1, 0.05, 0.15],
    )?;
    let rebuilt = complete_joint(&joint_to_marginals(&p, 2)?, p.tail_mass())?;
    let err = p
        .values()
        .iter()
        .zip(rebuilt.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    check("joint pmf roundtrip", err < 1e-12);

    // minimize t with t >= |x|, x = 0.3
    let a = nalgebra::DMatrix::from_row_slice(3, 4, &[
        1.0, 0.0, 0.0, 0.0, //
        -1.0, 1.0, -1.0, 0.0, //
        1.0, 1.0, 0.0, -1.0,
    ]);
    let sol = lp_solve(
        &[0.0, 1.0, 0.0, 0.0],
        &a,
        &[0.3, 0.0, 0.0],
        &[(-1.0, 1.0), (0.0, f64::INFINITY), (0.0, f64::INFINITY), (0.0, f64::INFINITY)],
    )?;
    check("absolute-value epigraph LP", (sol.objective - 0.3).abs() < 1e-9);

    if failed == 0 {
        Ok(())
    } else {
        Err(Error::Numeric(format!("{failed} self-test check(s) failed")))
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    if let Some(n) = cli.common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParameter {
                name: "threads",
                reason: e.to_string(),
            })?;
    }
    let common = &cli.common;
    let report = match &cli.command {
        Command::RiskCurve => harness::run_risk_curve(&load_config(common, ExperimentId::Custom)?)?,
        Command::Robust => harness::run_robust(&load_config(common, ExperimentId::Custom)?)?,
        Command::Neighborhood => {
            harness::run_neighborhood(&load_config(common, ExperimentId::Custom)?)?
        }
        Command::Connectivity => {
            harness::run_connectivity(&load_config(common, ExperimentId::Custom)?)?
        }
        Command::ConvertPmf(args) => return convert(args),
        Command::Selftest => return selftest(),
        Command::Reproduce { figure } => {
            let id = match figure {
                Figure::Fig3 => ExperimentId::Fig3,
                Figure::Fig4 => ExperimentId::Fig4,
                Figure::Fig5 => ExperimentId::Fig5,
                Figure::Fig6 => ExperimentId::Fig6,
                Figure::Fig7 => ExperimentId::Fig7,
            };
            harness::run_experiment(&load_config(common, id)?)?
        }
    };
    emit(common, &report)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("CRN_SENSE_LOG")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
