//! Command-line front end: build chart models, run geodesic / Jacobi-flow /
//! curvature / torsion computations, emit CSV or JSON tables, and drive the
//! verification suites.
//!
//! Exit codes: 0 success, 1 domain or integration error, 2 verification
//! failure, 64 usage error.

// `!(x > 0.0)` in the flag guards rejects NaN; `x <= 0.0` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use jacobiflow::batch::with_threads;
use jacobiflow::bundle::TangentVector;
use jacobiflow::connection::{
    curvature_commutator_oracle, curvature_operator, torsion, torsion_operator_route,
};
use jacobiflow::flow::{integrate_geodesic, integrate_jacobi_flow, variation_oracle, JacobiState};
use jacobiflow::linalg;
use jacobiflow::maps::ConstMap;
use jacobiflow::models::{build, ManifoldModel, ModelKind, ModelSpec};
use jacobiflow::output;
use jacobiflow::verify::{all_passed, render_report, run_suite, Suite, VerifyConfig};

const EXIT_OK: i32 = 0;
const EXIT_RUNTIME: i32 = 1;
const EXIT_VERIFY: i32 = 2;
const EXIT_USAGE: i32 = 64;

#[derive(Parser)]
#[command(
    name = "jacobiflow",
    about = "Geodesics, Jacobi flows and curvature on single-chart manifold models",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a geodesic and emit the (t, x, v) trajectory.
    Geodesic(GeodesicArgs),
    /// Integrate the Jacobi flow and emit (t, x, v, J, Jdot, nablaJ).
    Jacobi(JacobiArgs),
    /// Evaluate the curvature operator R(u, v) w at a point, both routes.
    Curvature(CurvatureArgs),
    /// Evaluate the torsion Tor(u, v) at a point, both routes.
    Torsion(TorsionArgs),
    /// Run the named verification suites.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Model kind: euclidean | sphere | half-plane | torsion-demo | custom
    #[arg(long)]
    model: Option<String>,
    /// Chart dimension (inferred from --x0 when omitted)
    #[arg(long)]
    dim: Option<usize>,
    /// Sphere radius
    #[arg(long)]
    radius: Option<f64>,
    /// Torsion strength of the torsion demo model
    #[arg(long)]
    beta: Option<f64>,
    /// JSON model config file; overrides the flags above
    #[arg(long, value_name = "FILE")]
    metric_file: Option<PathBuf>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file path (summary only when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
}

#[derive(Args)]
struct GeodesicArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Start point, comma-separated
    #[arg(long, allow_hyphen_values = true)]
    x0: String,
    /// Start velocity, comma-separated
    #[arg(long, allow_hyphen_values = true)]
    v0: String,
    #[arg(long = "t-max")]
    t_max: f64,
    /// Integration step
    #[arg(long, default_value_t = 1e-3)]
    h: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct JacobiArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, allow_hyphen_values = true)]
    x0: String,
    #[arg(long, allow_hyphen_values = true)]
    v0: String,
    /// Initial deviation J(0), comma-separated
    #[arg(long = "J0", allow_hyphen_values = true)]
    j0: String,
    /// Initial covariant derivative of J, comma-separated
    #[arg(long = "nablaJ0", allow_hyphen_values = true)]
    nabla_j0: String,
    #[arg(long = "t-max")]
    t_max: f64,
    #[arg(long, default_value_t = 1e-3)]
    h: f64,
    /// When set, cross-check J against the central-difference geodesic
    /// variation with this offset and report the largest mismatch
    #[arg(long = "s-eps")]
    s_eps: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CurvatureArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Evaluation point
    #[arg(long, allow_hyphen_values = true)]
    x0: String,
    /// First curvature slot u
    #[arg(long, allow_hyphen_values = true)]
    v0: String,
    /// Second curvature slot v
    #[arg(long = "J0", allow_hyphen_values = true)]
    j0: String,
    /// Section slot w (defaults to the second slot, giving R(u, v) v)
    #[arg(long = "nablaJ0", allow_hyphen_values = true)]
    nabla_j0: Option<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct TorsionArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, allow_hyphen_values = true)]
    x0: String,
    /// First torsion slot u
    #[arg(long, allow_hyphen_values = true)]
    v0: String,
    /// Second torsion slot v
    #[arg(long = "J0", allow_hyphen_values = true)]
    j0: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite to run: double_tangent | connection | spray_flow | all
    #[arg(long, default_value = "all")]
    suite: String,
    /// Seed for the probe generators
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Tolerance override, repeatable: --tol <check-name>=<value>
    #[arg(long, value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Thread count for the check fan-out
    #[arg(long)]
    parallel: Option<usize>,
    /// Write the report to a file as well
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Usage-level failure: prints to stderr and exits 64.
struct UsageError(String);

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Geodesic(args) => cmd_geodesic(args),
        Command::Jacobi(args) => cmd_jacobi(args),
        Command::Curvature(args) => cmd_curvature(args),
        Command::Torsion(args) => cmd_torsion(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            eprintln!("usage error: {msg}");
            EXIT_USAGE
        }
    }
}

fn parse_vector(flag: &str, text: &str) -> Result<Vec<f64>, UsageError> {
    let values: Result<Vec<f64>, _> = text.split(',').map(|c| c.trim().parse::<f64>()).collect();
    match values {
        Ok(v) if !v.is_empty() && v.iter().all(|c| c.is_finite()) => Ok(v),
        _ => Err(UsageError(format!(
            "--{flag} expects comma-separated finite reals, got `{text}`"
        ))),
    }
}

fn check_len(flag: &str, v: &[f64], dim: usize) -> Result<(), UsageError> {
    if v.len() == dim {
        Ok(())
    } else {
        Err(UsageError(format!(
            "--{flag} has {} components but the model dimension is {dim}",
            v.len()
        )))
    }
}

fn check_step(h: f64, t_max: f64) -> Result<(), UsageError> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(UsageError(format!(
            "--h must be positive and finite, got {h}"
        )));
    }
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(UsageError(format!(
            "--t-max must be non-negative and finite, got {t_max}"
        )));
    }
    Ok(())
}

fn build_model(args: &ModelArgs, dim_hint: Option<usize>) -> Result<ManifoldModel, UsageError> {
    if let Some(path) = &args.metric_file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("--metric-file {}: {e}", path.display())))?;
        let spec = ModelSpec::from_json(&text)
            .map_err(|e| UsageError(format!("--metric-file {}: {e}", path.display())))?;
        return build(&spec).map_err(|e| UsageError(e.to_string()));
    }
    let kind_text = args
        .model
        .as_deref()
        .ok_or_else(|| UsageError("--model (or --metric-file) is required".to_string()))?;
    let kind = match kind_text {
        "euclidean" => ModelKind::Euclidean,
        "sphere" => ModelKind::Sphere,
        "half-plane" => ModelKind::HalfPlane,
        "torsion-demo" => ModelKind::TorsionDemo,
        "custom" => {
            return Err(UsageError(
                "--model custom requires --metric-file with a model config".to_string(),
            ))
        }
        other => {
            return Err(UsageError(format!(
                "--model `{other}` is not one of euclidean, sphere, half-plane, torsion-demo, custom"
            )))
        }
    };
    let dim = args.dim.or(dim_hint).ok_or_else(|| {
        UsageError("--dim is required when it cannot be inferred from --x0".to_string())
    })?;
    let mut spec = ModelSpec::new(kind, dim);
    spec.params.radius = args.radius;
    spec.params.beta = args.beta;
    build(&spec).map_err(|e| UsageError(e.to_string()))
}

fn fmt_vec(v: &[f64]) -> String {
    let cells: Vec<String> = v.iter().map(|c| format!("{c}")).collect();
    format!("({})", cells.join(", "))
}

fn write_output(out: &OutputArgs, columns: &[String], rows: &[Vec<f64>]) -> Result<(), UsageError> {
    if let Some(path) = &out.out {
        let text = match out.format.as_str() {
            "json" => output::to_json(columns, rows),
            _ => output::to_csv(columns, rows),
        };
        std::fs::write(path, text)
            .map_err(|e| UsageError(format!("--out {}: {e}", path.display())))?;
    }
    Ok(())
}

fn runtime(err: jacobiflow::Error) -> i32 {
    eprintln!("error: {err}");
    EXIT_RUNTIME
}

fn cmd_geodesic(args: GeodesicArgs) -> Result<i32, UsageError> {
    let x0 = parse_vector("x0", &args.x0)?;
    let v0 = parse_vector("v0", &args.v0)?;
    check_step(args.h, args.t_max)?;
    let model = build_model(&args.model, Some(x0.len()))?;
    check_len("x0", &x0, model.dim)?;
    check_len("v0", &v0, model.dim)?;

    let start = TangentVector::from_f64(&x0, &v0);
    let traj = match integrate_geodesic(&model, &start, args.t_max, args.h) {
        Ok(t) => t,
        Err(e) => return Ok(runtime(e)),
    };
    let rows = output::geodesic_rows(&traj);
    write_output(&args.output, &output::geodesic_columns(model.dim), &rows)?;
    let end = traj.last();
    println!(
        "t={} x={} v={}",
        traj.times.last().unwrap(),
        fmt_vec(&end.base),
        fmt_vec(&end.vec)
    );
    Ok(EXIT_OK)
}

fn cmd_jacobi(args: JacobiArgs) -> Result<i32, UsageError> {
    let x0 = parse_vector("x0", &args.x0)?;
    let v0 = parse_vector("v0", &args.v0)?;
    let j0 = parse_vector("J0", &args.j0)?;
    let nabla_j0 = parse_vector("nablaJ0", &args.nabla_j0)?;
    check_step(args.h, args.t_max)?;
    if let Some(s) = args.s_eps {
        if !(s > 0.0) || !s.is_finite() {
            return Err(UsageError(format!(
                "--s-eps must be positive and finite, got {s}"
            )));
        }
    }
    let model = build_model(&args.model, Some(x0.len()))?;
    for (flag, v) in [("x0", &x0), ("v0", &v0), ("J0", &j0), ("nablaJ0", &nabla_j0)] {
        check_len(flag, v, model.dim)?;
    }

    let y0 = match JacobiState::from_covariant(&model, &x0, &v0, &j0, &nabla_j0) {
        Ok(y) => y,
        Err(e) => return Ok(runtime(e)),
    };
    let traj = match integrate_jacobi_flow(&model, &y0, args.t_max, args.h) {
        Ok(t) => t,
        Err(e) => return Ok(runtime(e)),
    };
    let rows = match output::jacobi_rows(&model, &traj) {
        Ok(r) => r,
        Err(e) => return Ok(runtime(e)),
    };
    write_output(&args.output, &output::jacobi_columns(model.dim), &rows)?;

    let end = traj.states.last().unwrap();
    let mut summary = format!(
        "t={} final J = {} Jdot = {}",
        traj.times.last().unwrap(),
        fmt_vec(&end.j),
        fmt_vec(&end.j_dot)
    );
    if let Some(s_eps) = args.s_eps {
        let x_of_s = |s: f64| {
            TangentVector::new(
                (0..model.dim).map(|i| x0[i] + s * y0.j[i]).collect(),
                (0..model.dim).map(|i| v0[i] + s * y0.j_dot[i]).collect(),
            )
        };
        match variation_oracle(&model, x_of_s, args.t_max, args.h, s_eps) {
            Ok(varia) => {
                let mismatch = traj
                    .states
                    .iter()
                    .zip(&varia.states)
                    .map(|(a, b)| linalg::max_abs_diff(&a.j, b))
                    .fold(0.0f64, f64::max);
                summary.push_str(&format!(" variation-mismatch={mismatch:e}"));
            }
            Err(e) => return Ok(runtime(e)),
        }
    }
    println!("{summary}");
    Ok(EXIT_OK)
}

fn cmd_curvature(args: CurvatureArgs) -> Result<i32, UsageError> {
    let x0 = parse_vector("x0", &args.x0)?;
    let u = parse_vector("v0", &args.v0)?;
    let v = parse_vector("J0", &args.j0)?;
    let w = match &args.nabla_j0 {
        Some(text) => parse_vector("nablaJ0", text)?,
        None => v.clone(),
    };
    let model = build_model(&args.model, Some(x0.len()))?;
    for (flag, vec) in [("x0", &x0), ("v0", &u), ("J0", &v), ("nablaJ0", &w)] {
        check_len(flag, vec, model.dim)?;
    }

    let operator = match curvature_operator(&model, &x0, &u, &v, &w) {
        Ok(r) => r,
        Err(e) => return Ok(runtime(e)),
    };
    let xf = ConstMap::new(&u);
    let yf = ConstMap::new(&v);
    let sf = ConstMap::new(&w);
    let commutator = match curvature_commutator_oracle(&model, &xf, &yf, &sf, &x0) {
        Ok(r) => r,
        Err(e) => return Ok(runtime(e)),
    };
    let defect = linalg::max_abs_diff(&operator, &commutator);

    let mut columns: Vec<String> = (1..=model.dim).map(|i| format!("R{i}")).collect();
    columns.push("route_defect".to_string());
    let mut row = operator.clone();
    row.push(defect);
    write_output(&args.output, &columns, &[row])?;

    println!("R(u,v)w = {} route-defect={defect:e}", fmt_vec(&operator));
    Ok(EXIT_OK)
}

fn cmd_torsion(args: TorsionArgs) -> Result<i32, UsageError> {
    let x0 = parse_vector("x0", &args.x0)?;
    let u = parse_vector("v0", &args.v0)?;
    let v = parse_vector("J0", &args.j0)?;
    let model = build_model(&args.model, Some(x0.len()))?;
    for (flag, vec) in [("x0", &x0), ("v0", &u), ("J0", &v)] {
        check_len(flag, vec, model.dim)?;
    }

    let tor = match torsion(&model, &x0, &u, &v) {
        Ok(t) => t,
        Err(e) => return Ok(runtime(e)),
    };
    let xf = ConstMap::new(&u);
    let yf = ConstMap::new(&v);
    let op = match torsion_operator_route(&model, &xf, &yf, &x0) {
        Ok(t) => t,
        Err(e) => return Ok(runtime(e)),
    };
    let defect = linalg::max_abs_diff(&tor, &op);

    let mut columns: Vec<String> = (1..=model.dim).map(|i| format!("Tor{i}")).collect();
    columns.push("route_defect".to_string());
    let mut row = tor.clone();
    row.push(defect);
    write_output(&args.output, &columns, &[row])?;

    println!("Tor(u,v) = {} route-defect={defect:e}", fmt_vec(&tor));
    Ok(EXIT_OK)
}

fn cmd_verify(args: VerifyArgs) -> Result<i32, UsageError> {
    let suite: Suite = args
        .suite
        .parse()
        .map_err(|e: jacobiflow::Error| UsageError(e.to_string()))?;
    let mut tol = BTreeMap::new();
    for entry in &args.tol {
        let (name, value) = entry
            .split_once('=')
            .ok_or_else(|| UsageError(format!("--tol expects NAME=VALUE, got `{entry}`")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| UsageError(format!("--tol {entry}: `{value}` is not a number")))?;
        tol.insert(name.to_string(), value);
    }
    if let Some(n) = args.parallel {
        if n == 0 {
            return Err(UsageError("--parallel must be at least 1".to_string()));
        }
    }
    let cfg = VerifyConfig {
        seed: args.seed,
        tol,
    };
    let reports = with_threads(args.parallel, || run_suite(suite, &cfg));
    let text = render_report(&reports, args.seed);
    print!("{text}");
    if let Some(path) = &args.out {
        std::fs::write(path, &text)
            .map_err(|e| UsageError(format!("--out {}: {e}", path.display())))?;
    }
    Ok(if all_passed(&reports) {
        EXIT_OK
    } else {
        EXIT_VERIFY
    })
}
