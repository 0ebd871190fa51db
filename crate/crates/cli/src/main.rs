//! Command-line front end: density grids, identity verification, expected
//! counts, convergence tables and starbody sampling.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use mahler_kernels::complex_kernel::{diagonal_truncation_radius, expected_count_complex};
use mahler_kernels::density::{Density, DensityRegime};
use mahler_kernels::grid::GridSpec;
use mahler_kernels::limits::{converge, sup_errors, LimitKind, LimitParams, ScalingFrame};
use mahler_kernels::linalg::{QuadratureSpec, Region};
use mahler_kernels::real_kernel::{
    expected_complex_pairs, expected_real_in, expected_real_in_quadrature, expected_real_out, real_truncation_radius,
    RealKernel,
};
use mahler_kernels::sampler::{
    roots_statistics, sample_starbody, starbody_dimension, starbody_lambda, CountRegion, DEFAULT_REALNESS_TOL,
};
use mahler_kernels::verify::{self, VerifyConfig};
use mahler_kernels::{EnsembleParams, Error, Field, C64};

use output::{sidecar_path, write_atomic, RunConfig};

const EXIT_VALIDATION: u8 = 1;
const EXIT_NONCONVERGENCE: u8 = 2;
const EXIT_VERIFY_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "mahler-kernels", version, about = "Kernels, counts and samplers for reciprocal Mahler ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Density of nonreal zeros on a rectangular grid (CSV plus JSON sidecar).
    DensityGrid(DensityArgs),
    /// Run the identity suite; exits with status 3 if any check fails.
    Verify(VerifyArgs),
    /// Expected zero counts from closed forms and quadrature.
    Expected(ExpectedArgs),
    /// Finite-N kernels against their scaling limits (CSV plus JSON sidecar).
    Converge(ConvergeArgs),
    /// Exact draws from the polynomial starbody (JSON lines plus JSON sidecar).
    Sample(SampleArgs),
}

#[derive(Args, Serialize, Clone)]
struct EnsembleArgs {
    /// Degree N.
    #[arg(long)]
    n: usize,
    /// Weight exponent s (> N).
    #[arg(long)]
    s: f64,
    /// Coefficient field: real or complex.
    #[arg(long, default_value = "real", value_parser = parse_field)]
    #[serde(serialize_with = "output::field_name")]
    field: Field,
}

impl EnsembleArgs {
    fn params(&self) -> anyhow::Result<EnsembleParams> {
        Ok(EnsembleParams::new(self.n, self.s, self.field)?)
    }
}

#[derive(Args, Serialize)]
struct DensityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    ensemble: EnsembleArgs,
    /// finite, limit-bulk, limit-edge or limit-exterior.
    #[arg(long)]
    regime: String,
    /// Lattice as x0,x1,y0,y1,nx,ny.
    #[arg(long)]
    grid: String,
    /// Override the limit parameter λ (bulk, edge) instead of N/s.
    #[arg(long)]
    lambda: Option<f64>,
    /// Override the limit parameter c (exterior) instead of s − N.
    #[arg(long)]
    c: Option<f64>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 12.0)]
    s: f64,
    /// Quadrature tolerance of the numerical routes.
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
    /// Sensitivity control: scale π_INDEX by 1 + REL, as INDEX:REL.
    #[arg(long, hide = true)]
    perturb: Option<String>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ExpectedArgs {
    #[command(flatten)]
    #[serde(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ConvergeArgs {
    /// exterior, bulk or edge.
    #[arg(long)]
    regime: String,
    /// complex-k, kappa, kappa-eps, eps-kappa-eps, kappa-eps-general or eps-kappa-eps-general.
    #[arg(long, default_value = "complex-k")]
    kind: String,
    /// Strictly increasing degrees, comma separated.
    #[arg(long, default_value = "16,32,64")]
    ns: String,
    /// Bulk and edge: s = N / lambda.
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    /// Exterior: s = N + c.
    #[arg(long, default_value_t = 2.0)]
    c: f64,
    /// Bulk centre x in (−2, 2).
    #[arg(long, default_value_t = 0.0)]
    x: f64,
    /// Point pair as "a;b" with complex literals such as 0.3+0.1i; repeatable.
    #[arg(long = "point")]
    points: Vec<String>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of samples.
    #[arg(long, default_value_t = 1000)]
    count: usize,
    /// Relative realness tolerance for root classification.
    #[arg(long, default_value_t = DEFAULT_REALNESS_TOL)]
    tol: f64,
    /// JSON-lines output path.
    #[arg(long)]
    out: PathBuf,
}

fn parse_field(s: &str) -> Result<Field, String> {
    match s {
        "real" => Ok(Field::Real),
        "complex" => Ok(Field::Complex),
        other => Err(format!("expected 'real' or 'complex', got '{other}'")),
    }
}

fn parse_grid(s: &str) -> anyhow::Result<GridSpec> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 6 {
        bail!("--grid needs x0,x1,y0,y1,nx,ny, got '{s}'");
    }
    let f = |i: usize| parts[i].parse::<f64>().with_context(|| format!("bad grid bound '{}'", parts[i]));
    let u = |i: usize| parts[i].parse::<usize>().with_context(|| format!("bad grid count '{}'", parts[i]));
    Ok(GridSpec::new(f(0)?, f(1)?, f(2)?, f(3)?, u(4)?, u(5)?)?)
}

fn parse_complex(s: &str) -> anyhow::Result<C64> {
    C64::from_str(s.trim()).map_err(|_| anyhow!("bad complex number '{s}'"))
}

fn parse_tol(tol: f64) -> anyhow::Result<f64> {
    if !(tol > 0.0 && tol < 1.0) {
        bail!("--tol must lie in (0, 1), got {tol}");
    }
    Ok(tol)
}

fn emit_json(value: &Value, out: Option<&PathBuf>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_density(args: &DensityArgs) -> anyhow::Result<()> {
    let params = args.ensemble.params()?;
    let regime: DensityRegime = args.regime.parse()?;
    let grid = parse_grid(&args.grid)?;
    let mut density = Density::new(&params, regime)?;
    match (args.lambda, args.c) {
        (Some(_), Some(_)) => bail!("--lambda and --c are mutually exclusive"),
        (Some(l), None) => density = density.with_limit(LimitParams::with_lambda(l)?)?,
        (None, Some(c)) => density = density.with_limit(LimitParams::with_c(c)?)?,
        (None, None) => {}
    }
    let values = density.grid(&grid)?;
    let mut csv = String::from("x,y,value\n");
    for v in &values {
        csv.push_str(&format!("{},{},{}\n", output::num(v.x), output::num(v.y), output::num(v.value)));
    }
    write_atomic(&args.out, csv.as_bytes())?;
    let tol = 1e-12;
    let truncation = match (regime, params.field()) {
        (DensityRegime::Finite, Field::Complex) => Some(diagonal_truncation_radius(&params, tol)?),
        (DensityRegime::Finite, Field::Real) => Some(real_truncation_radius(&params, tol)?),
        _ => None,
    };
    let finite: Vec<f64> = values.iter().map(|v| v.value).filter(|v| v.is_finite()).collect();
    let meta = json!({
        "config": RunConfig::new("density-grid", args, &params),
        "grid": grid,
        "limit_params": density.limit_params(),
        "truncation_radius": truncation,
        "truncation_tol": truncation.map(|_| tol),
        "points": values.len(),
        "min": finite.iter().cloned().fold(f64::INFINITY, f64::min),
        "max": finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    });
    emit_json(&meta, Some(&sidecar_path(&args.out)))
}

fn parse_perturbation(s: &str) -> anyhow::Result<(usize, f64)> {
    let (i, r) = s.split_once(':').ok_or_else(|| anyhow!("--perturb needs INDEX:REL, got '{s}'"))?;
    Ok((i.trim().parse()?, r.trim().parse()?))
}

/// Returns whether every check passed.
fn run_verify(args: &VerifyArgs) -> anyhow::Result<bool> {
    let config = VerifyConfig {
        n: args.n,
        s: args.s,
        tol: parse_tol(args.tol)?,
        perturbation: args.perturb.as_deref().map(parse_perturbation).transpose()?,
    };
    let params = EnsembleParams::real(args.n, args.s)?;
    let report = verify::run(&config)?;
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    let value = json!({
        "config": RunConfig::new("verify", args, &params),
        "passed": report.passed,
        "checks_total": report.checks.len(),
        "checks_failed": failed,
        "max_residual_by_group": report.max_residual_by_group,
        "checks": report.checks,
    });
    emit_json(&value, args.out.as_ref())?;
    if !report.passed {
        eprintln!("verification failed: {failed} of {} checks", report.checks.len());
    }
    Ok(report.passed)
}

fn run_expected(args: &ExpectedArgs) -> anyhow::Result<()> {
    let params = args.ensemble.params()?;
    let spec = QuadratureSpec::default().with_tol(parse_tol(args.tol)?);
    spec.validate()?;
    let counts = match params.field() {
        Field::Real => {
            let kernel = RealKernel::new(params)?;
            let e_in = expected_real_in(&params)?;
            let e_in_q = expected_real_in_quadrature(&kernel, &spec)?;
            let e_out = expected_real_out(&kernel, &spec)?;
            let pairs = expected_complex_pairs(&kernel, &spec)?;
            let log_scale = -(1.0 - params.n() as f64 / params.s()).ln();
            json!({
                "E_in": e_in,
                "E_in_quadrature": e_in_q.value,
                "E_in_quadrature_error": e_in_q.error,
                "E_out": e_out.value,
                "E_out_error": e_out.error,
                "eout_log_ratio": e_out.value / log_scale,
                "E_complex_pairs": pairs.value,
                "total": e_in_q.value + e_out.value + 2.0 * pairs.value,
            })
        }
        Field::Complex => {
            let total = expected_count_complex(&params, &Region::WholePlane, &spec)?;
            json!({ "E_total": total.value, "E_total_error": total.error })
        }
    };
    emit_json(&json!({ "config": RunConfig::new("expected", args, &params), "counts": counts }), args.out.as_ref())
}

fn run_converge(args: &ConvergeArgs) -> anyhow::Result<()> {
    let kind: LimitKind = args.kind.parse()?;
    let tol = parse_tol(args.tol)?;
    let ns: Vec<usize> = args
        .ns
        .split(',')
        .map(|t| t.trim().parse::<usize>().with_context(|| format!("bad degree '{t}' in --ns")))
        .collect::<anyhow::Result<_>>()?;
    let (frame, lp) = match args.regime.as_str() {
        "exterior" => (ScalingFrame::Exterior, LimitParams::with_c(args.c)?),
        "bulk" => (ScalingFrame::bulk(args.x)?, LimitParams::with_lambda(args.lambda)?),
        "edge" => (ScalingFrame::Edge, LimitParams::with_lambda(args.lambda)?),
        other => bail!("unknown regime '{other}' (expected exterior, bulk or edge)"),
    };
    if args.regime != "exterior" && !(args.lambda > 0.0) {
        bail!("finite-N surrogates need λ > 0 (s = N/λ)");
    }
    let s_of = |n: usize| if args.regime == "exterior" { n as f64 + args.c } else { n as f64 / args.lambda };
    let sequence: Vec<EnsembleParams> =
        ns.iter().map(|&n| EnsembleParams::new(n, s_of(n), kind.field())).collect::<mahler_kernels::Result<_>>()?;
    let points: Vec<(C64, C64)> = if args.points.is_empty() {
        default_points(&frame, kind)
    } else {
        args.points
            .iter()
            .map(|p| {
                let (a, b) = p.split_once(';').ok_or_else(|| anyhow!("--point needs 'a;b', got '{p}'"))?;
                Ok((parse_complex(a)?, parse_complex(b)?))
            })
            .collect::<anyhow::Result<_>>()?
    };
    let rows = converge(&sequence, &frame, kind, &points, &lp, tol)?;
    let mut csv = String::from("n,s,regime,point,finite_re,finite_im,limit_re,limit_im,error\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.n,
            output::num(r.s),
            r.regime,
            r.point,
            output::num(r.finite.re),
            output::num(r.finite.im),
            output::num(r.limit.re),
            output::num(r.limit.im),
            output::num(r.error)
        ));
    }
    write_atomic(&args.out, csv.as_bytes())?;
    let sup: Vec<Value> = sup_errors(&rows).into_iter().map(|(n, e)| json!({ "n": n, "sup_error": e })).collect();
    let pts: Vec<Value> = points.iter().map(|(a, b)| json!({ "a": [a.re, a.im], "b": [b.re, b.im] })).collect();
    let meta = json!({
        "config": RunConfig::for_sequence("converge", args, &sequence),
        "frame": frame,
        "limit_params": lp,
        "points": pts,
        "sup_errors": sup,
    });
    emit_json(&meta, Some(&sidecar_path(&args.out)))
}

/// A real-argument pair and, where the kind allows it, a nonreal one.
fn default_points(frame: &ScalingFrame, kind: LimitKind) -> Vec<(C64, C64)> {
    let c = C64::new;
    match frame {
        ScalingFrame::Exterior => vec![(c(2.5, 0.0), c(3.0, 0.0)), (c(2.2, 0.6), c(-2.4, 0.3))]
            .into_iter()
            .filter(|(_, b)| !matches!(kind, LimitKind::KappaEps | LimitKind::EpsKappaEps) || b.im == 0.0)
            .collect(),
        _ => match kind {
            LimitKind::ComplexK | LimitKind::Kappa => vec![(c(0.3, 0.0), c(-0.5, 0.0)), (c(0.2, 0.1), c(0.7, -0.3))],
            _ => vec![(c(0.3, 0.0), c(1.1, 0.0)), (c(0.8, 0.0), c(0.2, 0.0))],
        },
    }
}

fn run_sample(args: &SampleArgs) -> anyhow::Result<()> {
    let params = args.ensemble.params()?;
    let tol = parse_tol(args.tol)?;
    if args.count == 0 {
        bail!("--count must be positive");
    }
    let batch = sample_starbody(&params, args.seed, args.count)?;
    let mut lines = String::new();
    for s in &batch.samples {
        lines.push_str(&serde_json::to_string(s)?);
        lines.push('\n');
    }
    write_atomic(&args.out, lines.as_bytes())?;
    // Finite stand-in for infinite bounds, which JSON cannot represent.
    const FAR: f64 = 1e300;
    let disk = |r: f64| Region::Disk { center: [0.0, 0.0], radius: r };
    let regions = match params.field() {
        Field::Real => vec![
            CountRegion::RealInterval { a: -2.0, b: 2.0 },
            CountRegion::RealInterval { a: -FAR, b: FAR },
            CountRegion::Nonreal { region: Region::Rectangle { x0: -FAR, x1: FAR, y0: 0.0, y1: FAR } },
            CountRegion::All { region: disk(2.0) },
        ],
        Field::Complex => vec![CountRegion::All { region: disk(1.0) }, CountRegion::All { region: disk(2.0) }],
    };
    let stats = roots_statistics(&batch.samples, &regions, tol)?;
    let meta = json!({
        "config": RunConfig::new("sample", args, &params),
        "starbody": {
            "lambda": starbody_lambda(&params),
            "dimension": starbody_dimension(&params),
            "envelope": batch.envelope,
            "proposals": batch.proposals,
            "acceptance_rate": batch.samples.len() as f64 / batch.proposals.max(1) as f64,
            "resampled": batch.resampled,
            "restarts": batch.restarts,
        },
        "statistics": stats,
    });
    emit_json(&meta, Some(&sidecar_path(&args.out)))
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("MAHLER_KERNELS_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        anyhow!("MAHLER_KERNELS_THREADS must be a positive integer, got '{raw}'")
    })?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::NonConvergence { .. } | Error::NoAcceptance) => EXIT_NONCONVERGENCE,
        _ => EXIT_VALIDATION,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_VALIDATION) } else { ExitCode::SUCCESS };
        }
    };
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::DensityGrid(a) => run_density(a).map(|()| true),
        Command::Verify(a) => run_verify(a),
        Command::Expected(a) => run_expected(a).map(|()| true),
        Command::Converge(a) => run_converge(a).map(|()| true),
        Command::Sample(a) => run_sample(a).map(|()| true),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFY_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
