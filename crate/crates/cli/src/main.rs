//! `fracdual`: evaluate fractional operators, check duality and
//! integration-by-parts identities, and minimize variational problems.
//!
//! Exit codes: 0 on success or a passing verdict, 1 on a failing verdict or
//! a computation error, 2 on a usage error.

mod config;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use fracdual::duality::{check_duality_with, IdentityReport};
use fracdual::ibp::{check_ibp, doubling_sizes, ibp_study, IbpResidual, IbpStudy, IbpVariant};
use fracdual::varcalc::{
    diagnose_tonelli_with, friction_problem, minimize, minimize_dual, norm_bound_sweep, BoundaryConditions,
    LagrangianSpec, MinimizationResult, NormBoundReport, TonelliReport, VariationalProblem,
};
use fracdual::{
    apply_with, ApplyOptions, ClosedFormFn, FracOrder, FuncRep, Grid, Interval, OperatorKind, OperatorResult,
    PathChoice,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "fracdual", version, about = "Left and right fractional operators, duality and variational checks")]
struct Cli {
    /// File of `key=value` lines using the flag names; flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Apply an operator to a closed-form function and print node values
    Eval(EvalArgs),
    /// Compare an operator with its evaluation through the dual function
    CheckDuality(DualityArgs),
    /// Check an integration-by-parts formula, optionally over a grid study
    CheckIbp(IbpArgs),
    /// Check the L^r bound of the right RL integral on random functions
    CheckBound(BoundArgs),
    /// Minimize a right-fractional variational problem
    Minimize(MinimizeArgs),
    /// Minimize the linear-friction demo and print its trajectory
    DemoFriction(FrictionArgs),
}

#[derive(Args)]
struct Domain {
    /// Left endpoint
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    a: f64,
    /// Right endpoint
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    b: f64,
    /// Number of grid points
    #[arg(long, default_value_t = 129)]
    n: usize,
}

impl Domain {
    fn interval(&self) -> Result<Interval, Failure> {
        Interval::new(self.a, self.b).map_err(usage)
    }

    fn grid(&self) -> Result<Grid, Failure> {
        Grid::new(self.interval()?, self.n).map_err(usage)
    }
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum PathArg {
    Auto,
    Numeric,
}

impl From<PathArg> for PathChoice {
    fn from(p: PathArg) -> Self {
        match p {
            PathArg::Auto => PathChoice::Auto,
            PathArg::Numeric => PathChoice::Numeric,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Left,
    Right,
}

fn parse_func(s: &str) -> Result<ClosedFormFn, String> {
    fracdual::parse_funcspec(s).map_err(|e| e.to_string())
}

fn parse_op(s: &str) -> Result<OperatorKind, String> {
    s.parse().map_err(|e: fracdual::Error| e.to_string())
}

fn parse_lagrangian(s: &str) -> Result<LagrangianSpec, String> {
    s.parse().map_err(|e: fracdual::Error| e.to_string())
}

fn parse_study(s: &str) -> Result<(usize, usize), String> {
    let bad = || format!("expected LO:HI grid sizes with 3 <= LO <= HI, got '{s}'");
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo: usize = lo.parse().map_err(|_| bad())?;
    let hi: usize = hi.parse().map_err(|_| bad())?;
    if lo < 3 || hi < lo {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn parse_r(s: &str) -> Result<f64, String> {
    match s {
        "inf" => Ok(f64::INFINITY),
        _ => s.parse::<f64>().map_err(|e| format!("bad norm exponent '{s}': {e}")),
    }
}

#[derive(Args)]
struct EvalArgs {
    /// Operator, e.g. left-caputo or right-rl-integral
    #[arg(long, value_parser = parse_op)]
    op: OperatorKind,
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    /// Function spec, e.g. pow:beta=2 or sin:omega=3
    #[arg(long, value_parser = parse_func)]
    f: ClosedFormFn,
    #[command(flatten)]
    domain: Domain,
    #[arg(long, value_enum, default_value = "auto")]
    path: PathArg,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct DualityArgs {
    #[arg(long, value_parser = parse_op)]
    op: OperatorKind,
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, value_parser = parse_func)]
    f: ClosedFormFn,
    #[command(flatten)]
    domain: Domain,
    /// Residual tolerance; defaults by method pair
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    native_path: PathArg,
    #[arg(long, value_enum, default_value = "auto")]
    dual_path: PathArg,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct IbpArgs {
    #[arg(long, value_enum)]
    variant: VariantArg,
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, value_parser = parse_func)]
    f: ClosedFormFn,
    #[arg(long, value_parser = parse_func)]
    g: ClosedFormFn,
    #[command(flatten)]
    domain: Domain,
    /// Grid-doubling study from LO to HI points, e.g. 129:2049
    #[arg(long, value_parser = parse_study, value_name = "LO:HI")]
    study: Option<(usize, usize)>,
    /// Residual tolerance for a single check
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Smallest acceptable observed order in a study
    #[arg(long, default_value_t = 1.0)]
    min_order: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BoundArgs {
    /// Orders, comma separated
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75")]
    alphas: Vec<f64>,
    /// Norm exponents, comma separated; `inf` for the max norm
    #[arg(long, value_delimiter = ',', value_parser = parse_r, default_value = "1,2,inf")]
    r: Vec<f64>,
    /// Number of random functions
    #[arg(long, default_value_t = 50)]
    count: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    domain: Domain,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct MinimizeArgs {
    /// Terms separated by `;`, e.g. `vel2:0.5;cap2:0.05;pot:-1:poly:c=0.5,0,0`
    #[arg(long, value_parser = parse_lagrangian)]
    lagrangian: LagrangianSpec,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    alpha: f64,
    /// Integrability exponent
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Prescribed u(a); free when omitted
    #[arg(long, allow_negative_numbers = true)]
    ua: Option<f64>,
    /// Prescribed u(b); free when omitted
    #[arg(long, allow_negative_numbers = true)]
    ub: Option<f64>,
    #[command(flatten)]
    domain: Domain,
    /// Minimize the reflected dual problem instead
    #[arg(long, action = ArgAction::SetTrue)]
    dual: bool,
    /// Attach the existence-hypothesis probes to the report
    #[arg(long, action = ArgAction::SetTrue)]
    diagnose: bool,
    /// Seed for the probes
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Also write the minimizer as `x,value` CSV to this file
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct FrictionArgs {
    #[arg(long, default_value_t = 129)]
    n: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    output: Output,
}

enum Failure {
    Usage(String),
    Failed(String),
}

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn failed(e: impl ToString) -> Failure {
    Failure::Failed(e.to_string())
}

/// Outcome of a command: whether its verdict passed.
type Run = Result<bool, Failure>;

fn order(alpha: f64) -> Result<FracOrder, Failure> {
    FracOrder::new(alpha).map_err(usage)
}

fn closed(f: ClosedFormFn, domain: &Domain) -> Result<FuncRep, Failure> {
    FuncRep::closed(f, domain.interval()?).map_err(usage)
}

fn emit(output: &Output, text: &str) -> Result<(), Failure> {
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(|e| failed(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn node_csv(r: &OperatorResult) -> String {
    let mut s = String::from("x,value,flag\n");
    for (i, (x, v)) in r.grid.nodes().iter().zip(&r.values).enumerate() {
        let flag = if r.is_flagged(i) { "divergent" } else { "" };
        writeln!(s, "{x},{v},{flag}").unwrap();
    }
    s
}

fn trajectory_csv(r: &MinimizationResult) -> String {
    let mut s = String::from("x,value\n");
    for (x, v) in r.minimizer.grid().nodes().iter().zip(r.minimizer.values()) {
        writeln!(s, "{x},{v}").unwrap();
    }
    s
}

fn run_eval(args: EvalArgs) -> Run {
    let grid = args.domain.grid()?;
    let f = closed(args.f, &args.domain)?;
    let opts = ApplyOptions {
        path: args.path.into(),
        ..ApplyOptions::default()
    };
    let r = apply_with(args.op, order(args.alpha)?, &f, &grid, &opts).map_err(failed)?;
    let text = match args.format {
        Format::Csv => node_csv(&r),
        Format::Json => json(&r),
    };
    emit(&args.output, &text)?;
    Ok(true)
}

fn run_duality(args: DualityArgs) -> Run {
    let grid = args.domain.grid()?;
    let f = closed(args.f, &args.domain)?;
    let order = order(args.alpha)?;
    if let Some(t) = args.tol {
        if !(t >= 0.0) {
            return Err(usage(format!("tolerance {t} must be non-negative")));
        }
    }
    let rep: IdentityReport =
        check_duality_with(args.op, order, &f, &grid, args.tol, args.native_path.into(), args.dual_path.into());
    emit(&args.output, &json(&rep))?;
    Ok(rep.pass)
}

#[derive(Serialize)]
struct IbpReport {
    #[serde(flatten)]
    residual: IbpResidual,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct IbpStudyReport {
    #[serde(flatten)]
    study: IbpStudy,
    min_order_required: f64,
    pass: bool,
}

fn run_ibp(args: IbpArgs) -> Run {
    let variant = match args.variant {
        VariantArg::Left => IbpVariant::Left,
        VariantArg::Right => IbpVariant::Right,
    };
    let order = order(args.alpha)?;
    let f = closed(args.f, &args.domain)?;
    let g = closed(args.g, &args.domain)?;
    if let Some((lo, hi)) = args.study {
        let sizes = doubling_sizes(lo, hi);
        if sizes.len() < 2 {
            return Err(usage(format!("study {lo}:{hi} holds a single grid; need HI >= 2 LO - 1")));
        }
        let study = ibp_study(variant, order, &f, &g, &sizes).map_err(failed)?;
        let pass = study.min_order() >= args.min_order;
        let text = match args.format {
            Format::Json => json(&IbpStudyReport {
                study,
                min_order_required: args.min_order,
                pass,
            }),
            Format::Csv => {
                let mut s = String::from("n_points,residual,observed_order\n");
                for (i, (n, r)) in study.n_points.iter().zip(&study.residuals).enumerate() {
                    let p = if i == 0 { String::new() } else { study.observed_orders[i - 1].to_string() };
                    writeln!(s, "{n},{r},{p}").unwrap();
                }
                s
            }
        };
        emit(&args.output, &text)?;
        return Ok(pass);
    }
    let grid = args.domain.grid()?;
    let residual = check_ibp(variant, order, &f, &g, &grid).map_err(failed)?;
    let pass = residual.residual.abs() <= args.tol;
    let text = match args.format {
        Format::Json => json(&IbpReport {
            residual,
            tolerance: args.tol,
            pass,
        }),
        Format::Csv => format!(
            "lhs,rhs_integral,boundary_sum,residual\n{},{},{},{}\n",
            residual.lhs, residual.rhs_integral, residual.boundary_sum, residual.residual
        ),
    };
    emit(&args.output, &text)?;
    Ok(pass)
}

#[derive(Serialize)]
struct BoundSweepReport {
    alphas: Vec<f64>,
    /// `null` stands for the max norm.
    r: Vec<f64>,
    count: usize,
    seed: u64,
    failures: usize,
    pass: bool,
    reports: Vec<NormBoundReport>,
}

fn run_bound(args: BoundArgs) -> Run {
    let grid = args.domain.grid()?;
    for &alpha in &args.alphas {
        order(alpha)?;
    }
    if let Some(r) = args.r.iter().find(|r| !(**r >= 1.0)) {
        return Err(usage(format!("norm exponent {r} must be >= 1")));
    }
    let reports = norm_bound_sweep(&grid, &args.alphas, &args.r, args.count, args.seed).map_err(failed)?;
    let failures = reports.iter().filter(|r| !r.pass).count();
    let rep = BoundSweepReport {
        alphas: args.alphas,
        r: args.r,
        count: args.count,
        seed: args.seed,
        failures,
        pass: failures == 0,
        reports,
    };
    emit(&args.output, &json(&rep))?;
    Ok(rep.pass)
}

#[derive(Serialize)]
struct MinimizeReport {
    #[serde(flatten)]
    result: MinimizationResult,
    lagrangian: String,
    dual: bool,
    note: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    tonelli: Option<TonelliReport>,
}

const DUAL_NOTE: &str = "the dual problem lives on [-b, -a] with left operators anchored at -b, the dual Lagrangian L*(x1, x2, x3, x4, s) = L(x1, x2, -x3, x4, -s) and admissible set {u*: u admissible}";

fn run_minimize(args: MinimizeArgs) -> Run {
    let grid = args.domain.grid()?;
    let bc = BoundaryConditions {
        left: args.ua,
        right: args.ub,
    };
    let prob = VariationalProblem::new(args.lagrangian, grid, order(args.alpha)?, args.p, bc).map_err(usage)?;
    let result = if args.dual { minimize_dual(&prob) } else { minimize(&prob) }.map_err(failed)?;
    let converged = result.converged;
    let csv = trajectory_csv(&result);
    if let Some(path) = &args.csv {
        std::fs::write(path, &csv).map_err(|e| failed(format!("cannot write {}: {e}", path.display())))?;
    }
    let text = match args.format {
        Format::Csv => csv,
        Format::Json => json(&MinimizeReport {
            lagrangian: prob.lagrangian.to_string(),
            dual: args.dual,
            note: if args.dual {
                DUAL_NOTE.into()
            } else {
                "right-fractional problem on [a, b]".into()
            },
            tonelli: args.diagnose.then(|| diagnose_tonelli_with(&prob, args.seed)),
            result,
        }),
    };
    emit(&args.output, &text)?;
    Ok(converged)
}

fn run_friction(args: FrictionArgs) -> Run {
    let prob = friction_problem(args.n).map_err(usage)?;
    let result = minimize(&prob).map_err(failed)?;
    let converged = result.converged;
    let text = match args.format {
        Format::Csv => trajectory_csv(&result),
        Format::Json => json(&MinimizeReport {
            lagrangian: prob.lagrangian.to_string(),
            dual: false,
            note: "linear friction: m = 1, gamma = 0.1, alpha = 1/2, u(0) = 1, u(1) = 0".into(),
            tonelli: None,
            result,
        }),
    };
    emit(&args.output, &text)?;
    Ok(converged)
}

/// Caps rayon's global pool at `FRACDUAL_THREADS` when set.
fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("FRACDUAL_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("FRACDUAL_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(failed)
}

fn parse_cli() -> Result<Cli, Failure> {
    let argv = config::expand(std::env::args_os().collect()).map_err(usage)?;
    let cmd = Cli::command().mut_subcommands(|s| s.args_override_self(true));
    let matches = match cmd.try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) if !e.use_stderr() => {
            // help and version
            print!("{e}");
            std::process::exit(0);
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            return Err(usage(first.trim_start_matches("error: ")));
        }
    };
    Cli::from_arg_matches(&matches).map_err(usage)
}

fn main() -> ExitCode {
    let outcome = parse_cli().and_then(|cli| {
        configure_threads()?;
        match cli.cmd {
            Cmd::Eval(a) => run_eval(a),
            Cmd::CheckDuality(a) => run_duality(a),
            Cmd::CheckIbp(a) => run_ibp(a),
            Cmd::CheckBound(a) => run_bound(a),
            Cmd::Minimize(a) => run_minimize(a),
            Cmd::DemoFriction(a) => run_friction(a),
        }
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Failed(msg)) => {
            eprintln!("fracdual: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("fracdual: usage: {msg}");
            ExitCode::from(2)
        }
    }
}
