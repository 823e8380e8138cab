use std::io::{self, BufWriter, Write};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use vstatic_core::battery::battery;
use vstatic_core::fd::DerivativePlan;
use vstatic_core::model::{build_model, ModelParams};
use vstatic_core::ode::{classify, integrate, OdeProblem};
use vstatic_core::report::SuiteSummary;
use vstatic_core::sampling::seed_from_env;
use vstatic_core::suite::{criterion_line, run_suite, SuiteConfig};
use vstatic_core::GeomError;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "vstatic", version, about = "Curvature identity checks for V-static metrics and warping-function ODEs")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the applicable identity battery on one model.
    Verify(VerifyArgs),
    /// Integrate or classify a warping-function ODE.
    Ode {
        #[command(subcommand)]
        action: OdeAction,
    },
    /// Run every acceptance criterion.
    Suite {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "A", allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    fiber: Option<String>,
    #[arg(long, default_value_t = 200)]
    grid: usize,
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum OdeAction {
    /// Print the trajectory as CSV.
    Solve(OdeArgs),
    /// Print the case label and the zeros of φ.
    Classify(OdeArgs),
}

#[derive(Args)]
struct OdeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long = "R", allow_negative_numbers = true)]
    r_curv: f64,
    #[arg(long, allow_negative_numbers = true)]
    lambda: f64,
    #[arg(long, allow_negative_numbers = true)]
    phi0: f64,
    #[arg(long, allow_negative_numbers = true)]
    dphi0: f64,
    #[arg(long)]
    r_max: f64,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
}

impl OdeArgs {
    fn problem(&self) -> OdeProblem {
        OdeProblem::new(self.n, self.r_curv, self.lambda, self.phi0, self.dphi0, self.r_max, self.step)
    }
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn verdict(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}

fn emit_json(summary: &SuiteSummary) -> ExitCode {
    println!("{}", serde_json::to_string_pretty(summary).expect("report serialises"));
    verdict(summary.overall_pass)
}

fn verify(args: VerifyArgs, seed: u64) -> ExitCode {
    if args.grid == 0 {
        return usage("grid must be ≥ 1");
    }
    if !(args.tol_scale > 0.0 && args.tol_scale.is_finite()) {
        return usage("tol-scale must be a positive finite number");
    }
    let params = ModelParams { n: args.n, a: args.a, kappa: args.kappa, p: args.p, q: args.q, fiber: args.fiber };
    let model = match build_model(&args.model, &params) {
        Ok(m) => m,
        Err(e) => return usage(e),
    };
    let start = Instant::now();
    let reports = battery(&model, &DerivativePlan::default(), args.grid, seed, args.tol_scale);
    let summary = SuiteSummary::new(seed, vec![], reports, start.elapsed().as_secs_f64());
    if args.json {
        return emit_json(&summary);
    }
    for r in &summary.reports {
        println!("{}", r.line());
    }
    println!("overall: {}", if summary.overall_pass { "PASS" } else { "FAIL" });
    verdict(summary.overall_pass)
}

fn ode(action: OdeAction) -> ExitCode {
    let (args, solve) = match action {
        OdeAction::Solve(a) => (a, true),
        OdeAction::Classify(a) => (a, false),
    };
    let prob = args.problem();
    let traj = match integrate(&prob) {
        Ok(t) => t,
        Err(e @ GeomError::IntegrationFailure { .. }) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAIL);
        }
        Err(e) => return usage(e),
    };
    if solve {
        let mut out = BufWriter::new(io::stdout().lock());
        if traj.write_csv(&mut out).and_then(|_| out.flush()).is_err() {
            return ExitCode::from(EXIT_FAIL);
        }
    } else {
        let zeros: Vec<String> = traj.zero_crossings.iter().map(|z| format!("{z:.6}")).collect();
        println!("{} zeros=[{}]", classify(&prob, &traj), zeros.join(","));
    }
    ExitCode::SUCCESS
}

fn suite(json: bool, seed: u64) -> ExitCode {
    let summary = run_suite(&SuiteConfig::new(seed));
    if json {
        return emit_json(&summary);
    }
    for c in &summary.criteria {
        println!("{}", criterion_line(c));
    }
    println!("overall: {} in {:.1} s", if summary.overall_pass { "PASS" } else { "FAIL" }, summary.wall_time);
    verdict(summary.overall_pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = match seed_from_env() {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    match cli.cmd {
        Command::Verify(args) => verify(args, seed),
        Command::Ode { action } => ode(action),
        Command::Suite { json } => suite(json, seed),
    }
}
