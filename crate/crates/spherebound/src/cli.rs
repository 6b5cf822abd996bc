//! Command-line interface: bound computations, table reproduction, Tammes
//! bisection, code checking, and certificate verification.
//!
//! Exit codes: 0 = bound computed and exactly verified (or command
//! succeeded), 2 = solved but not verified, 3 = solver failure, 4 = bad
//! input.

use crate::certify::{
    rationalize, read_certificate, verify, write_certificate, Certificate, VerifyOutcome,
    DEFAULT_DENOMINATOR_BOUND,
};
use crate::codes::{empirical_positivity_report, load_code};
use crate::exact::{parse_rat, rat_i, rat_to_f64, Rat};
use crate::sosmodel::{
    build_lp_model, build_sdp_model, export_sdpa, BlockSdp, BoundProblem, ProblemKind,
};
use crate::solver::{import_solution, solve, SdpSolution, SolveOpts};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use std::time::Instant;

pub const EXIT_VERIFIED: i32 = 0;
pub const EXIT_UNVERIFIED: i32 = 2;
pub const EXIT_SOLVER_FAILURE: i32 = 3;
pub const EXIT_BAD_INPUT: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "spherebound",
    about = "Rigorous upper bounds for spherical codes and kissing numbers",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Two-point (Delsarte) linear programming bound on A(n, theta).
    Lpbound(BoundArgs),
    /// Three-point semidefinite programming bound on A(n, theta).
    Sdpbound(BoundArgs),
    /// Reproduce a published table of bounds.
    Table(TableArgs),
    /// Upper-bound the optimal angle of the Tammes problem on S^2.
    Tammes(TammesArgs),
    /// Empirical positivity checks for a spherical code.
    CodeCheck(CodeCheckArgs),
    /// Verify a certificate file in exact arithmetic.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    /// Ambient dimension.
    #[arg(long, default_value_t = 3)]
    pub n: u32,
    /// Minimal angle in degrees (cos theta is rounded up to a rational).
    #[arg(long, conflicts_with = "cos")]
    pub theta: Option<f64>,
    /// cos(theta) as an exact rational string, e.g. "1/2".
    #[arg(long)]
    pub cos: Option<String>,
    /// Number of polynomial levels d.
    #[arg(long)]
    pub d: Option<u32>,
    /// SOS degree budget N (defaults to d).
    #[arg(long = "N", visible_alias = "cap")]
    pub cap_n: Option<u32>,
    /// Feasibility margin, a rational string.
    #[arg(long, default_value = "1/1000000")]
    pub margin: String,
    /// Solver: "embedded", "export-only", or "import=PATH" (an SDPA
    /// solution file for the exact same model).
    #[arg(long, default_value = "embedded")]
    pub solver: String,
    /// Write the model in sparse SDPA format to this path.
    #[arg(long = "export-sdpa")]
    pub export_sdpa: Option<String>,
    /// Shorthand for --solver import=PATH.
    #[arg(long)]
    pub import: Option<String>,
    /// Write the certificate (JSON) to this path.
    #[arg(long)]
    pub cert: Option<String>,
    /// Denominator bound for rationalization.
    #[arg(long, default_value_t = DEFAULT_DENOMINATOR_BOUND)]
    pub denominator_bound: u64,
    /// Match identity-2 coefficients per S3-orbit (smaller model).
    #[arg(long)]
    pub symmetry_reduction: bool,
    #[arg(long, short)]
    pub verbose: bool,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    /// Which table: "5.1" (kissing numbers) or "5.2" (A(n, arccos 1/3)).
    #[arg(long, default_value = "5.1")]
    pub which: String,
    /// d = N for the SDP column.
    #[arg(long, default_value_t = 10)]
    pub d: u32,
    /// Smallest and largest n to run.
    #[arg(long, default_value_t = 3)]
    pub min_n: u32,
    #[arg(long, default_value_t = 10)]
    pub max_n: u32,
    #[arg(long, default_value = "1/1000000")]
    pub margin: String,
    #[arg(long, default_value_t = DEFAULT_DENOMINATOR_BOUND)]
    pub denominator_bound: u64,
    #[arg(long)]
    pub symmetry_reduction: bool,
    #[arg(long, short)]
    pub verbose: bool,
}

#[derive(Args, Debug)]
pub struct TammesArgs {
    /// Number of points on the sphere.
    #[arg(long)]
    pub points: u32,
    #[arg(long, default_value_t = 10)]
    pub d: u32,
    #[arg(long = "N")]
    pub cap_n: Option<u32>,
    /// Bisection stops when the angle bracket is below this (degrees).
    #[arg(long, default_value_t = 0.02)]
    pub tolerance: f64,
    #[arg(long, default_value = "1/1000000")]
    pub margin: String,
    #[arg(long, default_value_t = DEFAULT_DENOMINATOR_BOUND)]
    pub denominator_bound: u64,
    /// Skip exact verification on inner bisection probes (the reported
    /// bound is always re-verified).
    #[arg(long)]
    pub quick: bool,
    #[arg(long)]
    pub symmetry_reduction: bool,
    #[arg(long, short)]
    pub verbose: bool,
}

#[derive(Args, Debug)]
pub struct CodeCheckArgs {
    /// Builtin name (icosahedron, d4-roots, e8-roots) or a file path.
    #[arg(long)]
    pub code: String,
    /// Number of positivity levels to test.
    #[arg(long, default_value_t = 10)]
    pub d: u32,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Certificate file (JSON).
    #[arg(long)]
    pub cert: String,
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version through this path too.
            let is_usage = e.use_stderr();
            let _ = e.print();
            return if is_usage { EXIT_BAD_INPUT } else { 0 };
        }
    };
    match cli.command {
        Command::Lpbound(a) => cmd_bound(ProblemKind::Lp, &a),
        Command::Sdpbound(a) => cmd_bound(ProblemKind::Sdp, &a),
        Command::Table(a) => cmd_table(&a),
        Command::Tammes(a) => cmd_tammes(&a),
        Command::CodeCheck(a) => cmd_code_check(&a),
        Command::Verify(a) => cmd_verify(&a),
    }
}

/// Smallest rational with denominator at most `qmax` that is >= `t`.
/// Exhaustive over denominators with exact integer arithmetic.
pub fn upper_rational(t: &Rat, qmax: u64) -> Rat {
    let (a, b) = (t.numer().clone(), t.denom().clone());
    let mut best: Option<Rat> = None;
    for q in 1..=qmax {
        let qi = BigInt::from(q);
        // ceil(a q / b)
        let p = (&a * &qi + (&b - BigInt::from(1))).div_floor(&b);
        let cand = Rat::new(p, qi);
        if best.as_ref().map(|b| cand < *b).unwrap_or(true) {
            if &cand == t {
                return cand;
            }
            best = Some(cand);
        }
    }
    best.expect("qmax >= 1")
}

/// Resolves theta/cos flags to an exact rational c with -1 < c < 1,
/// rounding cos(theta) upward so the certified bound stays valid for the
/// requested angle.
fn resolve_cos(theta: Option<f64>, cos: &Option<String>) -> Result<Rat, String> {
    if let Some(s) = cos {
        let c = parse_rat(s).map_err(|e| e.to_string())?;
        if c <= rat_i(-1) || c >= rat_i(1) {
            return Err(format!("cos(theta) = {} out of (-1, 1)", c));
        }
        return Ok(c);
    }
    let deg = theta.unwrap_or(60.0);
    if !(0.0..180.0).contains(&deg) || deg == 0.0 {
        return Err(format!("theta = {} degrees out of (0, 180)", deg));
    }
    // Guard of a few ulps puts the float strictly above the true cosine
    // before rounding up onto the rational grid.
    let c0 = deg.to_radians().cos() + 3e-15;
    let t = Rat::from_float(c0).ok_or("non-finite cosine")?;
    let c = upper_rational(&t, 1_000_000);
    if c >= rat_i(1) || c <= rat_i(-1) {
        return Err(format!("theta = {} degrees leaves no usable domain", deg));
    }
    Ok(c)
}

fn build_model(prob: &BoundProblem) -> Result<BlockSdp, String> {
    match prob.kind {
        ProblemKind::Lp => build_lp_model(prob).map_err(|e| e.to_string()),
        ProblemKind::Sdp => build_sdp_model(prob).map_err(|e| e.to_string()),
    }
}

struct BoundRun {
    sol: SdpSolution,
    cert: Option<Certificate>,
    verified_bound: Option<Rat>,
    fail_reason: Option<String>,
}

/// Solve + rationalize + verify, retrying rationalization on a finer grid
/// once before giving up on verification.
fn run_bound(
    model: &BlockSdp,
    opts: &SolveOpts,
    denominator_bound: u64,
    want_cert: bool,
) -> Result<BoundRun, String> {
    let sol = solve(model, opts).map_err(|e| e.to_string())?;
    let mut cert = None;
    let mut verified_bound = None;
    let mut fail_reason = None;
    for bound in [denominator_bound, denominator_bound.saturating_mul(1024)] {
        match rationalize(model, &sol, bound) {
            Ok(c) => match verify(&c) {
                VerifyOutcome::Pass { bound } => {
                    verified_bound = Some(bound);
                    cert = Some(c);
                    fail_reason = None;
                    break;
                }
                VerifyOutcome::Fail { reason } => {
                    fail_reason = Some(reason);
                    if want_cert {
                        cert = Some(c);
                    }
                }
            },
            Err(e) => fail_reason = Some(e.to_string()),
        }
    }
    Ok(BoundRun {
        sol,
        cert,
        verified_bound,
        fail_reason,
    })
}

fn rat_display(r: &Rat) -> String {
    format!("{} (~{:.6})", r, rat_to_f64(r))
}

fn floor_of(r: &Rat) -> BigInt {
    r.numer().div_floor(r.denom())
}

fn cmd_bound(kind: ProblemKind, a: &BoundArgs) -> i32 {
    let c = match resolve_cos(a.theta, &a.cos) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e);
            return EXIT_BAD_INPUT;
        }
    };
    let margin = match parse_rat(&a.margin) {
        Ok(m) if !m.is_negative() => m,
        _ => {
            eprintln!("error: bad margin {:?}", a.margin);
            return EXIT_BAD_INPUT;
        }
    };
    let d = a.d.unwrap_or(match kind {
        ProblemKind::Lp => 11,
        ProblemKind::Sdp => 5,
    });
    let cap_n = a.cap_n.unwrap_or(match kind {
        ProblemKind::Lp => d + 1,
        ProblemKind::Sdp => d,
    });
    let prob = BoundProblem {
        kind,
        n: a.n,
        cos_theta: c.clone(),
        d,
        cap_n,
        margin,
        symmetry_reduction: a.symmetry_reduction,
    };
    let model = match build_model(&prob) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {}", e);
            return EXIT_BAD_INPUT;
        }
    };
    println!(
        "problem: {} n={} c={} d={} N={}",
        match kind {
            ProblemKind::Lp => "lpbound",
            ProblemKind::Sdp => "sdpbound",
        },
        prob.n,
        rat_display(&prob.cos_theta),
        prob.d,
        prob.cap_n
    );
    println!(
        "model: {} blocks ({}), {} equality constraints",
        model.blocks.len(),
        model
            .blocks
            .iter()
            .map(|b| format!("{}:{}", b.label, b.dim))
            .collect::<Vec<_>>()
            .join(" "),
        model.constraint_count()
    );
    if let Some(path) = &a.export_sdpa {
        if let Err(e) = export_sdpa(&model, path) {
            eprintln!("error: SDPA export failed: {}", e);
            return EXIT_BAD_INPUT;
        }
        println!("wrote SDPA model to {}", path);
    }
    if a.solver == "export-only" {
        return if a.export_sdpa.is_some() {
            0
        } else {
            eprintln!("error: --solver export-only needs --export-sdpa PATH");
            EXIT_BAD_INPUT
        };
    }

    let import_path = a
        .import
        .clone()
        .or_else(|| a.solver.strip_prefix("import=").map(String::from));
    if a.solver != "embedded" && import_path.is_none() {
        eprintln!("error: unknown solver {:?}", a.solver);
        return EXIT_BAD_INPUT;
    }
    let opts = SolveOpts {
        verbose: a.verbose,
        ..SolveOpts::default()
    };
    let start = Instant::now();
    let run = if let Some(path) = import_path {
        let sol = match import_solution(&model, &path) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: import failed: {}", e);
                return EXIT_BAD_INPUT;
            }
        };
        let mut fail_reason = None;
        let mut verified_bound = None;
        let mut cert = None;
        for bound in [a.denominator_bound, a.denominator_bound.saturating_mul(1024)] {
            match rationalize(&model, &sol, bound) {
                Ok(c) => match verify(&c) {
                    VerifyOutcome::Pass { bound } => {
                        verified_bound = Some(bound);
                        cert = Some(c);
                        fail_reason = None;
                        break;
                    }
                    VerifyOutcome::Fail { reason } => {
                        fail_reason = Some(reason);
                        cert = Some(c);
                    }
                },
                Err(e) => fail_reason = Some(e.to_string()),
            }
        }
        BoundRun {
            sol,
            cert,
            verified_bound,
            fail_reason,
        }
    } else {
        match run_bound(&model, &opts, a.denominator_bound, a.cert.is_some()) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: solver failed: {}", e);
                return EXIT_SOLVER_FAILURE;
            }
        }
    };
    let elapsed = start.elapsed();
    println!(
        "solver: status {:?} after {} iterations, objective {:.9} (unverified), gap {:.2e}",
        run.sol.status,
        run.sol.iterations,
        run.sol.objective_primal,
        run.sol.relative_gap()
    );
    if let (Some(path), Some(cert)) = (&a.cert, &run.cert) {
        match write_certificate(cert, path) {
            Ok(()) => println!("wrote certificate to {}", path),
            Err(e) => eprintln!("warning: could not write certificate: {}", e),
        }
    }
    match &run.verified_bound {
        Some(bound) => {
            println!("certified bound: {}", rat_display(bound));
            println!("floor: {}", floor_of(bound));
            println!("time: {:.2}s", elapsed.as_secs_f64());
            EXIT_VERIFIED
        }
        None => {
            println!(
                "verification FAILED: {}",
                run.fail_reason.as_deref().unwrap_or("unknown")
            );
            println!(
                "unverified objective: {:.6}; consider raising --margin",
                run.sol.objective_primal
            );
            println!("time: {:.2}s", elapsed.as_secs_f64());
            EXIT_UNVERIFIED
        }
    }
}

/// Published reference columns for the tables.
const TABLE51_LP: [u64; 8] = [13, 25, 46, 82, 140, 240, 380, 595];
const TABLE51_SDP: [u64; 8] = [12, 24, 45, 78, 135, 240, 366, 567];
const TABLE52_SDP: [(u32, u64); 3] = [(3, 9), (4, 15), (5, 23)];

fn cmd_table(a: &TableArgs) -> i32 {
    let margin = match parse_rat(&a.margin) {
        Ok(m) if !m.is_negative() => m,
        _ => {
            eprintln!("error: bad margin {:?}", a.margin);
            return EXIT_BAD_INPUT;
        }
    };
    let (c, label) = match a.which.as_str() {
        "5.1" => (parse_rat("1/2").unwrap(), "tau_n (theta = 60 deg)"),
        "5.2" => (parse_rat("1/3").unwrap(), "A(n, arccos 1/3)"),
        other => {
            eprintln!("error: unknown table {:?} (expected 5.1 or 5.2)", other);
            return EXIT_BAD_INPUT;
        }
    };
    println!("table {}: {}", a.which, label);
    println!(
        "{:>3} {:>12} {:>10} {:>12} {:>10} {:>10}",
        "n", "lp bound", "lp floor", "sdp bound", "sdp floor", "published"
    );
    let mut any_exceeds = false;
    let mut any_failure = false;
    for n in a.min_n..=a.max_n {
        let published: Option<u64> = match a.which.as_str() {
            "5.1" => ((3..=10).contains(&n)).then(|| TABLE51_SDP[(n - 3) as usize]),
            _ => TABLE52_SDP.iter().find(|(m, _)| *m == n).map(|(_, v)| *v),
        };
        let lp_prob = BoundProblem {
            kind: ProblemKind::Lp,
            n,
            cos_theta: c.clone(),
            d: 11,
            cap_n: 12,
            margin: margin.clone(),
            symmetry_reduction: false,
        };
        let lp = build_model(&lp_prob)
            .and_then(|m| run_bound(&m, &SolveOpts::default(), a.denominator_bound, false));
        let sdp_prob = BoundProblem {
            kind: ProblemKind::Sdp,
            n,
            cos_theta: c.clone(),
            d: a.d,
            cap_n: a.d,
            margin: margin.clone(),
            symmetry_reduction: a.symmetry_reduction,
        };
        let sdp = build_model(&sdp_prob)
            .and_then(|m| run_bound(&m, &SolveOpts::default(), a.denominator_bound, false));
        let fmt = |r: &Result<BoundRun, String>| -> (String, String) {
            match r {
                Ok(run) => match &run.verified_bound {
                    Some(b) => (format!("{:.4}", rat_to_f64(b)), floor_of(b).to_string()),
                    None => (
                        format!("{:.4}?", run.sol.objective_primal),
                        "unv".to_string(),
                    ),
                },
                Err(_) => ("fail".to_string(), "-".to_string()),
            }
        };
        let (lp_b, lp_f) = fmt(&lp);
        let (sdp_b, sdp_f) = fmt(&sdp);
        let pub_s = published.map(|p| p.to_string()).unwrap_or("-".to_string());
        let mut note = String::new();
        if let (Ok(run), Some(p)) = (&sdp, published) {
            if let Some(b) = &run.verified_bound {
                if floor_of(b) > BigInt::from(p) {
                    note = "  <-- exceeds published".to_string();
                    any_exceeds = true;
                }
            }
        }
        if lp.is_err() || sdp.is_err() {
            any_failure = true;
        }
        println!(
            "{:>3} {:>12} {:>10} {:>12} {:>10} {:>10}{}",
            n, lp_b, lp_f, sdp_b, sdp_f, pub_s, note
        );
    }
    if any_exceeds {
        eprintln!("warning: some computed floors exceed the published column");
    }
    if any_failure {
        EXIT_SOLVER_FAILURE
    } else {
        EXIT_VERIFIED
    }
}

fn cmd_tammes(a: &TammesArgs) -> i32 {
    if a.points < 4 {
        eprintln!("error: need at least 4 points");
        return EXIT_BAD_INPUT;
    }
    let margin = match parse_rat(&a.margin) {
        Ok(m) if !m.is_negative() => m,
        _ => {
            eprintln!("error: bad margin {:?}", a.margin);
            return EXIT_BAD_INPUT;
        }
    };
    let cap_n = a.cap_n.unwrap_or(a.d);
    let probe = |c: &Rat, verify_exact: bool| -> Option<(bool, Option<Rat>)> {
        let prob = BoundProblem {
            kind: ProblemKind::Sdp,
            n: 3,
            cos_theta: c.clone(),
            d: a.d,
            cap_n,
            margin: margin.clone(),
            symmetry_reduction: a.symmetry_reduction,
        };
        let model = build_model(&prob).ok()?;
        if verify_exact {
            let run = run_bound(&model, &SolveOpts::default(), a.denominator_bound, false).ok()?;
            let ok = run
                .verified_bound
                .as_ref()
                .map(|b| *b < rat_i(a.points as i64))
                .unwrap_or(false);
            Some((ok, run.verified_bound))
        } else {
            let sol = solve(&model, &SolveOpts::default()).ok()?;
            // Safety pad on the unverified objective during bracketing.
            Some((sol.objective_primal + 1e-3 < a.points as f64, None))
        }
    };

    // Bracket: certified at c_good (small c, wide angle), not at c_bad.
    let mut c_good: Option<Rat> = None;
    for start in [0.0f64, -0.25, -0.45, -0.6, -0.75, -0.85, -0.93, -0.98] {
        let c = upper_rational(&Rat::from_float(start).unwrap(), 1_000_000);
        if let Some((true, _)) = probe(&c, !a.quick) {
            c_good = Some(c);
            break;
        }
    }
    let Some(mut c_good) = c_good else {
        eprintln!("error: no certifying bracket end found");
        return EXIT_SOLVER_FAILURE;
    };
    let mut c_bad = Rat::new(BigInt::from(999_999), BigInt::from(1_000_000));
    let tol = a.tolerance.to_radians();
    while rat_to_f64(&c_good).acos() - rat_to_f64(&c_bad).acos() > tol {
        let mid_f = 0.5 * (rat_to_f64(&c_good) + rat_to_f64(&c_bad));
        let mid = upper_rational(&Rat::from_float(mid_f).unwrap(), 1_000_000);
        if mid <= c_good || mid >= c_bad {
            break;
        }
        if a.verbose {
            println!(
                "probe c = {} (angle {:.4} deg)",
                mid,
                rat_to_f64(&mid).acos().to_degrees()
            );
        }
        match probe(&mid, !a.quick) {
            Some((true, _)) => c_good = mid,
            _ => c_bad = mid,
        }
    }
    // Always re-verify the accepted c exactly.
    let Some((true, Some(bound))) = probe(&c_good, true) else {
        eprintln!("error: final verification at c = {} failed", c_good);
        return EXIT_UNVERIFIED;
    };
    let angle = rat_to_f64(&c_good).acos().to_degrees();
    println!(
        "certified A(3, arccos({})) <= {} < {}",
        c_good,
        rat_display(&bound),
        a.points
    );
    println!(
        "theta({}) <= {:.4} degrees (certified at cos = {})",
        a.points, angle, c_good
    );
    EXIT_VERIFIED
}

fn cmd_code_check(a: &CodeCheckArgs) -> i32 {
    let code = match load_code(&a.code) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e);
            return EXIT_BAD_INPUT;
        }
    };
    let report = empirical_positivity_report(&code, a.d);
    println!("{}", report.to_table());
    if report.all_pass() {
        println!("all positivity checks pass");
        EXIT_VERIFIED
    } else {
        println!("POSITIVITY VIOLATION: see rows above");
        EXIT_UNVERIFIED
    }
}

fn cmd_verify(a: &VerifyArgs) -> i32 {
    let cert = match read_certificate(&a.cert) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e);
            return EXIT_BAD_INPUT;
        }
    };
    match verify(&cert) {
        VerifyOutcome::Pass { bound } => {
            println!("PASS: A({}, theta) <= {}", cert.problem.n, rat_display(&bound));
            println!("floor: {}", floor_of(&bound));
            EXIT_VERIFIED
        }
        VerifyOutcome::Fail { reason } => {
            println!("FAIL: {}", reason);
            EXIT_UNVERIFIED
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn upper_rational_basics() {
        // Already representable: returned exactly.
        assert_eq!(upper_rational(&rat(1, 2), 100), rat(1, 2));
        // 0.5225 with qmax 1000.
        assert_eq!(upper_rational(&rat(209, 400), 1000), rat(209, 400));
        // 1/3 + tiny from above.
        let t = rat(1, 3) + rat(1, 10_000_000);
        let c = upper_rational(&t, 1000);
        assert!(c >= t);
        assert!(c.denom() <= &BigInt::from(1000));
        assert!(c - t < rat(1, 100_000));
    }

    #[test]
    fn resolve_cos_rounds_up() {
        // 60 degrees must give exactly 1/2 (cos is exactly representable
        // there up to float error and 1/2 sits on the grid).
        let c = resolve_cos(Some(60.0), &None).unwrap();
        assert_eq!(c, rat(1, 2));
        // Arbitrary angle: c must be >= the float cosine.
        let c = resolve_cos(Some(77.3), &None).unwrap();
        assert!(rat_to_f64(&c) >= (77.3f64).to_radians().cos());
        assert!(c.denom() <= &BigInt::from(1_000_000u64));
    }

    #[test]
    fn resolve_cos_rejects_bad_input() {
        assert!(resolve_cos(None, &Some("3/2".into())).is_err());
        assert!(resolve_cos(Some(0.0), &None).is_err());
        assert!(resolve_cos(Some(180.0), &None).is_err());
    }

    #[test]
    fn cli_rejects_unknown_table() {
        let code = run(["spherebound", "table", "--which", "9.9"]);
        assert_eq!(code, EXIT_BAD_INPUT);
    }

    #[test]
    fn cli_code_check_icosahedron() {
        let code = run(["spherebound", "code-check", "--code", "icosahedron", "--d", "5"]);
        assert_eq!(code, EXIT_VERIFIED);
    }

    #[test]
    fn cli_verify_missing_file() {
        let code = run(["spherebound", "verify", "--cert", "/nonexistent/cert.json"]);
        assert_eq!(code, EXIT_BAD_INPUT);
    }

    #[test]
    fn cli_lpbound_export_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.sdpa");
        let code = run([
            "spherebound",
            "lpbound",
            "--n",
            "3",
            "--cos",
            "1/2",
            "--d",
            "5",
            "--N",
            "6",
            "--solver",
            "export-only",
            "--export-sdpa",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        assert!(path.exists());
    }

    #[test]
    fn cli_lpbound_small_verified() {
        let dir = tempfile::tempdir().unwrap();
        let cert_path = dir.path().join("c.json");
        let code = run([
            "spherebound",
            "lpbound",
            "--n",
            "3",
            "--cos",
            "1/2",
            "--d",
            "5",
            "--N",
            "6",
            "--cert",
            cert_path.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_VERIFIED);
        let code = run(["spherebound", "verify", "--cert", cert_path.to_str().unwrap()]);
        assert_eq!(code, EXIT_VERIFIED);
    }
}
