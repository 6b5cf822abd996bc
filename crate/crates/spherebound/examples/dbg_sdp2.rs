use spherebound::exact::{parse_rat, rat};
use spherebound::solver::{max_violation, min_block_eigenvalue, solve, SolveOpts};
use spherebound::sosmodel::{build_sdp_model, BoundProblem, ProblemKind};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: u32 = args[1].parse().unwrap();
    let d: u32 = args[2].parse().unwrap();
    let cap: u32 = args[3].parse().unwrap();
    let margin = parse_rat(&args[4]).unwrap();
    let prob = BoundProblem {
        kind: ProblemKind::Sdp,
        n,
        cos_theta: rat(1, 2),
        d,
        cap_n: cap,
        margin,
        symmetry_reduction: false,
    };
    let model = build_sdp_model(&prob).unwrap();
    let sol = solve(&model, &SolveOpts::default()).unwrap();
    println!(
        "n={} d={} N={} margin={}  {:?} obj {:.7} iters {} viol {:.2e} mineig {:.2e}",
        n, d, cap, args[4], sol.status, sol.objective_primal, sol.iterations,
        max_violation(&model, &sol), min_block_eigenvalue(&sol)
    );
}
