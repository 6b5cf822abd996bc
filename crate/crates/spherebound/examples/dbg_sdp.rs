use spherebound::exact::rat;
use spherebound::solver::{max_violation, min_block_eigenvalue, solve, SolveOpts};
use spherebound::sosmodel::{build_sdp_model, BoundProblem, ProblemKind};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: u32 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(3);
    let d: u32 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(5);
    let cap: u32 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(d);
    let prob = BoundProblem {
        kind: ProblemKind::Sdp,
        n,
        cos_theta: rat(1, 2),
        d,
        cap_n: cap,
        margin: rat(1, 1_000_000),
        symmetry_reduction: false,
    };
    let t0 = std::time::Instant::now();
    let model = build_sdp_model(&prob).unwrap();
    println!("model: {} constraints, {} blocks (built in {:?})", model.constraint_count(), model.blocks.len(), t0.elapsed());
    let mut opts = SolveOpts::default();
    opts.verbose = true;
    let t1 = std::time::Instant::now();
    let sol = solve(&model, &opts).unwrap();
    println!("status {:?} obj {} iters {} in {:?}", sol.status, sol.objective_primal, sol.iterations, t1.elapsed());
    println!("violation {:.3e}  min_eig {:.3e}", max_violation(&model, &sol), min_block_eigenvalue(&sol));
}
