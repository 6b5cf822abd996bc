use spherebound::exact::rat;
use spherebound::solver::{solve, SolveOpts};
use spherebound::sosmodel::{build_lp_model, BoundProblem, ProblemKind};

fn main() {
    let prob = BoundProblem {
        kind: ProblemKind::Lp,
        n: 3,
        cos_theta: rat(1, 2),
        d: 11,
        cap_n: 11,
        margin: rat(1, 1_000_000),
        symmetry_reduction: false,
    };
    let model = build_lp_model(&prob).unwrap();
    let mut opts = SolveOpts::default();
    opts.verbose = true;
    let sol = solve(&model, &opts).unwrap();
    println!("status {:?} obj {} iters {}", sol.status, sol.objective_primal, sol.iterations);
}
