//! Embedded primal-dual interior-point solver for block-diagonal SDPs in
//! standard primal form, plus import/export of solutions in the SDPA
//! solution convention.
//!
//! The method is an infeasible-start path-following iteration with
//! Nesterov-Todd scaling and Mehrotra predictor-corrector steps. The Schur
//! complement is formed densely (desk-scale models only) with compensated
//! accumulation, factored by Cholesky with escalating diagonal
//! regularization. After convergence the primal iterate is projected onto
//! the affine constraint set (least-norm correction), which is what makes
//! the floating solution tight enough for exact certification downstream.

use crate::exact::rat_to_f64;
use crate::sosmodel::{BlockSdp, ModelError};
use nalgebra::{Cholesky, DMatrix, DVector};
use std::io::Write as _;

#[derive(Debug, Clone)]
pub struct SolveOpts {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
    pub verbose: bool,
}

impl Default for SolveOpts {
    fn default() -> Self {
        SolveOpts {
            gap_tol: 1e-8,
            feas_tol: 1e-8,
            max_iter: 200,
            verbose: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SolveStatus {
    Optimal,
    MaxIterations,
    NumericalFailure,
    InfeasibleSuspected,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub primal_blocks: Vec<DMatrix<f64>>,
    pub dual_vector: Vec<f64>,
    pub dual_blocks: Vec<DMatrix<f64>>,
    pub objective_primal: f64,
    pub objective_dual: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Largest Schur regularization applied, for the record.
    pub regularization: f64,
}

impl SdpSolution {
    pub fn relative_gap(&self) -> f64 {
        (self.objective_primal - self.objective_dual).abs()
            / (1.0 + self.objective_primal.abs() + self.objective_dual.abs())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("model has no blocks or no constraints")]
    EmptyModel,
    #[error("constraint {0} is identically zero but has rhs {1}")]
    InconsistentZeroRow(usize, f64),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("solution parse error at line {0}: {1}")]
    Parse(usize, String),
    #[error("solution file does not match model: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One nonzero of a constraint matrix in f64, `row <= col`.
#[derive(Debug, Clone, Copy)]
struct Entry {
    block: usize,
    row: usize,
    col: usize,
    val: f64,
}

fn sym_set(m: &mut DMatrix<f64>, r: usize, c: usize, v: f64) {
    m[(r, c)] += v;
    if r != c {
        m[(c, r)] += v;
    }
}

fn dense_blocks(dims: &[usize]) -> Vec<DMatrix<f64>> {
    dims.iter().map(|&d| DMatrix::zeros(d, d)).collect()
}

/// `<A, X>` for a sparse symmetric A against dense symmetric X.
fn sparse_inner(entries: &[Entry], x: &[DMatrix<f64>]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for e in entries {
        let factor = if e.row == e.col { 1.0 } else { 2.0 };
        let term = factor * e.val * x[e.block][(e.row, e.col)];
        // Kahan step.
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

fn block_inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

/// Symmetric square root and inverse square root via eigendecomposition,
/// with eigenvalues clamped away from zero.
fn sym_pow(m: &DMatrix<f64>, exp: f64) -> Option<DMatrix<f64>> {
    let eig = m.clone().symmetric_eigen();
    let max_ev = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    if !max_ev.is_finite() || max_ev <= 0.0 {
        return None;
    }
    let floor = max_ev * 1e-300;
    let mut d = DVector::zeros(eig.eigenvalues.len());
    for (i, ev) in eig.eigenvalues.iter().enumerate() {
        if *ev < -max_ev * 1e-10 {
            return None;
        }
        d[i] = ev.max(floor).powf(exp);
    }
    let mut out = eig.eigenvectors.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col *= d[j];
    }
    Some(&out * eig.eigenvectors.transpose())
}

/// Largest step `alpha` keeping `X + alpha D` positive semidefinite,
/// computed from the minimum eigenvalue of `L^-1 D L^-T`.
fn max_step(x: &DMatrix<f64>, d: &DMatrix<f64>) -> f64 {
    let chol = match Cholesky::new(x.clone()) {
        Some(c) => c,
        None => return 0.0,
    };
    let l = chol.l();
    let y = l.solve_lower_triangular(d).unwrap();
    let m = l.solve_lower_triangular(&y.transpose()).unwrap();
    let sym = (&m + m.transpose()) * 0.5;
    let lam_min = sym
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if lam_min >= -1e-14 {
        f64::INFINITY
    } else {
        -1.0 / lam_min
    }
}

struct Prepared {
    dims: Vec<usize>,
    cost: Vec<DMatrix<f64>>,
    /// Scaled constraints, only rows kept after pruning.
    cons: Vec<Vec<Entry>>,
    rhs: Vec<f64>,
    /// kept[i] = original index of scaled row i.
    kept: Vec<usize>,
    scales: Vec<f64>,
    /// Constraint indices (into `cons`) touching each block.
    by_block: Vec<Vec<usize>>,
    total_dim: usize,
}

fn prepare(model: &BlockSdp) -> Result<Prepared, SolveError> {
    if model.blocks.is_empty() || model.constraints.is_empty() {
        return Err(SolveError::EmptyModel);
    }
    let dims: Vec<usize> = model.blocks.iter().map(|b| b.dim).collect();
    let mut cost = dense_blocks(&dims);
    for e in &model.cost {
        sym_set(&mut cost[e.block], e.row, e.col, rat_to_f64(&e.value));
    }
    let mut cons: Vec<Vec<Entry>> = Vec::new();
    let mut rhs = Vec::new();
    let mut kept = Vec::new();
    let mut scales = Vec::new();
    for (j, c) in model.constraints.iter().enumerate() {
        let entries: Vec<Entry> = c
            .entries
            .iter()
            .map(|e| Entry {
                block: e.block,
                row: e.row,
                col: e.col,
                val: rat_to_f64(&e.value),
            })
            .filter(|e| e.val != 0.0)
            .collect();
        let b = rat_to_f64(&c.rhs);
        let scale = entries.iter().map(|e| e.val.abs()).fold(0.0_f64, f64::max);
        if scale == 0.0 {
            if b.abs() > 1e-12 {
                return Err(SolveError::InconsistentZeroRow(j, b));
            }
            continue;
        }
        cons.push(
            entries
                .into_iter()
                .map(|mut e| {
                    e.val /= scale;
                    e
                })
                .collect(),
        );
        rhs.push(b / scale);
        kept.push(j);
        scales.push(scale);
    }
    let mut by_block = vec![Vec::new(); dims.len()];
    for (i, c) in cons.iter().enumerate() {
        let mut seen = vec![false; dims.len()];
        for e in c {
            if !seen[e.block] {
                seen[e.block] = true;
                by_block[e.block].push(i);
            }
        }
    }
    let total_dim = dims.iter().sum();
    Ok(Prepared {
        dims,
        cost,
        cons,
        rhs,
        kept,
        scales,
        by_block,
        total_dim,
    })
}

impl Prepared {
    fn apply_a(&self, x: &[DMatrix<f64>]) -> DVector<f64> {
        DVector::from_iterator(
            self.cons.len(),
            self.cons.iter().map(|c| sparse_inner(c, x)),
        )
    }

    fn apply_at(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut out = dense_blocks(&self.dims);
        for (j, c) in self.cons.iter().enumerate() {
            let yj = y[j];
            if yj == 0.0 {
                continue;
            }
            for e in c {
                sym_set(&mut out[e.block], e.row, e.col, yj * e.val);
            }
        }
        out
    }

    fn scatter(&self, j: usize, out: &mut DMatrix<f64>, block: usize) {
        out.fill(0.0);
        for e in &self.cons[j] {
            if e.block == block {
                sym_set(out, e.row, e.col, e.val);
            }
        }
    }

    /// Dense Schur-type matrix `S[j][l] = sum_b <A_j, W_b A_l W_b>`; with
    /// `w = None` this is the constraint Gram matrix `A A^T`.
    fn schur(&self, w: Option<&[DMatrix<f64>]>) -> DMatrix<f64> {
        let m = self.cons.len();
        let mut s = DMatrix::zeros(m, m);
        let mut comp = DMatrix::zeros(m, m);
        for (b, &dim) in self.dims.iter().enumerate() {
            if dim == 0 {
                continue;
            }
            let list = &self.by_block[b];
            let mut a_l = DMatrix::zeros(dim, dim);
            for &l in list {
                self.scatter(l, &mut a_l, b);
                let m_l = match w {
                    Some(ws) => &ws[b] * &a_l * &ws[b],
                    None => a_l.clone(),
                };
                for &j in list {
                    if j > l {
                        break;
                    }
                    let mut dot = 0.0;
                    for e in self.cons[j].iter().filter(|e| e.block == b) {
                        let factor = if e.row == e.col { 1.0 } else { 2.0 };
                        dot += factor * e.val * m_l[(e.row, e.col)];
                    }
                    // Kahan accumulation across blocks.
                    let y: f64 = dot - comp[(j, l)];
                    let t: f64 = s[(j, l)] + y;
                    comp[(j, l)] = (t - s[(j, l)]) - y;
                    s[(j, l)] = t;
                }
            }
        }
        for j in 0..m {
            for l in 0..j {
                s[(j, l)] = s[(l, j)];
            }
        }
        s
    }
}

fn chol_with_reg(s: &DMatrix<f64>, reg_out: &mut f64) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    let m = s.nrows();
    let diag_max = (0..m).map(|i| s[(i, i)].abs()).fold(1.0_f64, f64::max);
    let mut reg = 1e-12 * diag_max;
    for _ in 0..9 {
        let mut trial = s.clone();
        for i in 0..m {
            trial[(i, i)] += reg;
        }
        if let Some(c) = Cholesky::new(trial) {
            *reg_out = reg_out.max(reg);
            return Some(c);
        }
        reg *= 100.0;
    }
    None
}

/// Solves `s_exact x = rhs` via the (regularized) factorization with a few
/// rounds of iterative refinement; the refinement recovers the accuracy
/// lost to regularization and to ill-conditioning near the optimum.
fn solve_refined(
    chol: &Cholesky<f64, nalgebra::Dyn>,
    s_exact: &DMatrix<f64>,
    rhs: &DVector<f64>,
) -> DVector<f64> {
    let mut x = chol.solve(rhs);
    for _ in 0..3 {
        let resid = rhs - s_exact * &x;
        if resid.amax() <= 1e-16 * rhs.amax().max(1.0) {
            break;
        }
        x += chol.solve(&resid);
    }
    x
}

/// Least-norm correction `X += A^T (A A^T)^-1 (b - A(X))`, restoring
/// primal feasibility to near machine precision.
fn project_feasible(
    p: &Prepared,
    x: &mut [DMatrix<f64>],
    gram: &DMatrix<f64>,
    chol: &Cholesky<f64, nalgebra::Dyn>,
) {
    for _ in 0..3 {
        let rp = DVector::from_iterator(
            p.cons.len(),
            p.rhs
                .iter()
                .zip(p.cons.iter())
                .map(|(b, c)| b - sparse_inner(c, x)),
        );
        let w = solve_refined(chol, gram, &rp);
        for (j, c) in p.cons.iter().enumerate() {
            let wj = w[j];
            for e in c {
                sym_set(&mut x[e.block], e.row, e.col, wj * e.val);
            }
        }
    }
}

/// X-weighted feasibility projection: corrects along `X A_j X`, i.e. the
/// least-norm step in the `X^-1/2 . X^-1/2` metric. The correction
/// `X + sum_j w_j X A_j X = X^1/2 (I + M) X^1/2` cannot leave the PSD cone
/// while `|M| < 1`, so near-zero eigendirections of X are preserved —
/// unlike the unweighted projection, which happily pushes a nearly
/// singular block across the boundary.
fn project_feasible_weighted(p: &Prepared, x: &mut [DMatrix<f64>], reg_out: &mut f64) -> bool {
    let sx = p.schur(Some(x));
    let chol = match chol_with_reg(&sx, reg_out) {
        Some(c) => c,
        None => return false,
    };
    for _ in 0..4 {
        let rp = DVector::from_iterator(
            p.cons.len(),
            p.rhs
                .iter()
                .zip(p.cons.iter())
                .map(|(b, c)| b - sparse_inner(c, x)),
        );
        let w = solve_refined(&chol, &sx, &rp);
        let mut delta = dense_blocks(&p.dims);
        for (j, c) in p.cons.iter().enumerate() {
            let wj = w[j];
            for e in c {
                sym_set(&mut delta[e.block], e.row, e.col, wj * e.val);
            }
        }
        for b in 0..p.dims.len() {
            let step = &x[b] * &delta[b] * &x[b];
            x[b] += (&step + step.transpose()) * 0.5;
        }
    }
    true
}

pub fn solve(model: &BlockSdp, opts: &SolveOpts) -> Result<SdpSolution, SolveError> {
    let p = prepare(model)?;
    let m = p.cons.len();
    let offset = rat_to_f64(&model.objective_offset);
    let b_norm = p.rhs.iter().map(|v| v.abs()).fold(0.0_f64, f64::max);
    let c_norm = p
        .cost
        .iter()
        .map(|c| c.amax())
        .fold(0.0_f64, f64::max);
    let tau = 10.0 * b_norm.max(1.0);

    let mut x: Vec<DMatrix<f64>> = p
        .dims
        .iter()
        .map(|&d| DMatrix::identity(d, d) * tau)
        .collect();
    let mut z: Vec<DMatrix<f64>> = p
        .dims
        .iter()
        .map(|&d| DMatrix::identity(d, d) * tau.max(c_norm))
        .collect();
    let mut y = DVector::zeros(m);

    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;
    let mut reg_used = 0.0_f64;
    let mut converged = false;

    // Constraint Gram matrix A A^T, used to re-project the primal iterate
    // onto the affine constraint set after every step. The projection is
    // far more accurate than the ill-conditioned Schur solve and keeps the
    // primal residual from flooring the duality gap.
    let gram = p.schur(None);
    let mut gram_reg = 0.0;
    let gram_chol = chol_with_reg(&gram, &mut gram_reg);

    // Best iterate seen so far (by combined optimality score). Late
    // iterations of ill-conditioned models can regress, so the returned
    // point is the best one, not the last one.
    let mut best: Option<(Vec<DMatrix<f64>>, DVector<f64>, Vec<DMatrix<f64>>)> = None;
    let mut best_score = f64::INFINITY;
    let mut since_best = 0usize;

    for iter in 0..opts.max_iter {
        iterations = iter + 1;
        let ax = p.apply_a(&x);
        let rp = DVector::from_iterator(m, p.rhs.iter().zip(ax.iter()).map(|(b, a)| b - a));
        let aty = p.apply_at(&y);
        let rd: Vec<DMatrix<f64>> = p
            .cost
            .iter()
            .zip(&z)
            .zip(&aty)
            .map(|((c, zb), at)| c - zb - at)
            .collect();
        let mu = block_inner(&x, &z) / p.total_dim as f64;
        let obj_p = offset + block_inner(&p.cost, &x);
        let obj_d = offset + p.rhs.iter().zip(y.iter()).map(|(b, yj)| b * yj).sum::<f64>();
        let gap = (obj_p - obj_d).abs() / (1.0 + obj_p.abs() + obj_d.abs());
        let pinf = rp.amax() / (1.0 + b_norm);
        let dinf = rd.iter().map(|r| r.amax()).fold(0.0_f64, f64::max) / (1.0 + c_norm);
        if opts.verbose {
            eprintln!(
                "iter {:3}  mu {:9.2e}  gap {:9.2e}  pinf {:9.2e}  dinf {:9.2e}",
                iter, mu, gap, pinf, dinf
            );
        }
        let score = gap + pinf + dinf;
        if score < best_score {
            best_score = score;
            best = Some((x.clone(), y.clone(), z.clone()));
            since_best = 0;
        } else {
            since_best += 1;
        }
        if gap <= opts.gap_tol && pinf <= opts.feas_tol && dinf <= opts.feas_tol {
            status = SolveStatus::Optimal;
            converged = true;
            break;
        }
        if !mu.is_finite() || obj_d.abs() > 1e14 * (1.0 + b_norm) {
            status = SolveStatus::InfeasibleSuspected;
            break;
        }
        // Stalled: the numerics cannot improve the iterate any further.
        if since_best >= 10 {
            status = SolveStatus::NumericalFailure;
            break;
        }

        // Nesterov-Todd scaling point per block: W Z W = X.
        let mut ws = Vec::with_capacity(p.dims.len());
        let mut z_inv = Vec::with_capacity(p.dims.len());
        let mut failed = false;
        for b in 0..p.dims.len() {
            let xs = sym_pow(&x[b], 0.5);
            let (w, zi) = match (xs, Cholesky::new(z[b].clone())) {
                (Some(xs), Some(zc)) => {
                    let inner = &xs * &z[b] * &xs;
                    match sym_pow(&inner, -0.5) {
                        Some(is) => (&xs * is * &xs, zc.inverse()),
                        None => {
                            failed = true;
                            break;
                        }
                    }
                }
                _ => {
                    failed = true;
                    break;
                }
            };
            ws.push(w);
            z_inv.push(zi);
        }
        if failed {
            status = SolveStatus::NumericalFailure;
            break;
        }

        let schur = p.schur(Some(&ws));
        let chol = match chol_with_reg(&schur, &mut reg_used) {
            Some(c) => c,
            None => {
                status = SolveStatus::NumericalFailure;
                break;
            }
        };
        let w_rd_w: Vec<DMatrix<f64>> = (0..p.dims.len())
            .map(|b| &ws[b] * &rd[b] * &ws[b])
            .collect();
        let a_wrdw = p.apply_a(&w_rd_w);

        // Predictor (affine scaling, sigma = 0): central-path residual -X.
        let rc_aff: Vec<DMatrix<f64>> = x.iter().map(|xb| -xb).collect();
        let rhs_aff = &rp + &a_wrdw - p.apply_a(&rc_aff);
        let dy_aff = solve_refined(&chol, &schur, &rhs_aff);
        let at_dy = p.apply_at(&dy_aff);
        let dz_aff: Vec<DMatrix<f64>> = rd.iter().zip(&at_dy).map(|(r, a)| r - a).collect();
        let dx_aff: Vec<DMatrix<f64>> = (0..p.dims.len())
            .map(|b| &rc_aff[b] - &ws[b] * &dz_aff[b] * &ws[b])
            .collect();
        let ap_aff = (0..p.dims.len())
            .map(|b| max_step(&x[b], &dx_aff[b]))
            .fold(1.0_f64, f64::min);
        let ad_aff = (0..p.dims.len())
            .map(|b| max_step(&z[b], &dz_aff[b]))
            .fold(1.0_f64, f64::min);
        let mut mu_aff = 0.0;
        for b in 0..p.dims.len() {
            let xa = &x[b] + &dx_aff[b] * ap_aff;
            let za = &z[b] + &dz_aff[b] * ad_aff;
            mu_aff += xa.dot(&za);
        }
        mu_aff = (mu_aff / p.total_dim as f64).max(0.0);
        let sigma = (mu_aff / mu).powi(3).clamp(1e-10, 1.0);

        // Corrector: sigma*mu*Z^-1 - X - sym(dX dZ Z^-1). The second-order
        // term can be harmful far from the central path, so fall back to
        // pure centering when it shortens the step decisively below the
        // affine step (Mehrotra safeguard).
        let solve_direction = |rc: &[DMatrix<f64>]| {
            let rhs = &rp + &a_wrdw - p.apply_a(rc);
            let dy = solve_refined(&chol, &schur, &rhs);
            let at_dy = p.apply_at(&dy);
            let dz: Vec<DMatrix<f64>> = rd.iter().zip(&at_dy).map(|(r, a)| r - a).collect();
            let dx: Vec<DMatrix<f64>> = (0..p.dims.len())
                .map(|b| &rc[b] - &ws[b] * &dz[b] * &ws[b])
                .collect();
            let ap = (0..p.dims.len())
                .map(|b| 0.98 * max_step(&x[b], &dx[b]))
                .fold(1.0_f64, f64::min)
                .min(1.0);
            let ad = (0..p.dims.len())
                .map(|b| 0.98 * max_step(&z[b], &dz[b]))
                .fold(1.0_f64, f64::min)
                .min(1.0);
            (dy, dz, dx, ap, ad)
        };
        let centering: Vec<DMatrix<f64>> = (0..p.dims.len())
            .map(|b| &z_inv[b] * (sigma * mu) - &x[b])
            .collect();
        let rc: Vec<DMatrix<f64>> = (0..p.dims.len())
            .map(|b| {
                let second = &dx_aff[b] * &dz_aff[b] * &z_inv[b];
                &centering[b] - (&second + second.transpose()) * 0.5
            })
            .collect();
        let (mut dy, mut dz, mut dx, mut ap, mut ad) = solve_direction(&rc);
        if ap.min(ad) < 0.3 * (0.98 * ap_aff.min(ad_aff)).min(1.0) {
            let fallback = solve_direction(&centering);
            if fallback.3.min(fallback.4) > ap.min(ad) {
                (dy, dz, dx, ap, ad) = fallback;
            }
        }
        if opts.verbose {
            eprintln!(
                "          sigma {:9.2e}  ap {:9.2e}  ad {:9.2e}  (aff {:9.2e} {:9.2e})",
                sigma, ap, ad, ap_aff, ad_aff
            );
        }
        if ap <= 1e-10 && ad <= 1e-10 {
            status = SolveStatus::NumericalFailure;
            break;
        }
        for b in 0..p.dims.len() {
            x[b] += &dx[b] * ap;
            z[b] += &dz[b] * ad;
        }
        y += &dy * ad;

        if let Some(g) = &gram_chol {
            let backup = x.clone();
            project_feasible(&p, &mut x, &gram, g);
            // The projection is not cone-aware; revert it if any block
            // left (or got too close to) the boundary.
            let min_eig = x
                .iter()
                .filter(|xb| xb.nrows() > 0)
                .map(|xb| {
                    xb.symmetric_eigenvalues()
                        .iter()
                        .cloned()
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(f64::INFINITY, f64::min);
            if min_eig <= 0.0 {
                x = backup;
            }
        }
    }

    if !converged {
        if let Some((bx, by, bz)) = best {
            x = bx;
            y = by;
            z = bz;
        }
    }
    // Final primal feasibility projection: the certificate lives in X, so
    // push the equality residuals down to machine precision regardless of
    // how the iteration ended. Prefer the cone-preserving X-weighted
    // projection; fall back to the plain one if it cannot drive the
    // residual far enough down.
    let residual = |x: &[DMatrix<f64>]| -> f64 {
        p.rhs
            .iter()
            .zip(p.cons.iter())
            .map(|(b, c)| (b - sparse_inner(c, x)).abs())
            .fold(0.0_f64, f64::max)
    };
    let weighted_ok =
        project_feasible_weighted(&p, &mut x, &mut reg_used) && residual(&x) <= 1e-11;
    if opts.verbose {
        eprintln!("weighted projection ok: {} (residual {:.2e})", weighted_ok, residual(&x));
    }
    if !weighted_ok {
        if let Some(g) = &gram_chol {
            project_feasible(&p, &mut x, &gram, g);
        }
    }

    // Alternating-projection polish between the PSD cone and the affine
    // constraint set: the interior-point extraction can sit a hair outside
    // the cone, and the exact certificate downstream needs true PSD-ness.
    if let Some(g) = &gram_chol {
        let min_eig = |blocks: &[DMatrix<f64>]| -> f64 {
            blocks
                .iter()
                .filter(|b| b.nrows() > 0)
                .map(|b| {
                    b.clone()
                        .symmetric_eigen()
                        .eigenvalues
                        .iter()
                        .cloned()
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(f64::INFINITY, f64::min)
        };
        let mut best_x = x.clone();
        let mut best_me = min_eig(&x);
        for _ in 0..120 {
            if best_me >= 0.0 {
                break;
            }
            for xb in x.iter_mut().filter(|b| b.nrows() > 0) {
                let floor = 1e-11 * (1.0 + xb.amax());
                let eig = xb.clone().symmetric_eigen();
                let lam_min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
                if lam_min < floor {
                    let mut vecs = eig.eigenvectors.clone();
                    for (j, mut col) in vecs.column_iter_mut().enumerate() {
                        col *= eig.eigenvalues[j].max(floor);
                    }
                    let repaired = &vecs * eig.eigenvectors.transpose();
                    *xb = (&repaired + repaired.transpose()) * 0.5;
                }
            }
            project_feasible(&p, &mut x, &gram, g);
            let me = min_eig(&x);
            if me > best_me {
                best_me = me;
                best_x = x.clone();
            }
        }
        x = best_x;
    }

    let obj_p = offset + block_inner(&p.cost, &x);
    let obj_d = offset + p.rhs.iter().zip(y.iter()).map(|(b, yj)| b * yj).sum::<f64>();
    // Undo row scaling on the dual vector and re-insert pruned rows.
    let mut y_full = vec![0.0; model.constraints.len()];
    for (i, &orig) in p.kept.iter().enumerate() {
        y_full[orig] = y[i] / p.scales[i];
    }
    Ok(SdpSolution {
        primal_blocks: x,
        dual_vector: y_full,
        dual_blocks: z,
        objective_primal: obj_p,
        objective_dual: obj_d,
        status,
        iterations,
        regularization: reg_used,
    })
}

/// Maximum equality violation `max_j |<A_j, X> - b_j|` of a solution
/// against a model, in f64.
pub fn max_violation(model: &BlockSdp, sol: &SdpSolution) -> f64 {
    model
        .constraints
        .iter()
        .map(|c| {
            let ax: f64 = c
                .entries
                .iter()
                .map(|e| {
                    let factor = if e.row == e.col { 1.0 } else { 2.0 };
                    factor * rat_to_f64(&e.value) * sol.primal_blocks[e.block][(e.row, e.col)]
                })
                .sum();
            (ax - rat_to_f64(&c.rhs)).abs()
        })
        .fold(0.0_f64, f64::max)
}

/// Writes a solution in the SDPA solution convention: one line with the
/// dual vector y, then upper-triangular entries "matno blockno i j value"
/// with matno 1 = dual blocks Z, matno 2 = primal blocks X.
pub fn export_solution(sol: &SdpSolution, path: &str) -> Result<(), SolveError> {
    let mut out = std::fs::File::create(path)?;
    let y_line: Vec<String> = sol.dual_vector.iter().map(|v| format!("{}", v)).collect();
    writeln!(out, "{}", y_line.join(" "))?;
    for (matno, blocks) in [(1usize, &sol.dual_blocks), (2, &sol.primal_blocks)] {
        for (b, mat) in blocks.iter().enumerate() {
            for i in 0..mat.nrows() {
                for j in i..mat.ncols() {
                    let v = mat[(i, j)];
                    if v != 0.0 {
                        writeln!(out, "{} {} {} {} {}", matno, b + 1, i + 1, j + 1, v)?;
                    }
                }
            }
        }
    }
    Ok(())
}

/// Reads a solution in the SDPA solution convention and recomputes
/// objectives and status against the model.
pub fn import_solution(model: &BlockSdp, path: &str) -> Result<SdpSolution, SolveError> {
    let text = std::fs::read_to_string(path)?;
    let dims: Vec<usize> = model.blocks.iter().map(|b| b.dim).collect();
    let mut x = dense_blocks(&dims);
    let mut z = dense_blocks(&dims);
    let mut y: Option<Vec<f64>> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('*') || line.starts_with('"') {
            continue;
        }
        if y.is_none() {
            let vals: Result<Vec<f64>, _> = line.split_whitespace().map(|w| w.parse()).collect();
            let vals =
                vals.map_err(|_| SolveError::Parse(lineno + 1, "bad y vector".into()))?;
            if vals.len() != model.constraints.len() {
                return Err(SolveError::Mismatch(format!(
                    "y vector has {} entries, model has {} constraints",
                    vals.len(),
                    model.constraints.len()
                )));
            }
            y = Some(vals);
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 5 {
            return Err(SolveError::Parse(lineno + 1, format!("bad entry {:?}", line)));
        }
        let matno: usize = parts[0]
            .parse()
            .map_err(|_| SolveError::Parse(lineno + 1, "bad matno".into()))?;
        let block: usize = parts[1]
            .parse::<usize>()
            .map_err(|_| SolveError::Parse(lineno + 1, "bad blockno".into()))?
            .checked_sub(1)
            .ok_or_else(|| SolveError::Parse(lineno + 1, "blockno must be >= 1".into()))?;
        let i: usize = parts[2]
            .parse::<usize>()
            .map_err(|_| SolveError::Parse(lineno + 1, "bad row".into()))?
            - 1;
        let j: usize = parts[3]
            .parse::<usize>()
            .map_err(|_| SolveError::Parse(lineno + 1, "bad col".into()))?
            - 1;
        let v: f64 = parts[4]
            .parse()
            .map_err(|_| SolveError::Parse(lineno + 1, "bad value".into()))?;
        if block >= dims.len() || i >= dims[block] || j >= dims[block] {
            return Err(SolveError::Mismatch(format!(
                "entry ({},{},{}) outside model blocks",
                block + 1,
                i + 1,
                j + 1
            )));
        }
        let target = match matno {
            1 => &mut z,
            2 => &mut x,
            _ => {
                return Err(SolveError::Parse(
                    lineno + 1,
                    format!("matno {} not in {{1,2}}", matno),
                ))
            }
        };
        target[block][(i, j)] = v;
        target[block][(j, i)] = v;
    }
    let y = y.ok_or_else(|| SolveError::Parse(0, "missing y vector line".into()))?;
    let offset = rat_to_f64(&model.objective_offset);
    let mut cost = dense_blocks(&dims);
    for e in &model.cost {
        sym_set(&mut cost[e.block], e.row, e.col, rat_to_f64(&e.value));
    }
    let obj_p = offset + block_inner(&cost, &x);
    let obj_d = offset
        + model
            .constraints
            .iter()
            .zip(y.iter())
            .map(|(c, yj)| rat_to_f64(&c.rhs) * yj)
            .sum::<f64>();
    let mut sol = SdpSolution {
        primal_blocks: x,
        dual_vector: y,
        dual_blocks: z,
        objective_primal: obj_p,
        objective_dual: obj_d,
        status: SolveStatus::Optimal,
        iterations: 0,
        regularization: 0.0,
    };
    let viol = max_violation(model, &sol);
    if sol.relative_gap() > 1e-6 || viol > 1e-6 {
        sol.status = SolveStatus::NumericalFailure;
    }
    Ok(sol)
}

/// Minimum eigenvalue over all primal blocks, for feasibility reporting.
pub fn min_block_eigenvalue(sol: &SdpSolution) -> f64 {
    sol.primal_blocks
        .iter()
        .filter(|b| b.nrows() > 0)
        .map(|b| {
            b.symmetric_eigenvalues()
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, rat_i};
    use crate::sosmodel::{
        build_lp_model, BlockKind, BlockSpec, BoundProblem, Constraint, MatEntry, ProblemKind,
    };

    fn simple_model(
        blocks: Vec<(usize, BlockKind)>,
        cost: Vec<(usize, usize, usize, i64)>,
        cons: Vec<(Vec<(usize, usize, usize, i64)>, i64)>,
    ) -> BlockSdp {
        BlockSdp {
            blocks: blocks
                .into_iter()
                .enumerate()
                .map(|(i, (dim, kind))| BlockSpec {
                    label: format!("b{}", i),
                    dim,
                    kind,
                })
                .collect(),
            cost: cost
                .into_iter()
                .map(|(b, r, c, v)| MatEntry {
                    block: b,
                    row: r,
                    col: c,
                    value: rat_i(v),
                })
                .collect(),
            constraints: cons
                .into_iter()
                .map(|(entries, rhs)| Constraint {
                    entries: entries
                        .into_iter()
                        .map(|(b, r, c, v)| MatEntry {
                            block: b,
                            row: r,
                            col: c,
                            value: rat_i(v),
                        })
                        .collect(),
                    rhs: rat_i(rhs),
                })
                .collect(),
            objective_offset: rat_i(0),
            problem: None,
        }
    }

    #[test]
    fn scalar_equality() {
        // min x s.t. x = 1, x >= 0.
        let model = simple_model(
            vec![(1, BlockKind::Psd)],
            vec![(0, 0, 0, 1)],
            vec![(vec![(0, 0, 0, 1)], 1)],
        );
        let sol = solve(&model, &SolveOpts::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective_primal - 1.0).abs() < 1e-7);
        assert!((sol.primal_blocks[0][(0, 0)] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn trace_min_offdiag_pin() {
        // min trace(X) s.t. X12 = 1, X PSD 2x2 -> objective 2.
        let model = simple_model(
            vec![(2, BlockKind::Psd)],
            vec![(0, 0, 0, 1), (0, 1, 1, 1)],
            vec![(vec![(0, 0, 1, 1)], 2)], // off-diag counted twice: 2*x12 = 2
        );
        let sol = solve(&model, &SolveOpts::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective_primal - 2.0).abs() < 1e-6);
        assert!((sol.primal_blocks[0][(0, 1)] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn diagonal_block_lp() {
        // min x1 + 2 x2 s.t. x1 + x2 = 1, x >= 0 -> 1 at (1, 0).
        let model = simple_model(
            vec![(2, BlockKind::Diagonal)],
            vec![(0, 0, 0, 1), (0, 1, 1, 2)],
            vec![(vec![(0, 0, 0, 1), (0, 1, 1, 1)], 1)],
        );
        let sol = solve(&model, &SolveOpts::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective_primal - 1.0).abs() < 1e-7);
    }

    #[test]
    fn feasibility_projection_tightens_residuals() {
        let model = simple_model(
            vec![(2, BlockKind::Psd)],
            vec![(0, 0, 0, 1), (0, 1, 1, 1)],
            vec![(vec![(0, 0, 1, 1)], 2)],
        );
        let sol = solve(&model, &SolveOpts::default()).unwrap();
        assert!(max_violation(&model, &sol) < 1e-12);
    }

    #[test]
    fn determinism() {
        let model = simple_model(
            vec![(2, BlockKind::Psd), (2, BlockKind::Diagonal)],
            vec![(0, 0, 0, 1), (0, 1, 1, 1), (1, 0, 0, 1)],
            vec![
                (vec![(0, 0, 1, 1), (1, 1, 1, 1)], 2),
                (vec![(1, 0, 0, 1), (1, 1, 1, 1)], 1),
            ],
        );
        let a = solve(&model, &SolveOpts::default()).unwrap();
        let b = solve(&model, &SolveOpts::default()).unwrap();
        assert_eq!(a.objective_primal.to_bits(), b.objective_primal.to_bits());
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn scale_invariance_of_status() {
        let base = simple_model(
            vec![(2, BlockKind::Psd)],
            vec![(0, 0, 0, 1), (0, 1, 1, 1)],
            vec![(vec![(0, 0, 1, 1)], 2)],
        );
        let mut scaled = base.clone();
        for e in scaled.cost.iter_mut() {
            e.value *= rat_i(10);
        }
        for c in scaled.constraints.iter_mut() {
            c.rhs *= rat_i(10);
        }
        let a = solve(&base, &SolveOpts::default()).unwrap();
        let b = solve(&scaled, &SolveOpts::default()).unwrap();
        assert_eq!(a.status, SolveStatus::Optimal);
        assert_eq!(b.status, SolveStatus::Optimal);
        // cost x10 and rhs x10 scales the objective by 100.
        assert!((b.objective_primal - 100.0 * a.objective_primal).abs() < 1e-3);
        assert!((a.iterations as i64 - b.iterations as i64).abs() <= 2);
    }

    #[test]
    fn zero_row_pruned_and_inconsistent_rejected() {
        let mut model = simple_model(
            vec![(1, BlockKind::Psd)],
            vec![(0, 0, 0, 1)],
            vec![(vec![(0, 0, 0, 1)], 1), (vec![], 0)],
        );
        let sol = solve(&model, &SolveOpts::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_eq!(sol.dual_vector.len(), 2);
        assert_eq!(sol.dual_vector[1], 0.0);
        model.constraints[1].rhs = rat_i(1);
        assert!(matches!(
            solve(&model, &SolveOpts::default()),
            Err(SolveError::InconsistentZeroRow(1, _))
        ));
    }

    #[test]
    fn lp_model_n3_d11_matches_table() {
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
        let sol = solve(&model, &SolveOpts::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        // The classical LP optimum for n = 3 is about 13.158; the table
        // reports its floor, 13.
        assert_eq!(sol.objective_primal.floor(), 13.0, "objective {}", sol.objective_primal);
        assert!(sol.objective_primal < 13.2);
    }

    #[test]
    fn solution_round_trip() {
        let model = simple_model(
            vec![(2, BlockKind::Psd)],
            vec![(0, 0, 0, 1), (0, 1, 1, 1)],
            vec![(vec![(0, 0, 1, 1)], 2)],
        );
        let sol = solve(&model, &SolveOpts::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sol.out");
        export_solution(&sol, path.to_str().unwrap()).unwrap();
        let back = import_solution(&model, path.to_str().unwrap()).unwrap();
        assert!((back.objective_primal - sol.objective_primal).abs() < 1e-10);
        assert!((back.objective_dual - sol.objective_dual).abs() < 1e-10);
    }

    #[test]
    fn hand_written_solution_parses() {
        let model = simple_model(
            vec![(1, BlockKind::Psd)],
            vec![(0, 0, 0, 1)],
            vec![(vec![(0, 0, 0, 1)], 1)],
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hand.out");
        std::fs::write(&path, "1.0\n1 1 1 1 1.0\n2 1 1 1 1.0\n").unwrap();
        let sol = import_solution(&model, path.to_str().unwrap()).unwrap();
        assert_eq!(sol.primal_blocks[0][(0, 0)], 1.0);
        assert_eq!(sol.dual_blocks[0][(0, 0)], 1.0);
        assert_eq!(sol.dual_vector, vec![1.0]);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective_primal - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_solution_rejected() {
        let model = simple_model(
            vec![(1, BlockKind::Psd)],
            vec![(0, 0, 0, 1)],
            vec![(vec![(0, 0, 0, 1)], 1)],
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.out");
        std::fs::write(&path, "1.0 2.0\n").unwrap();
        assert!(matches!(
            import_solution(&model, path.to_str().unwrap()),
            Err(SolveError::Mismatch(_))
        ));
        std::fs::write(&path, "1.0\n2 2 1 1 1.0\n").unwrap();
        assert!(matches!(
            import_solution(&model, path.to_str().unwrap()),
            Err(SolveError::Mismatch(_))
        ));
    }
}
