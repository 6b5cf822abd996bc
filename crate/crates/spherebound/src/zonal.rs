//! Zonal matrices with polynomial entries in the three inner products, and
//! their symmetrizations.
//!
//! The monomial normalization `u^i v^j Q_k^{n-1}(u,v,t)` is the default:
//! it keeps every entry rational (no square roots) and differs from the
//! diagonal-normalized form by congruence with an invertible diagonal
//! matrix, which preserves the matrix-type positivity property that is the
//! only thing consumed downstream. The diagonal-normalized entries are
//! rational too and are kept for the structural identity check.

use crate::exact::rat_u;
use crate::orthopoly::{gegenbauer, harm_dim, lambda_rat, q_poly};
use crate::tripoly::{PolyMatrix, TriPoly, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Entries `u^i v^j Q_k^{n-1}`.
    Monomial,
    /// Diagonal entries of the paper-normalized matrix (always rational).
    PaperDiagonal,
}

/// Truncation of the infinite zonal matrix for harmonic level `k` to size
/// `(d-k+1) x (d-k+1)`.
#[derive(Debug, Clone)]
pub struct ZonalMatrix {
    pub n: u32,
    pub k: u32,
    pub d: u32,
    pub body: PolyMatrix,
    pub normalization: Normalization,
}

/// Unsymmetrized zonal matrix: entry `(i,j) = u^i v^j Q_k^{n-1}(u,v,t)`.
pub fn build_y(n: u32, k: u32, d: u32) -> ZonalMatrix {
    assert!(n >= 3 && k <= d);
    let q = q_poly(n, k);
    let size = (d - k + 1) as usize;
    let mut body = PolyMatrix::zero(size);
    let u = TriPoly::var(Var::U);
    let v = TriPoly::var(Var::V);
    for i in 0..size {
        for j in 0..size {
            let m = u.pow(i as u32).mul(&v.pow(j as u32));
            body.set(i, j, m.mul(&q));
        }
    }
    ZonalMatrix {
        n,
        k,
        d,
        body,
        normalization: Normalization::Monomial,
    }
}

/// Symmetrization over the variable permutations; entries become symmetric
/// polynomials and the matrix itself becomes symmetric.
pub fn build_s(n: u32, k: u32, d: u32) -> ZonalMatrix {
    let y = build_y(n, k, d);
    ZonalMatrix {
        body: y.body.symmetrize(),
        ..y
    }
}

/// Paper-normalized diagonal entry
/// `lambda_rat(n,k) h_i^{n+2k} P_i^{n+2k}(u) P_i^{n+2k}(v) Q_k^{n-1}(u,v,t)`.
pub fn diagonal_paper_entry(n: u32, k: u32, i: u32) -> TriPoly {
    assert!(n >= 3);
    let scalar = lambda_rat(n, k) * rat_u(harm_dim(n + 2 * k, i));
    let pu = gegenbauer(n + 2 * k, i).to_tripoly(Var::U);
    let pv = gegenbauer(n + 2 * k, i).to_tripoly(Var::V);
    pu.mul(&pv).mul(&q_poly(n, k)).scale(&scalar)
}

/// Checks, as exact polynomial identities, that the diagonal zonal entries
/// recombine into `P_k^n(t)` and (symmetrized) into the average of
/// `P_k^n` over the three variables. Returns the residual on failure.
pub fn check_py_identity(n: u32, k: u32) -> Result<(), TriPoly> {
    let hkn = rat_u(harm_dim(n, k));
    let mut sum = TriPoly::zero();
    let mut sum_sym = TriPoly::zero();
    for s in 0..=k {
        let w = rat_u(harm_dim(n - 1, s)) / &hkn;
        let diag = diagonal_paper_entry(n, s, k - s);
        sum = sum.add(&diag.scale(&w));
        sum_sym = sum_sym.add(&diag.symmetrize().scale(&w));
    }
    let pk = gegenbauer(n, k);
    let residual = sum.sub(&pk.to_tripoly(Var::T));
    if !residual.is_zero() {
        return Err(residual);
    }
    let avg = pk
        .to_tripoly(Var::U)
        .add(&pk.to_tripoly(Var::V))
        .add(&pk.to_tripoly(Var::T))
        .scale(&crate::exact::rat(1, 3));
    let residual_sym = sum_sym.sub(&avg);
    if !residual_sym.is_zero() {
        return Err(residual_sym);
    }
    Ok(())
}
