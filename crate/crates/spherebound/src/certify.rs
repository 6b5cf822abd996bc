//! Exact rational certificates: rounding a floating SDP solution into
//! rational data, and verifying the bound it claims with no floating-point
//! trust.
//!
//! Verification reconstructs the two SOS identity residuals in exact
//! arithmetic, re-deriving the Gegenbauer polynomials and the matrices
//! `S_k^n` from `(n, d)` rather than trusting anything beyond the numbers
//! in the certificate, and accepts when each residual has coefficient
//! l1-norm at most the margin `eps`: on `[-1, 1]^3` (which contains both
//! domains) the residual is then pointwise dominated by the slack that the
//! margin baked into the identities, so the inequality constraints of the
//! underlying theorems hold exactly.

use crate::exact::{psd_check, rat_i, round_to_rational, PsdOutcome, Rat, RatMatrix};
use crate::orthopoly::gegenbauer;
use crate::sosmodel::{
    domain_polys, tri_gram_basis, uni_gram_basis, BlockSdp, BoundProblem, ProblemKind,
};
use crate::solver::{SdpSolution, SolveStatus};
use crate::tripoly::{Mono, TriPoly, Var};
use crate::zonal::build_s;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub const CERTIFICATE_FORMAT_VERSION: u32 = 1;

/// Default denominator bound for rounding, 2^30.
pub const DEFAULT_DENOMINATOR_BOUND: u64 = 1 << 30;

/// The 2x2 PSD variable of the three-point bound, stored by entries.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BEntries {
    #[serde(with = "crate::exact::rat_serde")]
    pub b11: Rat,
    #[serde(with = "crate::exact::rat_serde")]
    pub b12: Rat,
    #[serde(with = "crate::exact::rat_serde")]
    pub b22: Rat,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct LabeledMatrix {
    pub label: String,
    pub matrix: RatMatrix,
}

/// Exact rational proof object for one bound computation.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Certificate {
    pub format_version: u32,
    pub problem: BoundProblem,
    /// a_1..a_d (SDP) or f_1..f_d (LP).
    #[serde(with = "crate::exact::rat_serde::vec")]
    pub a: Vec<Rat>,
    /// SDP only.
    pub b: Option<BEntries>,
    /// F_0..F_d, SDP only.
    pub f_blocks: Vec<RatMatrix>,
    /// SOS Gram matrices: q, q1 and, for the SDP, r, r1..r4.
    pub grams: Vec<LabeledMatrix>,
    #[serde(with = "crate::exact::rat_serde")]
    pub claimed_bound: Rat,
}

#[derive(Debug, thiserror::Error)]
pub enum CertifyError {
    #[error("solution status {0:?} is not usable for a certificate")]
    NotSolved(SolveStatus),
    #[error("model carries no bound problem description")]
    MissingProblem,
    #[error("model/solution shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite solution entry in block {0}")]
    NonFinite(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("certificate parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported certificate format version {0}")]
    BadVersion(u32),
}

/// Result of exact verification.
#[derive(Debug, Clone)]
pub enum VerifyOutcome {
    /// The certificate proves `A(n, theta) <= bound`.
    Pass { bound: Rat },
    Fail { reason: String },
}

impl VerifyOutcome {
    pub fn is_pass(&self) -> bool {
        matches!(self, VerifyOutcome::Pass { .. })
    }
}

/// Nearest rational with a power-of-two denominator within the bound. A
/// dyadic grid loses a few digits of accuracy against the best
/// continued-fraction approximant, but keeps every certificate entry on a
/// common power-of-two denominator, which is what makes the exact residual
/// reconstruction in `verify` tractable: sums of dyadic rationals never
/// grow their denominators past the grid, while sums of generic
/// denominator-bounded rationals blow up to the lcm of all of them.
fn round_dyadic(x: f64, denominator_bound: u64) -> Result<Rat, crate::exact::ExactError> {
    if !x.is_finite() {
        return Err(crate::exact::ExactError::NonFinite(x));
    }
    let bits = 63 - denominator_bound.max(1).leading_zeros() as u64;
    let scale = (1u64 << bits) as f64;
    let scaled = x * scale;
    if scaled.abs() < 9e15 {
        Ok(Rat::new(
            BigInt::from(scaled.round() as i64),
            BigInt::from(1u64 << bits),
        ))
    } else {
        // Out of the exactly-representable integer range; fall back to the
        // continued-fraction rounding.
        round_to_rational(x, denominator_bound)
    }
}

fn round_matrix(
    label: &str,
    m: &nalgebra::DMatrix<f64>,
    denominator_bound: u64,
) -> Result<RatMatrix, CertifyError> {
    let dim = m.nrows();
    let mut out = RatMatrix::zero(dim);
    for i in 0..dim {
        for j in i..dim {
            // Symmetrize before rounding; the solver keeps blocks symmetric
            // to machine precision but the certificate must be exactly so.
            let x = 0.5 * (m[(i, j)] + m[(j, i)]);
            let r = round_dyadic(x, denominator_bound)
                .map_err(|_| CertifyError::NonFinite(label.to_string()))?;
            out.set(i, j, r);
        }
    }
    Ok(out)
}

/// Smallest diagonal shift (a power of two) that makes `m + s I` pass the
/// exact PSD test, guided by the negative witnesses; gives up once the
/// accumulated shift reaches `2^-16`. Returns the applied shift.
fn repair_psd(m: &mut RatMatrix) -> Rat {
    let mut total = Rat::zero();
    let cap = Rat::new(BigInt::one(), BigInt::from(1u64 << 16));
    loop {
        let witness = match psd_check(m) {
            PsdOutcome::Psd { .. } => return total,
            PsdOutcome::NotPsd { witness, value } => (witness, value),
        };
        if total >= cap {
            return total;
        }
        let norm2: Rat = witness.0.iter().map(|w| w * w).sum();
        let needed = -&witness.1 / norm2;
        // Round up to a power of two and double for slack.
        let mut s = Rat::new(BigInt::one(), BigInt::from(1u64 << 60));
        while s < needed {
            s = s * rat_i(2);
        }
        s = s * rat_i(2);
        for i in 0..m.dim() {
            m.add_to(i, i, &s);
        }
        total += s;
    }
}

fn bound_from_parts(kind: ProblemKind, a: &[Rat], b: &Option<BEntries>, f0: Option<&RatMatrix>) -> Rat {
    let mut bound = Rat::one() + a.iter().sum::<Rat>();
    if kind == ProblemKind::Sdp {
        if let Some(b) = b {
            bound += &b.b11;
        }
        if let Some(f0) = f0 {
            bound += f0.entry_sum();
        }
    }
    bound
}

/// Rounds every entry of a solved model to rationals with denominators at
/// most `denominator_bound`, clamps the `a_k` at zero, nudges any block
/// that the rounding pushed off the PSD cone back onto it, and recomputes
/// the claimed bound exactly.
pub fn rationalize(
    model: &BlockSdp,
    sol: &SdpSolution,
    denominator_bound: u64,
) -> Result<Certificate, CertifyError> {
    let problem = model.problem.clone().ok_or(CertifyError::MissingProblem)?;
    if sol.status == SolveStatus::InfeasibleSuspected {
        return Err(CertifyError::NotSolved(sol.status));
    }
    if sol.primal_blocks.len() != model.blocks.len() {
        return Err(CertifyError::ShapeMismatch(format!(
            "{} solution blocks for {} model blocks",
            sol.primal_blocks.len(),
            model.blocks.len()
        )));
    }
    let take = |label: &str| -> Result<RatMatrix, CertifyError> {
        let idx = model
            .block_index(label)
            .ok_or_else(|| CertifyError::ShapeMismatch(format!("missing block {:?}", label)))?;
        round_matrix(label, &sol.primal_blocks[idx], denominator_bound)
    };

    let diag_label = match problem.kind {
        ProblemKind::Lp => "f",
        ProblemKind::Sdp => "a",
    };
    let diag = take(diag_label)?;
    let a: Vec<Rat> = (0..diag.dim())
        .map(|i| {
            let v = diag.get(i, i);
            if v.is_negative() {
                Rat::zero()
            } else {
                v.clone()
            }
        })
        .collect();

    let (b, f_blocks) = match problem.kind {
        ProblemKind::Lp => (None, Vec::new()),
        ProblemKind::Sdp => {
            let mut bm = take("b")?;
            repair_psd(&mut bm);
            let b = BEntries {
                b11: bm.get(0, 0).clone(),
                b12: bm.get(0, 1).clone(),
                b22: bm.get(1, 1).clone(),
            };
            let mut fs = Vec::new();
            for k in 0..=problem.d {
                let mut f = take(&format!("F{}", k))?;
                repair_psd(&mut f);
                fs.push(f);
            }
            (Some(b), fs)
        }
    };

    let gram_labels: &[&str] = match problem.kind {
        ProblemKind::Lp => &["q", "q1"],
        ProblemKind::Sdp => &["q", "q1", "r", "r1", "r2", "r3", "r4"],
    };
    let mut grams = Vec::new();
    for label in gram_labels {
        let mut g = take(label)?;
        repair_psd(&mut g);
        grams.push(LabeledMatrix {
            label: label.to_string(),
            matrix: g,
        });
    }

    let claimed_bound = bound_from_parts(problem.kind, &a, &b, f_blocks.first());
    Ok(Certificate {
        format_version: CERTIFICATE_FORMAT_VERSION,
        problem,
        a,
        b,
        f_blocks,
        grams,
        claimed_bound,
    })
}

/// `sum_{a,b} G[a][b] u^{e_a + e_b}` as a polynomial in `var`.
fn uni_sos_poly(g: &RatMatrix, basis: &[u32], var: Var) -> TriPoly {
    let mut out = TriPoly::zero();
    for a in 0..basis.len() {
        for b in a..basis.len() {
            let c = if a == b {
                g.get(a, b).clone()
            } else {
                g.get(a, b) * rat_i(2)
            };
            let e = basis[a] + basis[b];
            let m = match var {
                Var::U => Mono::new(e, 0, 0),
                Var::V => Mono::new(0, e, 0),
                Var::T => Mono::new(0, 0, e),
            };
            out.add_term(m, c);
        }
    }
    out
}

fn tri_sos_poly(g: &RatMatrix, basis: &[Mono]) -> TriPoly {
    let mut out = TriPoly::zero();
    for a in 0..basis.len() {
        for b in a..basis.len() {
            let c = if a == b {
                g.get(a, b).clone()
            } else {
                g.get(a, b) * rat_i(2)
            };
            out.add_term(basis[a].mul(&basis[b]), c);
        }
    }
    out
}

/// `<F, S>` as the full symmetric inner product (off-diagonal twice).
fn frob_poly(f: &RatMatrix, s: &crate::tripoly::PolyMatrix) -> TriPoly {
    let mut out = TriPoly::zero();
    for i in 0..s.dim() {
        for j in 0..s.dim() {
            out = out.add(&s.get(i, j).scale(f.get(i, j)));
        }
    }
    out
}

struct CheckedGrams<'c> {
    by_label: std::collections::BTreeMap<&'c str, &'c RatMatrix>,
}

impl<'c> CheckedGrams<'c> {
    fn get(&self, label: &str) -> Result<&'c RatMatrix, String> {
        self.by_label
            .get(label)
            .copied()
            .ok_or_else(|| format!("missing Gram block {:?}", label))
    }
}

/// Exact verification: PSD tests on every matrix block, nonnegativity of
/// the `a_k`, exact recomputation of the claimed bound, and the residual
/// l1 test on both SOS identities. Everything after the certificate is
/// parsed runs in rational arithmetic.
pub fn verify(cert: &Certificate) -> VerifyOutcome {
    match verify_inner(cert) {
        Ok(bound) => VerifyOutcome::Pass { bound },
        Err(reason) => VerifyOutcome::Fail { reason },
    }
}

fn verify_inner(cert: &Certificate) -> Result<Rat, String> {
    if cert.format_version != CERTIFICATE_FORMAT_VERSION {
        return Err(format!(
            "unsupported format version {}",
            cert.format_version
        ));
    }
    let prob = &cert.problem;
    let c = &prob.cos_theta;
    if *c <= rat_i(-1) || *c >= rat_i(1) {
        return Err(format!("cos(theta) = {} out of range", c));
    }
    let eps = &prob.margin;
    if eps.is_negative() {
        return Err(format!("negative margin {}", eps));
    }
    let d = prob.d;
    if cert.a.len() != d as usize {
        return Err(format!("expected {} a_k values, found {}", d, cert.a.len()));
    }
    for (k, ak) in cert.a.iter().enumerate() {
        if ak.is_negative() {
            return Err(format!("a_{} = {} is negative", k + 1, ak));
        }
    }

    // Structural checks and PSD tests.
    let min_n = match prob.kind {
        ProblemKind::Lp => 2,
        ProblemKind::Sdp => 3,
    };
    if prob.n < min_n {
        return Err(format!("dimension n = {} too small", prob.n));
    }
    match prob.kind {
        ProblemKind::Lp => {
            if cert.b.is_some() || !cert.f_blocks.is_empty() {
                return Err("LP certificate carries three-point blocks".into());
            }
        }
        ProblemKind::Sdp => {
            let b = cert.b.as_ref().ok_or("missing b block")?;
            let bm = RatMatrix::from_rows(vec![
                vec![b.b11.clone(), b.b12.clone()],
                vec![b.b12.clone(), b.b22.clone()],
            ]);
            if let PsdOutcome::NotPsd { value, .. } = psd_check(&bm) {
                return Err(format!("b block is not PSD: witness value {}", value));
            }
            if cert.f_blocks.len() != d as usize + 1 {
                return Err(format!(
                    "expected {} F blocks, found {}",
                    d + 1,
                    cert.f_blocks.len()
                ));
            }
            for (k, f) in cert.f_blocks.iter().enumerate() {
                let want = (d as usize + 1) - k;
                if f.dim() != want {
                    return Err(format!("F{} has dimension {}, expected {}", k, f.dim(), want));
                }
                if let PsdOutcome::NotPsd { value, .. } = psd_check(f) {
                    return Err(format!("F{} is not PSD: witness value {}", k, value));
                }
            }
        }
    }

    let grams = CheckedGrams {
        by_label: cert
            .grams
            .iter()
            .map(|g| (g.label.as_str(), &g.matrix))
            .collect(),
    };
    for g in cert.grams.iter() {
        if let PsdOutcome::NotPsd { value, .. } = psd_check(&g.matrix) {
            return Err(format!(
                "Gram block {:?} is not PSD: witness value {}",
                g.label, value
            ));
        }
    }

    // Exact bound recomputation.
    let bound = bound_from_parts(prob.kind, &cert.a, &cert.b, cert.f_blocks.first());
    if bound != cert.claimed_bound {
        return Err(format!(
            "claimed bound {} does not match recomputed {}",
            cert.claimed_bound, bound
        ));
    }

    // The SOS-side degree cap mirrors the model builder: the LP caps the
    // SOS polynomial degree at N directly, the SDP caps the Gram bases at
    // total degree N.
    let cap = match prob.kind {
        ProblemKind::Lp => prob.cap_n,
        ProblemKind::Sdp => 2 * prob.cap_n,
    };
    if cap < 2 {
        return Err(format!("degree cap N = {} too small", prob.cap_n));
    }
    let dp = domain_polys(c);
    let expect_dim = |label: &str, got: usize, want: usize| -> Result<(), String> {
        if got != want {
            Err(format!(
                "Gram block {:?} has dimension {}, expected {}",
                label, got, want
            ))
        } else {
            Ok(())
        }
    };

    // Identity 1, univariate in u.
    let q_basis = uni_gram_basis(cap);
    let q1_basis = uni_gram_basis(cap - 2);
    let q = grams.get("q")?;
    let q1 = grams.get("q1")?;
    expect_dim("q", q.dim(), q_basis.len())?;
    expect_dim("q1", q1.dim(), q1_basis.len())?;

    let mut lhs1 = TriPoly::constant(-(Rat::one() + eps));
    for (k, ak) in cert.a.iter().enumerate() {
        let pk = gegenbauer(prob.n, k as u32 + 1).to_tripoly(Var::U);
        lhs1 = lhs1.sub(&pk.scale(ak));
    }
    if let Some(b) = &cert.b {
        lhs1 = lhs1.sub(&TriPoly::constant(&b.b12 * rat_i(2) + &b.b22));
    }
    let s_mats: Vec<crate::tripoly::PolyMatrix> = match prob.kind {
        ProblemKind::Lp => Vec::new(),
        ProblemKind::Sdp => (0..=d).map(|k| build_s(prob.n, k, d).body).collect(),
    };
    for (k, f) in cert.f_blocks.iter().enumerate() {
        let fs = frob_poly(f, &s_mats[k]).substitute(
            &TriPoly::var(Var::U),
            &TriPoly::var(Var::U),
            &TriPoly::one(),
        );
        lhs1 = lhs1.sub(&fs.scale(&rat_i(3)));
    }
    let sos1 = uni_sos_poly(q, &q_basis, Var::U)
        .add(&dp.p.to_tripoly(Var::U).mul(&uni_sos_poly(q1, &q1_basis, Var::U)));
    let delta1 = lhs1.sub(&sos1);
    let norm1 = delta1.coeff_l1_norm();
    if norm1 > *eps {
        return Err(format!(
            "identity-1 residual l1 norm {} exceeds margin {}",
            norm1, eps
        ));
    }

    // Identity 2, trivariate (SDP only).
    if prob.kind == ProblemKind::Sdp {
        let b = cert.b.as_ref().unwrap();
        let mut lhs2 = TriPoly::constant(-(eps + &b.b22));
        for (k, f) in cert.f_blocks.iter().enumerate() {
            lhs2 = lhs2.sub(&frob_poly(f, &s_mats[k]));
        }
        let r_basis = tri_gram_basis(cap);
        let ri_basis = tri_gram_basis(cap - 2);
        let r4_basis = tri_gram_basis(2 * ((cap - 3) / 2));
        let mut sos2 = TriPoly::zero();
        for (label, basis, mult) in [
            ("r", &r_basis, TriPoly::one()),
            ("r1", &ri_basis, dp.p1.clone()),
            ("r2", &ri_basis, dp.p2.clone()),
            ("r3", &ri_basis, dp.p3.clone()),
            ("r4", &r4_basis, dp.p4.clone()),
        ] {
            let g = grams.get(label)?;
            expect_dim(label, g.dim(), basis.len())?;
            sos2 = sos2.add(&tri_sos_poly(g, basis).mul(&mult));
        }
        let delta2 = if prob.symmetry_reduction {
            // The model matched coefficients per S3-orbit only. Comparing
            // the symmetrized sides is sound because the left side is a
            // symmetric polynomial (checked below) and the domain D' is
            // invariant under permuting (u, v, t), so the symmetrized SOS
            // side is still nonnegative there.
            if !lhs2.sub(&lhs2.symmetrize()).is_zero() {
                return Err("identity-2 left side is not S3-symmetric".into());
            }
            lhs2.sub(&sos2.symmetrize())
        } else {
            lhs2.sub(&sos2)
        };
        let norm2 = delta2.coeff_l1_norm();
        if norm2 > *eps {
            return Err(format!(
                "identity-2 residual l1 norm {} exceeds margin {}",
                norm2, eps
            ));
        }
    }

    Ok(bound)
}

pub fn write_certificate(cert: &Certificate, path: &str) -> Result<(), CertifyError> {
    let text = serde_json::to_string_pretty(cert)?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_certificate(path: &str) -> Result<Certificate, CertifyError> {
    let text = std::fs::read_to_string(path)?;
    let cert: Certificate = serde_json::from_str(&text)?;
    if cert.format_version != CERTIFICATE_FORMAT_VERSION {
        return Err(CertifyError::BadVersion(cert.format_version));
    }
    Ok(cert)
}
