//! Assembly of the LP and three-point SDP bounds as block SDPs in standard
//! primal form, by exact coefficient matching of the two sum-of-squares
//! identities, plus sparse SDPA import/export.
//!
//! Identity 1 (domain `I = [-1, cos theta]`, univariate in `u`):
//!   -1 - eps - sum_k a_k P_k^n(u) - 2 b12 - b22 - 3 sum_k <F_k, S_k^n(u,u,1)>
//!     = q(u) + p(u) q1(u)
//! Identity 2 (domain `D'`, trivariate):
//!   -eps - b22 - sum_k <F_k, S_k^n(u,v,t)> = r + sum_i p_i r_i
//! with all Gram blocks PSD. The degree budget N caps the Gram bases at
//! total degree N (SOS polynomials at 2N), and coefficient matching always
//! extends to degree `max(2d, 2N)`: when `2N < 2d` the SOS side cannot
//! reach the left-hand degree and the high-degree coefficients must cancel
//! among the `F_k`.

use crate::exact::{rat_i, rat_to_f64, Rat};
use crate::orthopoly::{gegenbauer, UniPoly};
use crate::tripoly::{monomials_up_to, Mono, TriPoly, Var};
use crate::zonal::build_s;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::io::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ProblemKind {
    Lp,
    Sdp,
}

/// Parameters of one bound computation.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BoundProblem {
    pub kind: ProblemKind,
    pub n: u32,
    /// cos(theta), the right edge of the forbidden-inner-product domain.
    #[serde(with = "crate::exact::rat_serde")]
    pub cos_theta: Rat,
    /// Number of P_k / S_k levels.
    pub d: u32,
    /// SOS certificate degree budget N, >= d. For the LP this caps the
    /// polynomial degree of the SOS multipliers directly. For the SDP each
    /// Gram basis holds monomials of total degree <= N (so the SOS
    /// polynomials have degree up to 2N); that is the reading under which
    /// the published d = N = 5 and d = N = 10 results are reproducible.
    pub cap_n: u32,
    /// Feasibility margin baked into the right-hand sides.
    #[serde(with = "crate::exact::rat_serde")]
    pub margin: Rat,
    /// Match identity-2 coefficients per S3-orbit instead of per monomial.
    #[serde(default)]
    pub symmetry_reduction: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("cos(theta) must satisfy -1 < c < 1, got {0}")]
    BadCosTheta(Rat),
    #[error("degree cap N={0} is too small (need {1})")]
    DegenerateCap(u32, String),
    #[error("need N >= d, got N={0}, d={1}")]
    CapBelowD(u32, u32),
    #[error("SDP bound needs n >= 3, got {0}")]
    BadDimension(u32),
    #[error("margin must be >= 0")]
    NegativeMargin,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("SDPA parse error at line {0}: {1}")]
    Parse(usize, String),
}

/// The polynomials cutting out the domains `I` and `D'`.
#[derive(Debug, Clone)]
pub struct DomainPolys {
    /// p(u) = (1+u)(c-u), univariate.
    pub p: UniPoly,
    pub p1: TriPoly,
    pub p2: TriPoly,
    pub p3: TriPoly,
    /// The Gram determinant 1 + 2uvt - u^2 - v^2 - t^2.
    pub p4: TriPoly,
}

pub fn domain_polys(c: &Rat) -> DomainPolys {
    // (1+u)(c-u) = c + (c-1)u - u^2
    let p = UniPoly::from_coeffs(vec![c.clone(), c - Rat::one(), -Rat::one()]);
    let u = TriPoly::var(Var::U);
    let v = TriPoly::var(Var::V);
    let t = TriPoly::var(Var::T);
    let p4 = TriPoly::one()
        .add(&u.mul(&v).mul(&t).scale(&rat_i(2)))
        .sub(&u.pow(2))
        .sub(&v.pow(2))
        .sub(&t.pow(2));
    DomainPolys {
        p1: p.to_tripoly(Var::U),
        p2: p.to_tripoly(Var::V),
        p3: p.to_tripoly(Var::T),
        p4,
        p,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Psd,
    Diagonal,
}

#[derive(Debug, Clone)]
pub struct BlockSpec {
    pub label: String,
    pub dim: usize,
    pub kind: BlockKind,
}

/// One nonzero of a symmetric data matrix, stored once with `row <= col`.
#[derive(Debug, Clone)]
pub struct MatEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: Rat,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub entries: Vec<MatEntry>,
    pub rhs: Rat,
}

/// Block-diagonal SDP in standard primal form:
/// minimize `offset + <cost, X>` subject to `<A_j, X> = b_j`, `X >= 0`.
#[derive(Debug, Clone)]
pub struct BlockSdp {
    pub blocks: Vec<BlockSpec>,
    pub cost: Vec<MatEntry>,
    pub constraints: Vec<Constraint>,
    pub objective_offset: Rat,
    /// The bound problem this model encodes, when built by this module.
    pub problem: Option<BoundProblem>,
}

impl BlockSdp {
    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    pub fn block_index(&self, label: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.label == label)
    }

    /// `<A, X>` for a dense symmetric block list, off-diagonal entries
    /// counted twice.
    pub fn apply_entries_f64(entries: &[MatEntry], x_blocks: &[nalgebra::DMatrix<f64>]) -> f64 {
        entries
            .iter()
            .map(|e| {
                let v = rat_to_f64(&e.value) * x_blocks[e.block][(e.row, e.col)];
                if e.row == e.col {
                    v
                } else {
                    2.0 * v
                }
            })
            .sum()
    }
}

/// Accumulates constraint rows keyed by row id, merging duplicate entries.
struct RowBuilder {
    rows: Vec<BTreeMap<(usize, usize, usize), Rat>>,
    rhs: Vec<Rat>,
}

impl RowBuilder {
    fn new(count: usize) -> Self {
        RowBuilder {
            rows: (0..count).map(|_| BTreeMap::new()).collect(),
            rhs: vec![Rat::zero(); count],
        }
    }

    fn add(&mut self, row: usize, block: usize, i: usize, j: usize, v: Rat) {
        if v.is_zero() {
            return;
        }
        let key = (block, i.min(j), i.max(j));
        let e = self.rows[row].entry(key).or_insert_with(Rat::zero);
        *e += v;
    }

    fn finish(self) -> Vec<Constraint> {
        self.rows
            .into_iter()
            .zip(self.rhs)
            .map(|(m, rhs)| Constraint {
                entries: m
                    .into_iter()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|((block, row, col), value)| MatEntry {
                        block,
                        row,
                        col,
                        value,
                    })
                    .collect(),
                rhs,
            })
            .collect()
    }
}

fn validate_common(prob: &BoundProblem) -> Result<(), ModelError> {
    if prob.cos_theta <= rat_i(-1) || prob.cos_theta >= rat_i(1) {
        return Err(ModelError::BadCosTheta(prob.cos_theta.clone()));
    }
    if prob.margin.is_negative() {
        return Err(ModelError::NegativeMargin);
    }
    Ok(())
}

/// Univariate monomial basis for a Gram block with degree cap `cap`.
pub fn uni_gram_basis(cap: u32) -> Vec<u32> {
    (0..=(cap / 2)).collect()
}

/// Trivariate monomial basis (graded lex) for a Gram block with cap `cap`.
pub fn tri_gram_basis(cap: u32) -> Vec<Mono> {
    monomials_up_to(cap / 2)
}

/// Delsarte LP bound as a block SDP: diagonal `f` block plus two
/// univariate SOS Gram blocks matching
/// `-1 - eps - sum_k f_k P_k^n(u) = q(u) + p(u) q1(u)`.
pub fn build_lp_model(prob: &BoundProblem) -> Result<BlockSdp, ModelError> {
    assert_eq!(prob.kind, ProblemKind::Lp);
    validate_common(prob)?;
    if prob.n < 2 {
        return Err(ModelError::BadDimension(prob.n));
    }
    if prob.cap_n < 2 {
        return Err(ModelError::DegenerateCap(prob.cap_n, "N >= 2".into()));
    }
    let d = prob.d;
    let cap = prob.cap_n;
    let max_deg = d.max(cap);
    let dp = domain_polys(&prob.cos_theta);

    let blocks = vec![
        BlockSpec {
            label: "f".into(),
            dim: d as usize,
            kind: BlockKind::Diagonal,
        },
        BlockSpec {
            label: "q".into(),
            dim: uni_gram_basis(cap).len(),
            kind: BlockKind::Psd,
        },
        BlockSpec {
            label: "q1".into(),
            dim: uni_gram_basis(cap - 2).len(),
            kind: BlockKind::Psd,
        },
    ];
    let (blk_f, blk_q, blk_q1) = (0, 1, 2);

    let mut rb = RowBuilder::new(max_deg as usize + 1);
    rb.rhs[0] = -(Rat::one() + &prob.margin);

    for k in 1..=d {
        let pk = gegenbauer(prob.n, k);
        for (pow, c) in pk.coeffs().iter().enumerate() {
            rb.add(pow, blk_f, (k - 1) as usize, (k - 1) as usize, c.clone());
        }
    }
    let q_basis = uni_gram_basis(cap);
    for (a, &ea) in q_basis.iter().enumerate() {
        for (b, &eb) in q_basis.iter().enumerate().skip(a) {
            rb.add((ea + eb) as usize, blk_q, a, b, Rat::one());
        }
    }
    let q1_basis = uni_gram_basis(cap - 2);
    for (a, &ea) in q1_basis.iter().enumerate() {
        for (b, &eb) in q1_basis.iter().enumerate().skip(a) {
            for (pow, c) in dp.p.coeffs().iter().enumerate() {
                rb.add(pow + (ea + eb) as usize, blk_q1, a, b, c.clone());
            }
        }
    }

    let cost = (0..d as usize)
        .map(|i| MatEntry {
            block: blk_f,
            row: i,
            col: i,
            value: Rat::one(),
        })
        .collect();

    Ok(BlockSdp {
        blocks,
        cost,
        constraints: rb.finish(),
        objective_offset: Rat::one(),
        problem: Some(prob.clone()),
    })
}

/// Block labels of the SDP model, in declaration order.
pub fn sdp_block_labels(d: u32) -> Vec<String> {
    let mut labels = vec!["b".to_string(), "a".to_string()];
    for k in 0..=d {
        labels.push(format!("F{}", k));
    }
    labels.extend(["q", "q1", "r", "r1", "r2", "r3", "r4"].map(String::from));
    labels
}

/// The three-point SDP bound of the dual program, assembled by coefficient
/// matching of the two SOS identities.
pub fn build_sdp_model(prob: &BoundProblem) -> Result<BlockSdp, ModelError> {
    assert_eq!(prob.kind, ProblemKind::Sdp);
    validate_common(prob)?;
    if prob.n < 3 {
        return Err(ModelError::BadDimension(prob.n));
    }
    if prob.cap_n < prob.d {
        return Err(ModelError::CapBelowD(prob.cap_n, prob.d));
    }
    if prob.cap_n < 2 {
        return Err(ModelError::DegenerateCap(prob.cap_n, "N >= 2".into()));
    }
    let d = prob.d;
    let cap = 2 * prob.cap_n;
    let max_deg = (2 * d).max(cap);
    let dp = domain_polys(&prob.cos_theta);

    // Blocks.
    let mut blocks = vec![
        BlockSpec {
            label: "b".into(),
            dim: 2,
            kind: BlockKind::Psd,
        },
        BlockSpec {
            label: "a".into(),
            dim: d as usize,
            kind: BlockKind::Diagonal,
        },
    ];
    for k in 0..=d {
        blocks.push(BlockSpec {
            label: format!("F{}", k),
            dim: (d - k + 1) as usize,
            kind: BlockKind::Psd,
        });
    }
    let q_basis = uni_gram_basis(cap);
    let q1_basis = uni_gram_basis(cap - 2);
    let r_basis = tri_gram_basis(cap);
    let ri_basis = tri_gram_basis(cap - 2);
    let r4_basis = tri_gram_basis(2 * ((cap - 3) / 2));
    for (label, dim) in [
        ("q", q_basis.len()),
        ("q1", q1_basis.len()),
        ("r", r_basis.len()),
        ("r1", ri_basis.len()),
        ("r2", ri_basis.len()),
        ("r3", ri_basis.len()),
        ("r4", r4_basis.len()),
    ] {
        blocks.push(BlockSpec {
            label: label.into(),
            dim,
            kind: BlockKind::Psd,
        });
    }
    let blk = |label: &str| -> usize {
        sdp_block_labels(d)
            .iter()
            .position(|l| l == label)
            .unwrap()
    };
    let (blk_b, blk_a) = (blk("b"), blk("a"));

    // Row layout: identity-1 rows 0..=max_deg, then identity-2 rows, one
    // per monomial of degree <= max_deg (or per S3-orbit when reduced).
    let id1_rows = max_deg as usize + 1;
    let id2_monos: Vec<Mono> = if prob.symmetry_reduction {
        monomials_up_to(max_deg)
            .into_iter()
            .filter(|m| *m == m.orbit_rep())
            .collect()
    } else {
        monomials_up_to(max_deg)
    };
    let id2_index: BTreeMap<Mono, usize> = id2_monos
        .iter()
        .enumerate()
        .map(|(i, m)| (*m, id1_rows + i))
        .collect();
    let mut rb = RowBuilder::new(id1_rows + id2_monos.len());
    rb.rhs[0] = -(Rat::one() + &prob.margin);
    rb.rhs[id2_index[&Mono::ONE]] = -prob.margin.clone();

    // b block: 2 b12 + b22 in identity 1, b22 in identity 2.
    rb.add(0, blk_b, 0, 1, Rat::one());
    rb.add(0, blk_b, 1, 1, Rat::one());
    rb.add(id2_index[&Mono::ONE], blk_b, 1, 1, Rat::one());

    // a block: sum_k a_k P_k^n(u) in identity 1.
    for k in 1..=d {
        let pk = gegenbauer(prob.n, k);
        for (pow, c) in pk.coeffs().iter().enumerate() {
            rb.add(pow, blk_a, (k - 1) as usize, (k - 1) as usize, c.clone());
        }
    }

    // F blocks: 3 <F_k, S_k(u,u,1)> in identity 1, <F_k, S_k> in identity 2.
    let project = if prob.symmetry_reduction {
        |m: &Mono| m.orbit_rep()
    } else {
        |m: &Mono| *m
    };
    for k in 0..=d {
        let s = build_s(prob.n, k, d);
        let blk_fk = blk(&format!("F{}", k));
        for i in 0..s.body.dim() {
            for j in i..s.body.dim() {
                let entry = s.body.get(i, j);
                // Identity 2: plain coefficients.
                for (m, c) in entry.terms() {
                    rb.add(id2_index[&project(m)], blk_fk, i, j, c.clone());
                }
                // Identity 1: restriction to (u, u, 1).
                let restricted = entry.substitute(
                    &TriPoly::var(Var::U),
                    &TriPoly::var(Var::U),
                    &TriPoly::one(),
                );
                let coeffs = restricted
                    .to_univariate(Var::U)
                    .expect("restriction must be univariate");
                for (pow, c) in coeffs.iter().enumerate() {
                    rb.add(pow, blk_fk, i, j, c * rat_i(3));
                }
            }
        }
    }

    // Univariate Gram blocks q, q1.
    let blk_q = blk("q");
    for (a, &ea) in q_basis.iter().enumerate() {
        for (b, &eb) in q_basis.iter().enumerate().skip(a) {
            rb.add((ea + eb) as usize, blk_q, a, b, Rat::one());
        }
    }
    let blk_q1 = blk("q1");
    for (a, &ea) in q1_basis.iter().enumerate() {
        for (b, &eb) in q1_basis.iter().enumerate().skip(a) {
            for (pow, c) in dp.p.coeffs().iter().enumerate() {
                rb.add(pow + (ea + eb) as usize, blk_q1, a, b, c.clone());
            }
        }
    }

    // Trivariate Gram blocks r, r1..r4 with multipliers 1, p1..p4.
    let multipliers: [(usize, &Vec<Mono>, TriPoly); 5] = [
        (blk("r"), &r_basis, TriPoly::one()),
        (blk("r1"), &ri_basis, dp.p1.clone()),
        (blk("r2"), &ri_basis, dp.p2.clone()),
        (blk("r3"), &ri_basis, dp.p3.clone()),
        (blk("r4"), &r4_basis, dp.p4.clone()),
    ];
    for (block, basis, mult) in multipliers.iter() {
        for (a, ma) in basis.iter().enumerate() {
            for (b, mb) in basis.iter().enumerate().skip(a) {
                let prod = TriPoly::monomial(ma.mul(mb), Rat::one()).mul(mult);
                let prod = if prob.symmetry_reduction {
                    prod.symmetrize()
                } else {
                    prod
                };
                for (m, c) in prod.terms() {
                    let m = if prob.symmetry_reduction {
                        m.orbit_rep()
                    } else {
                        *m
                    };
                    rb.add(id2_index[&m], *block, a, b, c.clone());
                }
            }
        }
    }

    // Objective: 1 + sum a_k + b11 + <F0, S0(1,1,1)>; with the monomial
    // normalization S0(1,1,1) is the all-ones matrix, so the trace term is
    // the sum of all F0 entries.
    let mut cost = vec![MatEntry {
        block: blk_b,
        row: 0,
        col: 0,
        value: Rat::one(),
    }];
    for i in 0..d as usize {
        cost.push(MatEntry {
            block: blk_a,
            row: i,
            col: i,
            value: Rat::one(),
        });
    }
    let blk_f0 = blk("F0");
    for i in 0..=(d as usize) {
        for j in i..=(d as usize) {
            cost.push(MatEntry {
                block: blk_f0,
                row: i,
                col: j,
                value: Rat::one(),
            });
        }
    }

    Ok(BlockSdp {
        blocks,
        cost,
        constraints: rb.finish(),
        objective_offset: Rat::one(),
        problem: Some(prob.clone()),
    })
}

fn format_value(v: &Rat) -> String {
    format!("{}", rat_to_f64(v))
}

/// Writes the sparse SDPA format. Entries are sorted by constraint number,
/// then block, row, column; the objective offset travels in a leading
/// comment line and must be re-added by any importer.
pub fn export_sdpa(model: &BlockSdp, path: &str) -> Result<(), ModelError> {
    let mut out = std::fs::File::create(path)?;
    let mut buf = String::new();
    if !model.objective_offset.is_zero() {
        buf.push_str(&format!("\"offset: {}\"\n", model.objective_offset));
    }
    buf.push_str(&format!("{}\n", model.constraints.len()));
    buf.push_str(&format!("{}\n", model.blocks.len()));
    let sizes: Vec<String> = model
        .blocks
        .iter()
        .map(|b| match b.kind {
            BlockKind::Psd => format!("{}", b.dim),
            BlockKind::Diagonal => format!("-{}", b.dim),
        })
        .collect();
    buf.push_str(&format!("{}\n", sizes.join(" ")));
    let rhs: Vec<String> = model
        .constraints
        .iter()
        .map(|c| format_value(&c.rhs))
        .collect();
    buf.push_str(&format!("{}\n", rhs.join(" ")));

    let mut lines: Vec<(usize, usize, usize, usize, String)> = Vec::new();
    for e in model.cost.iter() {
        lines.push((0, e.block + 1, e.row + 1, e.col + 1, format_value(&e.value)));
    }
    for (j, c) in model.constraints.iter().enumerate() {
        for e in c.entries.iter() {
            lines.push((
                j + 1,
                e.block + 1,
                e.row + 1,
                e.col + 1,
                format_value(&e.value),
            ));
        }
    }
    lines.sort_by_key(|l| (l.0, l.1, l.2, l.3));
    for (m, b, i, j, v) in lines {
        buf.push_str(&format!("{} {} {} {} {}\n", m, b, i, j, v));
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

/// Reads a sparse SDPA file back into a `BlockSdp` (values as exact binary
/// rationals of the parsed floats).
pub fn import_sdpa(path: &str) -> Result<BlockSdp, ModelError> {
    let text = std::fs::read_to_string(path)?;
    let mut offset = Rat::zero();
    let mut header: Vec<(usize, String)> = Vec::new();
    let mut entry_lines: Vec<(usize, String)> = Vec::new();
    let mut stage = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('"') || line.starts_with('*') {
            let body = line.trim_matches(|c| c == '"' || c == '*').trim();
            if let Some(rest) = body.strip_prefix("offset:") {
                offset = crate::exact::parse_rat(rest.trim())
                    .map_err(|e| ModelError::Parse(lineno + 1, e.to_string()))?;
            }
            continue;
        }
        if stage < 4 {
            header.push((lineno + 1, line.to_string()));
            stage += 1;
        } else {
            entry_lines.push((lineno + 1, line.to_string()));
        }
    }
    if header.len() < 4 {
        return Err(ModelError::Parse(0, "truncated header".into()));
    }
    let parse_usize = |(ln, s): &(usize, String)| -> Result<usize, ModelError> {
        s.split_whitespace()
            .next()
            .and_then(|w| w.parse().ok())
            .ok_or_else(|| ModelError::Parse(*ln, format!("bad integer {:?}", s)))
    };
    let m: usize = parse_usize(&header[0])?;
    let nblocks: usize = parse_usize(&header[1])?;
    let mut blocks = Vec::new();
    for (i, w) in header[2].1.split_whitespace().enumerate() {
        let v: i64 = w
            .parse()
            .map_err(|_| ModelError::Parse(header[2].0, format!("bad block size {:?}", w)))?;
        blocks.push(BlockSpec {
            label: format!("block{}", i + 1),
            dim: v.unsigned_abs() as usize,
            kind: if v < 0 {
                BlockKind::Diagonal
            } else {
                BlockKind::Psd
            },
        });
    }
    if blocks.len() != nblocks {
        return Err(ModelError::Parse(
            header[2].0,
            format!("expected {} block sizes, got {}", nblocks, blocks.len()),
        ));
    }
    let mut constraints: Vec<Constraint> = Vec::new();
    for w in header[3].1.split_whitespace() {
        let v: f64 = w
            .parse()
            .map_err(|_| ModelError::Parse(header[3].0, format!("bad rhs {:?}", w)))?;
        constraints.push(Constraint {
            entries: vec![],
            rhs: Rat::from_float(v).unwrap_or_else(Rat::zero),
        });
    }
    if constraints.len() != m {
        return Err(ModelError::Parse(
            header[3].0,
            format!("expected {} rhs values, got {}", m, constraints.len()),
        ));
    }
    let mut cost = Vec::new();
    for (ln, line) in entry_lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 5 {
            return Err(ModelError::Parse(ln, format!("bad entry line {:?}", line)));
        }
        let matno: usize = parts[0]
            .parse()
            .map_err(|_| ModelError::Parse(ln, "bad matno".into()))?;
        let block: usize = parts[1]
            .parse::<usize>()
            .map_err(|_| ModelError::Parse(ln, "bad blockno".into()))?
            - 1;
        let row: usize = parts[2]
            .parse::<usize>()
            .map_err(|_| ModelError::Parse(ln, "bad row".into()))?
            - 1;
        let col: usize = parts[3]
            .parse::<usize>()
            .map_err(|_| ModelError::Parse(ln, "bad col".into()))?
            - 1;
        let value: f64 = parts[4]
            .parse()
            .map_err(|_| ModelError::Parse(ln, "bad value".into()))?;
        let entry = MatEntry {
            block,
            row: row.min(col),
            col: row.max(col),
            value: Rat::from_float(value).unwrap_or_else(Rat::zero),
        };
        if matno == 0 {
            cost.push(entry);
        } else if matno <= m {
            constraints[matno - 1].entries.push(entry);
        } else {
            return Err(ModelError::Parse(ln, format!("matno {} out of range", matno)));
        }
    }
    Ok(BlockSdp {
        blocks,
        cost,
        constraints,
        objective_offset: offset,
        problem: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn lp_prob(n: u32, d: u32, cap_n: u32) -> BoundProblem {
        BoundProblem {
            kind: ProblemKind::Lp,
            n,
            cos_theta: rat(1, 2),
            d,
            cap_n,
            margin: rat(1, 1_000_000),
            symmetry_reduction: false,
        }
    }

    fn sdp_prob(n: u32, d: u32, cap_n: u32) -> BoundProblem {
        BoundProblem {
            kind: ProblemKind::Sdp,
            n,
            cos_theta: rat(1, 2),
            d,
            cap_n,
            margin: rat(1, 1_000_000),
            symmetry_reduction: false,
        }
    }

    #[test]
    fn domain_polys_paper_instances() {
        // c = 1/2: p(u) = -(u + 1/4)^2 + 9/16 = 1/2 - u/2 - u^2
        let dp = domain_polys(&rat(1, 2));
        assert_eq!(
            dp.p,
            UniPoly::from_coeffs(vec![rat(1, 2), rat(-1, 2), rat_i(-1)])
        );
        assert_eq!(dp.p.eval_rat(&rat_i(-1)), rat_i(0));
        assert_eq!(dp.p.eval_rat(&rat(1, 2)), rat_i(0));
        // c = 1/3: p(u) = -(u + 1/3)^2 + 4/9
        let dp = domain_polys(&rat(1, 3));
        assert_eq!(
            dp.p,
            UniPoly::from_coeffs(vec![rat(1, 3), rat(-2, 3), rat_i(-1)])
        );
        // Gram determinant vanishes at the corner.
        assert_eq!(
            dp.p4.eval_rat(&rat_i(1), &rat_i(1), &rat_i(1)),
            rat_i(0)
        );
    }

    #[test]
    fn lp_model_shape() {
        let model = build_lp_model(&lp_prob(3, 11, 12)).unwrap();
        assert_eq!(model.blocks.len(), 3);
        assert_eq!(model.blocks[0].dim, 11);
        assert_eq!(model.blocks[1].dim, 7); // q: degrees 0..6
        assert_eq!(model.blocks[2].dim, 6); // q1: degrees 0..5
        assert_eq!(model.constraint_count(), 13);
        assert_eq!(model.objective_offset, rat_i(1));
        // Constant row carries -(1 + margin).
        assert_eq!(model.constraints[0].rhs, -(rat_i(1) + rat(1, 1_000_000)));
    }

    #[test]
    fn lp_rejects_degenerate_cap() {
        assert!(build_lp_model(&lp_prob(3, 3, 1)).is_err());
    }

    #[test]
    fn sdp_dimension_audit() {
        // Identity-2 equality count is the number of trivariate monomials
        // of degree <= max(2d, N).
        let model = build_sdp_model(&sdp_prob(3, 3, 3)).unwrap();
        let max_deg = 6;
        let id2 = (max_deg + 3) * (max_deg + 2) * (max_deg + 1) / 6;
        assert_eq!(model.constraint_count(), (max_deg + 1) + id2);
        // Block sizes: b, a, F0..F3, q, q1, r, r1..r4.
        let dims: Vec<usize> = model.blocks.iter().map(|b| b.dim).collect();
        assert_eq!(dims[0], 2);
        assert_eq!(dims[1], 3);
        assert_eq!(&dims[2..6], &[4, 3, 2, 1]);
    }

    #[test]
    fn sdp_rejects_bad_params() {
        assert!(build_sdp_model(&sdp_prob(2, 3, 3)).is_err());
        assert!(build_sdp_model(&sdp_prob(3, 5, 4)).is_err());
        let mut p = sdp_prob(3, 3, 3);
        p.cos_theta = rat_i(1);
        assert!(build_sdp_model(&p).is_err());
    }

    #[test]
    fn symmetry_reduction_row_count() {
        let full = build_sdp_model(&sdp_prob(3, 3, 3)).unwrap();
        let mut p = sdp_prob(3, 3, 3);
        p.symmetry_reduction = true;
        let reduced = build_sdp_model(&p).unwrap();
        assert!(reduced.constraint_count() < full.constraint_count());
    }

    #[test]
    fn export_round_trip() {
        let model = build_lp_model(&lp_prob(3, 5, 6)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lp.sdpa");
        export_sdpa(&model, path.to_str().unwrap()).unwrap();
        let back = import_sdpa(path.to_str().unwrap()).unwrap();
        assert_eq!(back.constraint_count(), model.constraint_count());
        assert_eq!(back.blocks.len(), model.blocks.len());
        for (a, b) in back.blocks.iter().zip(model.blocks.iter()) {
            assert_eq!(a.dim, b.dim);
            assert_eq!(a.kind, b.kind);
        }
        assert_eq!(back.objective_offset, model.objective_offset);
        for (ca, cb) in back.constraints.iter().zip(model.constraints.iter()) {
            assert_eq!(ca.entries.len(), cb.entries.len());
        }
    }

    #[test]
    fn tiny_sdpa_file_shape() {
        // min x s.t. x = 1 over a single 1x1 block: 4 header lines + 2
        // entry lines (offset 0 writes no comment).
        let model = BlockSdp {
            blocks: vec![BlockSpec {
                label: "x".into(),
                dim: 1,
                kind: BlockKind::Psd,
            }],
            cost: vec![MatEntry {
                block: 0,
                row: 0,
                col: 0,
                value: rat_i(1),
            }],
            constraints: vec![Constraint {
                entries: vec![MatEntry {
                    block: 0,
                    row: 0,
                    col: 0,
                    value: rat_i(1),
                }],
                rhs: rat_i(1),
            }],
            objective_offset: rat_i(0),
            problem: None,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tiny.sdpa");
        export_sdpa(&model, path.to_str().unwrap()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert_eq!(text.lines().next().unwrap(), "1");
    }
}
