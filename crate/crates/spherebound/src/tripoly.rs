//! Exact trivariate polynomial arithmetic in the inner-product variables
//! `u`, `v`, `t`.
//!
//! Sparse exponent-map representation. Iteration order is graded lex with
//! `u > v > t`, the single monomial-ordering convention used everywhere
//! downstream (constraint rows, Gram bases, serialization).

use crate::exact::Rat;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Which of the three variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    U,
    V,
    T,
}

/// Exponent triple `(u^a, v^b, t^c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mono {
    pub u: u32,
    pub v: u32,
    pub t: u32,
}

impl Mono {
    pub const ONE: Mono = Mono { u: 0, v: 0, t: 0 };

    pub fn new(u: u32, v: u32, t: u32) -> Self {
        Mono { u, v, t }
    }

    pub fn degree(&self) -> u32 {
        self.u + self.v + self.t
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono::new(self.u + other.u, self.v + other.v, self.t + other.t)
    }

    fn permuted(&self, perm: &[usize; 3]) -> Mono {
        let e = [self.u, self.v, self.t];
        Mono::new(e[perm[0]], e[perm[1]], e[perm[2]])
    }

    /// Representative of the orbit under all variable permutations:
    /// exponents sorted descending.
    pub fn orbit_rep(&self) -> Mono {
        let mut e = [self.u, self.v, self.t];
        e.sort_unstable_by(|a, b| b.cmp(a));
        Mono::new(e[0], e[1], e[2])
    }
}

// Graded lex with u > v > t; ascending iteration runs from low degree up.
impl Ord for Mono {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.degree(), self.u, self.v).cmp(&(other.degree(), other.u, other.v))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// All monomials of total degree <= `max_deg`, in graded-lex order.
pub fn monomials_up_to(max_deg: u32) -> Vec<Mono> {
    let mut out = Vec::new();
    for d in 0..=max_deg {
        for u in (0..=d).rev() {
            for v in (0..=(d - u)).rev() {
                out.push(Mono::new(u, v, d - u - v));
            }
        }
    }
    out.sort();
    out
}

/// Exact polynomial in `u`, `v`, `t`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriPoly {
    terms: BTreeMap<Mono, Rat>,
}

impl TriPoly {
    pub fn zero() -> Self {
        TriPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = Self::zero();
        p.add_term(Mono::ONE, c);
        p
    }

    pub fn var(v: Var) -> Self {
        let m = match v {
            Var::U => Mono::new(1, 0, 0),
            Var::V => Mono::new(0, 1, 0),
            Var::T => Mono::new(0, 0, 1),
        };
        let mut p = Self::zero();
        p.add_term(m, Rat::one());
        p
    }

    pub fn monomial(m: Mono, c: Rat) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn coeff(&self, m: &Mono) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, m: Mono, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().clone() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &TriPoly) -> TriPoly {
        let mut out = self.clone();
        for (m, c) in other.terms.iter() {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &TriPoly) -> TriPoly {
        let mut out = self.clone();
        for (m, c) in other.terms.iter() {
            out.add_term(*m, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> TriPoly {
        TriPoly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> TriPoly {
        if c.is_zero() {
            return TriPoly::zero();
        }
        TriPoly {
            terms: self.terms.iter().map(|(m, k)| (*m, k * c)).collect(),
        }
    }

    pub fn mul(&self, other: &TriPoly) -> TriPoly {
        let mut out = TriPoly::zero();
        for (m1, c1) in self.terms.iter() {
            for (m2, c2) in other.terms.iter() {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> TriPoly {
        let mut out = TriPoly::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Replaces `u`, `v`, `t` by the given polynomials.
    pub fn substitute(&self, su: &TriPoly, sv: &TriPoly, st: &TriPoly) -> TriPoly {
        let mut pow_u: Vec<TriPoly> = vec![TriPoly::one()];
        let mut pow_v: Vec<TriPoly> = vec![TriPoly::one()];
        let mut pow_t: Vec<TriPoly> = vec![TriPoly::one()];
        let grow = |cache: &mut Vec<TriPoly>, base: &TriPoly, e: u32| {
            while cache.len() <= e as usize {
                let next = cache.last().unwrap().mul(base);
                cache.push(next);
            }
        };
        let mut out = TriPoly::zero();
        for (m, c) in self.terms.iter() {
            grow(&mut pow_u, su, m.u);
            grow(&mut pow_v, sv, m.v);
            grow(&mut pow_t, st, m.t);
            let term = pow_u[m.u as usize]
                .mul(&pow_v[m.v as usize])
                .mul(&pow_t[m.t as usize])
                .scale(c);
            out = out.add(&term);
        }
        out
    }

    /// Image under a variable permutation given as where each of u,v,t maps from.
    fn permute_vars(&self, perm: &[usize; 3]) -> TriPoly {
        TriPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.permuted(perm), c.clone()))
                .collect(),
        }
    }

    /// Average over the six permutations of `u`, `v`, `t`.
    pub fn symmetrize(&self) -> TriPoly {
        let perms: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let mut out = TriPoly::zero();
        for p in perms.iter() {
            out = out.add(&self.permute_vars(p));
        }
        out.scale(&crate::exact::rat(1, 6))
    }

    pub fn eval_rat(&self, u: &Rat, v: &Rat, t: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for (m, c) in self.terms.iter() {
            let mut term = c.clone();
            for _ in 0..m.u {
                term *= u;
            }
            for _ in 0..m.v {
                term *= v;
            }
            for _ in 0..m.t {
                term *= t;
            }
            acc += term;
        }
        acc
    }

    pub fn eval_f64(&self, u: f64, v: f64, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                crate::exact::rat_to_f64(c)
                    * u.powi(m.u as i32)
                    * v.powi(m.v as i32)
                    * t.powi(m.t as i32)
            })
            .sum()
    }

    /// Sum of absolute coefficient values: a rigorous bound for |P| on the
    /// cube max(|u|,|v|,|t|) <= 1.
    pub fn coeff_l1_norm(&self) -> Rat {
        self.terms
            .values()
            .fold(Rat::zero(), |acc, c| acc + c.abs())
    }

    /// Treats the polynomial as univariate in `var`, failing if any other
    /// variable occurs. Returns ascending coefficients.
    pub fn to_univariate(&self, var: Var) -> Option<Vec<Rat>> {
        let mut coeffs: Vec<Rat> = Vec::new();
        for (m, c) in self.terms.iter() {
            let (e, rest) = match var {
                Var::U => (m.u, m.v + m.t),
                Var::V => (m.v, m.u + m.t),
                Var::T => (m.t, m.u + m.v),
            };
            if rest != 0 {
                return None;
            }
            if coeffs.len() <= e as usize {
                coeffs.resize(e as usize + 1, Rat::zero());
            }
            coeffs[e as usize] = c.clone();
        }
        Some(coeffs)
    }
}

impl fmt::Display for TriPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", c)?;
            for (name, e) in [("u", m.u), ("v", m.v), ("t", m.t)] {
                if e > 0 {
                    write!(f, "*{}^{}", name, e)?;
                }
            }
        }
        Ok(())
    }
}

/// Symmetric matrix with `TriPoly` entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    dim: usize,
    entries: Vec<TriPoly>,
}

impl PolyMatrix {
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1);
        PolyMatrix {
            dim,
            entries: vec![TriPoly::zero(); dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &TriPoly {
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: TriPoly) {
        self.entries[i * self.dim + j] = p;
    }

    pub fn is_symmetric(&self) -> bool {
        for i in 0..self.dim {
            for j in 0..i {
                if self.get(i, j) != self.get(j, i) {
                    return false;
                }
            }
        }
        true
    }

    /// Entrywise symmetrization over the variable permutations.
    pub fn symmetrize(&self) -> PolyMatrix {
        let mut out = PolyMatrix::zero(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(i, j, self.get(i, j).symmetrize());
            }
        }
        out
    }

    /// Entrywise f64 evaluation.
    pub fn eval_f64(&self, u: f64, v: f64, t: f64) -> Vec<f64> {
        self.entries.iter().map(|p| p.eval_f64(u, v, t)).collect()
    }
}
