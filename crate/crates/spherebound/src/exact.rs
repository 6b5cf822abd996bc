//! Exact rational arithmetic and exact symmetric linear algebra.
//!
//! `Rat` is an arbitrary-precision fraction, always in lowest terms with a
//! positive denominator, and serializes as `"num/den"` (`den` omitted when
//! it is 1). Every symbolic and verification path in the crate runs on it.

use num_bigint::{BigInt, ToBigInt};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

pub type Rat = BigRational;

/// Shorthand for `n/d`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Shorthand for an integer rational.
pub fn rat_i(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_u(n: u64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses the `"num/den"` wire format (`"-3/7"`, `"12"`).
pub fn parse_rat(s: &str) -> Result<Rat, ExactError> {
    Rat::from_str(s.trim()).map_err(|_| ExactError::BadRational(s.to_string()))
}

/// Serde adapter storing a `Rat` as its `"num/den"` string form, for use
/// with `#[serde(with = "crate::exact::rat_serde")]`.
pub mod rat_serde {
    use super::{parse_rat, Rat};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rat(&raw).map_err(serde::de::Error::custom)
    }

    /// Same adapter for `Vec<Rat>` fields.
    pub mod vec {
        use super::super::{parse_rat, Rat};
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|r| r.to_string()))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rat>, D::Error> {
            let raw = Vec::<String>::deserialize(d)?;
            raw.iter()
                .map(|s| parse_rat(s).map_err(serde::de::Error::custom))
                .collect()
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExactError {
    #[error("cannot parse rational from {0:?}")]
    BadRational(String),
    #[error("non-finite input {0} cannot be rounded to a rational")]
    NonFinite(f64),
    #[error("bad matrix: {0}")]
    BadMatrix(String),
}

impl serde::Serialize for RatMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j).to_string()).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> serde::Deserialize<'de> for RatMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Vec::<Vec<String>>::deserialize(d)?;
        let rows = raw
            .iter()
            .map(|r| r.iter().map(|s| parse_rat(s)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        RatMatrix::try_from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// Best rational approximation to `x` with denominator at most
/// `denominator_bound`, via the continued-fraction expansion of the exact
/// binary value of `x` (convergents plus the final semiconvergent).
pub fn round_to_rational(x: f64, denominator_bound: u64) -> Result<Rat, ExactError> {
    assert!(denominator_bound >= 1);
    if !x.is_finite() {
        return Err(ExactError::NonFinite(x));
    }
    let target = Rat::from_float(x).ok_or(ExactError::NonFinite(x))?;
    let bound = BigInt::from(denominator_bound);
    if target.denom() <= &bound {
        return Ok(target);
    }

    // Continued-fraction state: previous and current convergents p/q.
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    let (mut p_cur, mut q_cur) = (target.numer().div_floor(target.denom()), BigInt::one());
    let mut frac = &target - Rat::from_integer(p_cur.clone());
    loop {
        if frac.is_zero() {
            return Ok(Rat::new(p_cur, q_cur));
        }
        let inv = frac.recip();
        let a = inv.numer().div_floor(inv.denom());
        frac = inv - Rat::from_integer(a.clone());
        let p_next = &a * &p_cur + &p_prev;
        let q_next = &a * &q_cur + &q_prev;
        if q_next > bound {
            // Largest semiconvergent with denominator within the bound.
            let a_max = (&bound - &q_prev).div_floor(&q_cur);
            let half_a = Rat::new(a.clone(), 2.to_bigint().unwrap());
            if a_max > BigInt::zero() && Rat::from_integer(a_max.clone()) >= half_a {
                let p_semi = &a_max * &p_cur + &p_prev;
                let q_semi = &a_max * &q_cur + &q_prev;
                let cand = Rat::new(p_semi, q_semi);
                let best = Rat::new(p_cur.clone(), q_cur.clone());
                if (&cand - &target).abs() <= (&best - &target).abs() {
                    return Ok(cand);
                }
            }
            return Ok(Rat::new(p_cur, q_cur));
        }
        p_prev = p_cur;
        q_prev = q_cur;
        p_cur = p_next;
        q_cur = q_next;
    }
}

/// Dense symmetric matrix of rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    dim: usize,
    entries: Vec<Rat>,
}

impl RatMatrix {
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1);
        RatMatrix {
            dim,
            entries: vec![Rat::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zero(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Rat::one();
        }
        m
    }

    /// Like `from_rows` but reports shape and symmetry violations instead
    /// of panicking, for deserialization of untrusted input.
    pub fn try_from_rows(rows: Vec<Vec<Rat>>) -> Result<Self, ExactError> {
        let dim = rows.len();
        if dim == 0 {
            return Err(ExactError::BadMatrix("empty matrix".into()));
        }
        let mut m = Self::zero(dim);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(ExactError::BadMatrix(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    r.len(),
                    dim
                )));
            }
            for (j, v) in r.iter().enumerate() {
                m.entries[i * dim + j] = v.clone();
            }
        }
        for i in 0..dim {
            for j in 0..i {
                if m.get(i, j) != m.get(j, i) {
                    return Err(ExactError::BadMatrix(format!(
                        "asymmetric at ({}, {})",
                        i, j
                    )));
                }
            }
        }
        Ok(m)
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let dim = rows.len();
        let mut m = Self::zero(dim);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), dim);
            for (j, v) in r.iter().enumerate() {
                m.entries[i * dim + j] = v.clone();
            }
        }
        for i in 0..dim {
            for j in 0..i {
                assert_eq!(m.get(i, j), m.get(j, i), "matrix must be symmetric");
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.entries[i * self.dim + j]
    }

    /// Sets both `(i,j)` and `(j,i)`.
    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.entries[i * self.dim + j] = v.clone();
        self.entries[j * self.dim + i] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: &Rat) {
        let cur = self.get(i, j).clone();
        self.set(i, j, cur + v);
    }

    /// Sum of all entries.
    pub fn entry_sum(&self) -> Rat {
        self.entries.iter().fold(Rat::zero(), |a, b| a + b)
    }

    pub fn trace(&self) -> Rat {
        (0..self.dim).fold(Rat::zero(), |a, i| a + self.get(i, i))
    }

    /// x^T M x, exactly.
    pub fn quad_form(&self, x: &[Rat]) -> Rat {
        assert_eq!(x.len(), self.dim);
        let mut acc = Rat::zero();
        for i in 0..self.dim {
            if x[i].is_zero() {
                continue;
            }
            let mut row = Rat::zero();
            for j in 0..self.dim {
                if !x[j].is_zero() {
                    row += self.get(i, j) * &x[j];
                }
            }
            acc += &x[i] * row;
        }
        acc
    }
}

/// Outcome of the exact PSD test.
#[derive(Debug, Clone)]
pub enum PsdOutcome {
    /// Positive semidefinite; the pivots of the LDL^T factorization.
    Psd { pivots: Vec<Rat> },
    /// Not PSD; `witness^T M witness = value < 0` exactly.
    NotPsd { witness: Vec<Rat>, value: Rat },
}

impl PsdOutcome {
    pub fn is_psd(&self) -> bool {
        matches!(self, PsdOutcome::Psd { .. })
    }
}

/// Exact PSD decision by LDL^T with symmetric pivoting on the largest
/// remaining diagonal entry. A zero pivot is accepted only when its entire
/// remaining row/column vanishes; otherwise a certified negative witness is
/// produced.
pub fn psd_check(m: &RatMatrix) -> PsdOutcome {
    let n = m.dim;
    // Working copy of the matrix, permutation, and eliminated L columns in
    // the permuted frame.
    let mut a: Vec<Vec<Rat>> = (0..n)
        .map(|i| (0..n).map(|j| m.get(i, j).clone()).collect())
        .collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l: Vec<Vec<Rat>> = vec![vec![Rat::zero(); n]; n]; // l[col][row]
    let mut pivots: Vec<Rat> = Vec::with_capacity(n);

    // Lifts a witness on the Schur complement at stage `step` back to a
    // witness for the original matrix: choose eliminated coordinates so the
    // L^T image vanishes there.
    let lift = |l: &Vec<Vec<Rat>>, perm: &Vec<usize>, step: usize, tail: Vec<Rat>| -> Vec<Rat> {
        let mut w = vec![Rat::zero(); n];
        w[step..n].clone_from_slice(&tail[..(n - step)]);
        for i in (0..step).rev() {
            let mut s = Rat::zero();
            for r in (i + 1)..n {
                if !w[r].is_zero() {
                    s += &l[i][r] * &w[r];
                }
            }
            w[i] = -s;
        }
        let mut x = vec![Rat::zero(); n];
        for (pos, &orig) in perm.iter().enumerate() {
            x[orig] = w[pos].clone();
        }
        x
    };

    for step in 0..n {
        // Largest remaining diagonal entry.
        let mut best = step;
        for i in (step + 1)..n {
            if a[i][i] > a[best][best] {
                best = i;
            }
        }
        if best != step {
            a.swap(step, best);
            for row in a.iter_mut() {
                row.swap(step, best);
            }
            perm.swap(step, best);
            for col in l.iter_mut().take(step) {
                col.swap(step, best);
            }
        }
        let d = a[step][step].clone();
        if d.is_negative() {
            let mut tail = vec![Rat::zero(); n - step];
            tail[0] = Rat::one();
            let x = lift(&l, &perm, step, tail);
            let value = m.quad_form(&x);
            debug_assert!(value.is_negative());
            return PsdOutcome::NotPsd { witness: x, value };
        }
        if d.is_zero() {
            // All remaining diagonals are <= 0 here (pivot is the maximum);
            // negatives were caught above, so they are all zero. Any nonzero
            // off-diagonal certifies indefiniteness via a 2x2 minor.
            for i in step..n {
                for j in (i + 1)..n {
                    if !a[i][j].is_zero() {
                        let mut tail = vec![Rat::zero(); n - step];
                        tail[i - step] = Rat::one();
                        tail[j - step] = if a[i][j].is_positive() {
                            -Rat::one()
                        } else {
                            Rat::one()
                        };
                        let x = lift(&l, &perm, step, tail);
                        let value = m.quad_form(&x);
                        debug_assert!(value.is_negative());
                        return PsdOutcome::NotPsd { witness: x, value };
                    }
                }
            }
            pivots.push(Rat::zero());
            continue;
        }
        // Eliminate.
        for i in (step + 1)..n {
            l[step][i] = &a[step][i] / &d;
        }
        for i in (step + 1)..n {
            if a[step][i].is_zero() {
                continue;
            }
            for j in i..n {
                let upd = &l[step][i] * &a[step][j];
                a[i][j] -= &upd;
                if j != i {
                    let v = a[i][j].clone();
                    a[j][i] = v;
                }
            }
        }
        pivots.push(d);
    }
    PsdOutcome::Psd { pivots }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_string_format() {
        assert_eq!(rat(-3, 7).to_string(), "-3/7");
        assert_eq!(rat_i(12).to_string(), "12");
        assert_eq!(parse_rat("-3/7").unwrap(), rat(-3, 7));
        assert_eq!(parse_rat("12").unwrap(), rat_i(12));
        assert!(parse_rat("1/x").is_err());
    }

    #[test]
    fn round_half() {
        assert_eq!(round_to_rational(0.5, 1000).unwrap(), rat(1, 2));
    }

    #[test]
    fn round_third() {
        // Continued-fraction expansion of 0.333333333 truncates at 1/3.
        assert_eq!(round_to_rational(0.333333333, 100).unwrap(), rat(1, 3));
    }

    #[test]
    fn round_pi_classical_convergent() {
        assert_eq!(round_to_rational(3.14159265, 120).unwrap(), rat(355, 113));
    }

    #[test]
    fn round_error_bound() {
        for (x, b) in [(0.7234231, 57u64), (-1.9471123, 9), (141.00123, 1000)] {
            let r = round_to_rational(x, b).unwrap();
            assert!(r.denom() <= &BigInt::from(b));
            let err = (r - Rat::from_float(x).unwrap()).abs();
            assert!(err <= Rat::new(BigInt::one(), BigInt::from(b)));
        }
    }

    #[test]
    fn round_rejects_non_finite() {
        assert!(round_to_rational(f64::NAN, 10).is_err());
        assert!(round_to_rational(f64::INFINITY, 10).is_err());
    }

    #[test]
    fn psd_identity() {
        for dim in 1..6 {
            assert!(psd_check(&RatMatrix::identity(dim)).is_psd());
        }
    }

    #[test]
    fn psd_2x2_with_pivots() {
        let m = RatMatrix::from_rows(vec![
            vec![rat_i(2), rat_i(1)],
            vec![rat_i(1), rat_i(2)],
        ]);
        match psd_check(&m) {
            PsdOutcome::Psd { pivots } => assert_eq!(pivots, vec![rat_i(2), rat(3, 2)]),
            _ => panic!("expected PSD"),
        }
    }

    #[test]
    fn not_psd_with_witness() {
        let m = RatMatrix::from_rows(vec![
            vec![rat_i(1), rat_i(2)],
            vec![rat_i(2), rat_i(1)],
        ]);
        match psd_check(&m) {
            PsdOutcome::NotPsd { witness, value } => {
                assert!(value.is_negative());
                assert_eq!(m.quad_form(&witness), value);
            }
            _ => panic!("expected not PSD"),
        }
    }

    #[test]
    fn zero_pivot_with_nonzero_offdiagonal_is_rejected() {
        let m = RatMatrix::from_rows(vec![
            vec![rat_i(0), rat_i(1)],
            vec![rat_i(1), rat_i(0)],
        ]);
        match psd_check(&m) {
            PsdOutcome::NotPsd { witness, value } => {
                assert_eq!(m.quad_form(&witness), value);
                assert!(value.is_negative());
            }
            _ => panic!("expected not PSD"),
        }
    }

    #[test]
    fn psd_singular_ok() {
        // Rank-1 PSD with a zero pivot whose residual row is zero.
        let m = RatMatrix::from_rows(vec![
            vec![rat_i(1), rat_i(1)],
            vec![rat_i(1), rat_i(1)],
        ]);
        assert!(psd_check(&m).is_psd());
        assert!(psd_check(&RatMatrix::zero(3)).is_psd());
    }
}
