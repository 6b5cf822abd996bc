//! Exact univariate orthogonal-polynomial machinery: the normalized
//! Gegenbauer family `P_k^n` with `P_k^n(1) = 1`, harmonic-space dimensions
//! `h_k^n`, the rational normalization ratio behind the zonal matrices, and
//! the trivariate polynomial `Q_k^{n-1}`.

use crate::exact::{rat_i, rat_u, Rat};
use crate::tripoly::{TriPoly, Var};
use num_traits::{One, Zero};

/// Univariate polynomial with exact rational coefficients, ascending by
/// degree, trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniPoly {
    coeffs: Vec<Rat>,
}

impl UniPoly {
    pub fn zero() -> Self {
        UniPoly { coeffs: vec![] }
    }

    pub fn constant(c: Rat) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    pub fn x() -> Self {
        Self::from_coeffs(vec![Rat::zero(), Rat::one()])
    }

    pub fn from_coeffs(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rat {
        self.coeffs.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![Rat::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        Self::from_coeffs(out)
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        self.add(&other.scale(&-Rat::one()))
    }

    pub fn scale(&self, c: &Rat) -> UniPoly {
        Self::from_coeffs(self.coeffs.iter().map(|k| k * c).collect())
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::from_coeffs(out)
    }

    /// Multiply by x.
    pub fn shift_up(&self) -> UniPoly {
        if self.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rat::zero()];
        out.extend(self.coeffs.iter().cloned());
        Self::from_coeffs(out)
    }

    pub fn eval_rat(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + crate::exact::rat_to_f64(c);
        }
        acc
    }

    pub fn coeff_l1_norm(&self) -> Rat {
        use num_traits::Signed;
        self.coeffs.iter().fold(Rat::zero(), |a, c| a + c.abs())
    }

    /// View as a `TriPoly` in the given variable.
    pub fn to_tripoly(&self, var: Var) -> TriPoly {
        let mut out = TriPoly::zero();
        let x = TriPoly::var(var);
        for (i, c) in self.coeffs.iter().enumerate() {
            out = out.add(&x.pow(i as u32).scale(c));
        }
        out
    }
}

/// Raw Gegenbauer polynomial `C_k^lambda` from the three-term recurrence,
/// with lambda carried exactly as a rational (covers odd `n`).
pub fn gegenbauer_raw(lambda: &Rat, k: u32) -> UniPoly {
    let mut prev = UniPoly::one();
    if k == 0 {
        return prev;
    }
    let mut cur = UniPoly::x().scale(&(rat_i(2) * lambda));
    for j in 2..=k {
        let j_rat = rat_u(j as u64);
        let a = (rat_i(2) * (&j_rat + lambda - rat_i(1))) / &j_rat;
        let b = (&j_rat + rat_i(2) * lambda - rat_i(2)) / &j_rat;
        let next = cur.shift_up().scale(&a).sub(&prev.scale(&b));
        prev = cur;
        cur = next;
    }
    cur
}

/// Chebyshev polynomial of the first kind, `T_k = 2 t T_{k-1} - T_{k-2}`.
pub fn chebyshev(k: u32) -> UniPoly {
    let mut prev = UniPoly::one();
    if k == 0 {
        return prev;
    }
    let mut cur = UniPoly::x();
    for _ in 2..=k {
        let next = cur.shift_up().scale(&rat_i(2)).sub(&prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// `P_k^n`, normalized so that `P_k^n(1) = 1`. For `n = 2` this is the
/// Chebyshev polynomial `T_k`; for `n >= 3` the Gegenbauer polynomial with
/// `lambda = n/2 - 1` divided by its value at 1.
pub fn gegenbauer(n: u32, k: u32) -> UniPoly {
    assert!(n >= 2);
    if n == 2 {
        return chebyshev(k);
    }
    let lambda = Rat::new((n as i64 - 2).into(), 2.into());
    let raw = gegenbauer_raw(&lambda, k);
    let at_one = raw.eval_rat(&Rat::one());
    raw.scale(&at_one.recip())
}

fn binomial(a: i64, b: i64) -> u64 {
    if b < 0 || a < b {
        return 0;
    }
    let b = b.min(a - b);
    let mut num = 1u128;
    let mut den = 1u128;
    for i in 0..b {
        num *= (a - i) as u128;
        den *= (i + 1) as u128;
    }
    (num / den) as u64
}

/// Dimension of the space of degree-`k` harmonic homogeneous polynomials in
/// `n` variables: `C(n+k-1, n-1) - C(n+k-3, n-1)`.
pub fn harm_dim(n: u32, k: u32) -> u64 {
    assert!(n >= 2);
    let (n, k) = (n as i64, k as i64);
    binomial(n + k - 1, n - 1) - binomial(n + k - 3, n - 1)
}

/// The rational scalar `(omega_n / omega_{n-1}) (omega_{n+2k-1} /
/// omega_{n+2k}) = prod_{j=0}^{k-1} (n+2j)/(n-1+2j)`; the only part of the
/// zonal-matrix normalization that is ever materialized.
pub fn lambda_rat(n: u32, k: u32) -> Rat {
    assert!(n >= 3);
    let mut acc = Rat::one();
    for j in 0..k {
        acc *= Rat::new((n as i64 + 2 * j as i64).into(), (n as i64 - 1 + 2 * j as i64).into());
    }
    acc
}

/// `Q_k^{n-1}(u,v,t)`: the substitution `s = (t-uv)/sqrt((1-u^2)(1-v^2))`
/// into `P_k^{n-1}(s)`, cleared of square roots by the parity of the
/// Gegenbauer coefficients. Total degree <= 2k.
pub fn q_poly(n: u32, k: u32) -> TriPoly {
    assert!(n >= 3);
    let p = gegenbauer(n - 1, k);
    let t_minus_uv = TriPoly::var(Var::T).sub(&TriPoly::var(Var::U).mul(&TriPoly::var(Var::V)));
    // (1-u^2)(1-v^2)
    let w = TriPoly::one()
        .sub(&TriPoly::var(Var::U).pow(2))
        .mul(&TriPoly::one().sub(&TriPoly::var(Var::V).pow(2)));
    let mut out = TriPoly::zero();
    for (j, c) in p.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        assert!(
            (j as u32) % 2 == k % 2,
            "Gegenbauer parity violated: nonzero coefficient at degree {} in P_{}^{}",
            j,
            k,
            n - 1
        );
        let half = (k - j as u32) / 2;
        out = out.add(&t_minus_uv.pow(j as u32).mul(&w.pow(half)).scale(c));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn degree_one_is_t() {
        for n in 2..10 {
            assert_eq!(gegenbauer(n, 1), UniPoly::x());
        }
    }

    #[test]
    fn degree_two_cases() {
        // (4t^2 - 1)/3
        assert_eq!(
            gegenbauer(4, 2),
            UniPoly::from_coeffs(vec![rat(-1, 3), rat_i(0), rat(4, 3)])
        );
        // Chebyshev 2t^2 - 1
        assert_eq!(
            gegenbauer(2, 2),
            UniPoly::from_coeffs(vec![rat_i(-1), rat_i(0), rat_i(2)])
        );
        // Legendre (3t^2 - 1)/2
        assert_eq!(
            gegenbauer(3, 2),
            UniPoly::from_coeffs(vec![rat(-1, 2), rat_i(0), rat(3, 2)])
        );
    }

    #[test]
    fn normalized_at_one() {
        for n in 2..=12 {
            for k in 0..=20 {
                assert_eq!(gegenbauer(n, k).eval_rat(&Rat::one()), Rat::one());
            }
        }
    }

    #[test]
    fn recurrence_residual_is_zero() {
        // Substituting P_k^n back into the defining recurrence gives the
        // zero polynomial, exactly.
        for n in 3..=12u32 {
            let lambda = Rat::new((n as i64 - 2).into(), 2.into());
            for k in 2..=20u32 {
                let ck = gegenbauer_raw(&lambda, k);
                let ck1 = gegenbauer_raw(&lambda, k - 1);
                let ck2 = gegenbauer_raw(&lambda, k - 2);
                let k_rat = rat_u(k as u64);
                let lhs = ck.scale(&k_rat);
                let rhs = ck1
                    .shift_up()
                    .scale(&(rat_i(2) * (&k_rat + &lambda - rat_i(1))))
                    .sub(&ck2.scale(&(&k_rat + rat_i(2) * &lambda - rat_i(2))));
                assert!(lhs.sub(&rhs).is_zero());
            }
        }
        for k in 2..=20u32 {
            let lhs = chebyshev(k);
            let rhs = chebyshev(k - 1).shift_up().scale(&rat_i(2)).sub(&chebyshev(k - 2));
            assert!(lhs.sub(&rhs).is_zero());
        }
    }

    #[test]
    fn orthogonality_odd_n_exact() {
        // For odd n the weight (1-t^2)^((n-3)/2) is a polynomial, so the
        // inner product integrates exactly by monomial integration.
        let monomial_integral = |e: usize| -> Rat {
            // integral of t^e over [-1,1]
            if e % 2 == 1 {
                Rat::zero()
            } else {
                rat(2, (e as i64) + 1)
            }
        };
        for n in [3u32, 5, 7] {
            let m = ((n - 3) / 2) as usize;
            // (1-t^2)^m
            let mut weight = UniPoly::one();
            let one_minus_t2 =
                UniPoly::from_coeffs(vec![rat_i(1), rat_i(0), rat_i(-1)]);
            for _ in 0..m {
                weight = weight.mul(&one_minus_t2);
            }
            for i in 0..=6u32 {
                for j in 0..=6u32 {
                    let prod = gegenbauer(n, i).mul(&gegenbauer(n, j)).mul(&weight);
                    let integral: Rat = prod
                        .coeffs()
                        .iter()
                        .enumerate()
                        .map(|(e, c)| c * monomial_integral(e))
                        .fold(Rat::zero(), |a, b| a + b);
                    if i != j {
                        assert!(integral.is_zero(), "n={} i={} j={}", n, i, j);
                    } else {
                        assert!(integral > Rat::zero());
                    }
                }
            }
        }
    }

    #[test]
    fn orthogonality_even_n_quadrature() {
        // Gauss-Legendre nodes/weights by Newton iteration; independent
        // float oracle for the even-n weight (1-t^2)^((n-3)/2).
        fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
            let mut nodes = vec![0.0; m];
            let mut weights = vec![0.0; m];
            for i in 0..m {
                let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for j in 2..=m {
                        let pj = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0)
                            / j as f64;
                        p0 = p1;
                        p1 = pj;
                    }
                    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-15 {
                        let (mut p0, mut p1) = (1.0, x);
                        for j in 2..=m {
                            let pj = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0)
                                / j as f64;
                            p0 = p1;
                            p1 = pj;
                        }
                        let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
                        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
                        break;
                    }
                }
                nodes[i] = x;
            }
            (nodes, weights)
        }
        let (nodes, weights) = gauss_legendre(64);
        // Substituting t = cos(phi) turns the weight's endpoint
        // singularities into a smooth trigonometric integrand, so the
        // quadrature converges to machine precision.
        let pi_c = std::f64::consts::PI;
        for n in [4u32, 6, 8] {
            let expo = n as f64 - 2.0;
            for i in 0..=6u32 {
                for j in 0..i {
                    let p_i = gegenbauer(n, i);
                    let p_j = gegenbauer(n, j);
                    let integral: f64 = nodes
                        .iter()
                        .zip(weights.iter())
                        .map(|(&x, &w)| {
                            let phi = pi_c * (x + 1.0) / 2.0;
                            w * (pi_c / 2.0)
                                * p_i.eval_f64(phi.cos())
                                * p_j.eval_f64(phi.cos())
                                * phi.sin().powf(expo)
                        })
                        .sum();
                    assert!(integral.abs() < 1e-12, "n={} i={} j={}: {}", n, i, j, integral);
                }
            }
        }
    }

    #[test]
    fn harm_dim_values() {
        for n in 2..12 {
            assert_eq!(harm_dim(n, 0), 1);
        }
        assert_eq!(harm_dim(3, 2), 5);
        assert_eq!(harm_dim(8, 1), 8);
        assert_eq!(harm_dim(3, 1), 3);
    }

    #[test]
    fn harm_dim_branching() {
        // h_k^n = sum_{i=0}^k h_i^{n-1}
        for n in 3..=12 {
            for k in 0..=15 {
                let lhs = harm_dim(n, k);
                let rhs: u64 = (0..=k).map(|i| harm_dim(n - 1, i)).sum();
                assert_eq!(lhs, rhs, "n={} k={}", n, k);
            }
        }
    }

    #[test]
    fn lambda_rat_values() {
        for n in 3..10 {
            assert_eq!(lambda_rat(n, 0), Rat::one());
        }
        assert_eq!(lambda_rat(3, 1), rat(3, 2));
        assert_eq!(lambda_rat(4, 2), rat(8, 5));
    }

    #[test]
    fn q_poly_small() {
        for n in 3..8 {
            assert_eq!(q_poly(n, 0), TriPoly::one());
            let expect = TriPoly::var(Var::T)
                .sub(&TriPoly::var(Var::U).mul(&TriPoly::var(Var::V)));
            assert_eq!(q_poly(n, 1), expect);
        }
        // n=4, k=2: (3(t-uv)^2 - (1-u^2)(1-v^2))/2
        let t_minus_uv = TriPoly::var(Var::T)
            .sub(&TriPoly::var(Var::U).mul(&TriPoly::var(Var::V)));
        let w = TriPoly::one()
            .sub(&TriPoly::var(Var::U).pow(2))
            .mul(&TriPoly::one().sub(&TriPoly::var(Var::V).pow(2)));
        let expect = t_minus_uv
            .pow(2)
            .scale(&rat(3, 2))
            .sub(&w.scale(&rat(1, 2)));
        assert_eq!(q_poly(4, 2), expect);
    }

    #[test]
    fn q_poly_at_zero_pole() {
        // Q_k^{n-1}(0, 0, t) = P_k^{n-1}(t)
        for n in 3..8u32 {
            for k in 0..8u32 {
                let q = q_poly(n, k);
                let restricted =
                    q.substitute(&TriPoly::zero(), &TriPoly::zero(), &TriPoly::var(Var::T));
                let expect = gegenbauer(n - 1, k).to_tripoly(Var::T);
                assert_eq!(restricted, expect, "n={} k={}", n, k);
            }
        }
    }

    #[test]
    fn q_poly_degree_bound() {
        for k in 0..8 {
            assert!(q_poly(5, k).degree() <= 2 * k);
        }
    }
}
