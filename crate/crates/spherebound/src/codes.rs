//! Spherical-code ingestion and the two- and three-point distance
//! distributions, used as empirical sanity oracles for the positivity
//! properties behind the LP and SDP bounds.

use crate::exact::{rat_to_f64, rat_u, Rat};
use crate::orthopoly::gegenbauer;
use crate::zonal::build_s;
use nalgebra::DMatrix;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

pub const DEFAULT_MERGE_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum CodeError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {0}: cannot parse coordinate {1:?}")]
    BadCoordinate(usize, String),
    #[error("line {0}: expected dimension {1}, got {2}")]
    DimensionMismatch(usize, usize, usize),
    #[error("line {0}: point has norm {1}, not a unit vector")]
    NotUnit(usize, f64),
    #[error("unknown builtin code {0:?}")]
    UnknownBuiltin(String),
    #[error("empty code")]
    Empty,
}

/// A finite set of unit vectors.
#[derive(Debug, Clone)]
pub struct SphericalCode {
    pub n: usize,
    pub points: Vec<Vec<f64>>,
    pub name: Option<String>,
}

impl SphericalCode {
    pub fn new(n: usize, points: Vec<Vec<f64>>, name: Option<String>) -> Result<Self, CodeError> {
        if points.is_empty() {
            return Err(CodeError::Empty);
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != n {
                return Err(CodeError::DimensionMismatch(i + 1, n, p.len()));
            }
            let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(CodeError::NotUnit(i + 1, norm));
            }
        }
        Ok(SphericalCode { n, points, name })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Maximum inner product over distinct pairs.
    pub fn max_inner_product(&self) -> f64 {
        let mut best = -1.0f64;
        for i in 0..self.points.len() {
            for j in 0..i {
                best = best.max(dot(&self.points[i], &self.points[j]));
            }
        }
        best
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn icosahedron() -> Vec<Vec<f64>> {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let norm = (1.0 + phi * phi).sqrt();
    let mut pts = Vec::new();
    for (a, b) in [(1.0, phi), (1.0, -phi), (-1.0, phi), (-1.0, -phi)] {
        pts.push(vec![0.0, a / norm, b / norm]);
        pts.push(vec![a / norm, b / norm, 0.0]);
        pts.push(vec![b / norm, 0.0, a / norm]);
    }
    pts
}

fn d4_roots() -> Vec<Vec<f64>> {
    let s = 1.0 / 2.0f64.sqrt();
    let mut pts = Vec::new();
    for i in 0..4 {
        for j in (i + 1)..4 {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut p = vec![0.0; 4];
                p[i] = si * s;
                p[j] = sj * s;
                pts.push(p);
            }
        }
    }
    pts
}

fn e8_roots() -> Vec<Vec<f64>> {
    let s = 1.0 / 2.0f64.sqrt();
    let mut pts = Vec::new();
    // 112 of type (+-1, +-1, 0^6) / sqrt(2)
    for i in 0..8 {
        for j in (i + 1)..8 {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut p = vec![0.0; 8];
                p[i] = si * s;
                p[j] = sj * s;
                pts.push(p);
            }
        }
    }
    // 128 of type (+-1/2, ..., +-1/2) / sqrt(2) with an even number of minus signs
    for mask in 0u32..256 {
        if mask.count_ones() % 2 == 0 {
            let p: Vec<f64> = (0..8)
                .map(|b| if mask >> b & 1 == 1 { -0.5 * s } else { 0.5 * s })
                .collect();
            pts.push(p);
        }
    }
    pts
}

/// Loads a builtin code by name or a file with one whitespace-separated
/// point per line (`#` comments allowed).
pub fn load_code(source: &str) -> Result<SphericalCode, CodeError> {
    match source {
        "icosahedron" => SphericalCode::new(3, icosahedron(), Some("icosahedron".into())),
        "d4-roots" => SphericalCode::new(4, d4_roots(), Some("d4-roots".into())),
        "e8-roots" => SphericalCode::new(8, e8_roots(), Some("e8-roots".into())),
        path => {
            if !Path::new(path).exists() {
                return Err(CodeError::UnknownBuiltin(path.to_string()));
            }
            let text = std::fs::read_to_string(path)?;
            let mut points: Vec<Vec<f64>> = Vec::new();
            let mut n = 0usize;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let coords: Result<Vec<f64>, _> = line
                    .split_whitespace()
                    .map(|w| {
                        w.parse::<f64>()
                            .map_err(|_| CodeError::BadCoordinate(lineno + 1, w.to_string()))
                    })
                    .collect();
                let coords = coords?;
                if points.is_empty() {
                    n = coords.len();
                } else if coords.len() != n {
                    return Err(CodeError::DimensionMismatch(lineno + 1, n, coords.len()));
                }
                points.push(coords);
            }
            SphericalCode::new(n, points, Some(path.to_string()))
        }
    }
}

/// Snaps `x` to the nearest rational p/q with q <= 64 when within `tol`,
/// otherwise keeps the float. Keeps known algebraic values like 1/2 or 0
/// exact without algebraic-number machinery.
fn snap(x: f64, tol: f64) -> f64 {
    for q in 1..=64i64 {
        let p = (x * q as f64).round();
        if (x - p / q as f64).abs() <= tol {
            return p / q as f64;
        }
    }
    x
}

fn merge_key(x: f64, tol: f64) -> i64 {
    (x / tol).round() as i64
}

/// Two-point distance distribution `x(u)`: weight per merged inner-product
/// value, with exact rational bookkeeping (pair counts over |C|).
pub fn two_point_distribution(code: &SphericalCode, merge_tol: f64) -> BTreeMap<i64, (f64, Rat)> {
    let mut counts: BTreeMap<i64, (f64, u64)> = BTreeMap::new();
    for a in code.points.iter() {
        for b in code.points.iter() {
            let u = snap(dot(a, b).clamp(-1.0, 1.0), merge_tol);
            let e = counts.entry(merge_key(u, merge_tol)).or_insert((u, 0));
            e.1 += 1;
        }
    }
    let card = rat_u(code.len() as u64);
    counts
        .into_iter()
        .map(|(k, (u, c))| (k, (u, rat_u(c) / &card)))
        .collect()
}

/// One entry of the three-point distribution: a sorted triple of merged
/// inner products with its weight and permutation multiplicity.
#[derive(Debug, Clone)]
pub struct TripleEntry {
    pub uvt: [f64; 3],
    /// x(u,v,t), exact count over |C|.
    pub weight: Rat,
    /// Size of the permutation orbit: 1, 3, or 6.
    pub multiplicity: u32,
}

#[derive(Debug, Clone)]
pub struct ThreePointDistribution {
    pub support: Vec<TripleEntry>,
    pub cardinality: usize,
}

impl ThreePointDistribution {
    /// Sum of weights over the full unsorted support.
    pub fn total_weight(&self) -> Rat {
        self.support
            .iter()
            .map(|e| &e.weight * rat_u(e.multiplicity as u64))
            .fold(Rat::zero(), |a, b| a + b)
    }

    /// Distinct permutations of each sorted support triple.
    pub fn unsorted_support(&self) -> Vec<([f64; 3], Rat)> {
        let mut out = Vec::new();
        for e in self.support.iter() {
            let [u, v, t] = e.uvt;
            let perms = [
                [u, v, t],
                [u, t, v],
                [v, u, t],
                [v, t, u],
                [t, u, v],
                [t, v, u],
            ];
            let mut seen: Vec<[f64; 3]> = Vec::new();
            for p in perms {
                if !seen.iter().any(|q| q == &p) {
                    seen.push(p);
                }
            }
            debug_assert_eq!(seen.len(), e.multiplicity as usize);
            for p in seen {
                out.push((p, e.weight.clone()));
            }
        }
        out
    }
}

/// Three-point distance distribution by brute-force enumeration of all
/// ordered triples; stored once per sorted triple.
pub fn three_point_distribution(code: &SphericalCode, merge_tol: f64) -> ThreePointDistribution {
    let pts = &code.points;
    let m = pts.len();
    // Precompute merged inner products.
    let mut ip = vec![0.0f64; m * m];
    for i in 0..m {
        for j in 0..m {
            ip[i * m + j] = snap(dot(&pts[i], &pts[j]).clamp(-1.0, 1.0), merge_tol);
        }
    }
    let mut counts: BTreeMap<[i64; 3], ([f64; 3], u64)> = BTreeMap::new();
    for a in 0..m {
        for b in 0..m {
            let uab = ip[a * m + b];
            for c in 0..m {
                let mut tri = [uab, ip[a * m + c], ip[b * m + c]];
                tri.sort_by(|x, y| x.partial_cmp(y).unwrap());
                let key = [
                    merge_key(tri[0], merge_tol),
                    merge_key(tri[1], merge_tol),
                    merge_key(tri[2], merge_tol),
                ];
                counts.entry(key).or_insert((tri, 0)).1 += 1;
            }
        }
    }
    let card = rat_u(m as u64);
    let support = counts
        .into_values()
        .map(|(uvt, count)| {
            let mult = if uvt[0] == uvt[1] && uvt[1] == uvt[2] {
                1
            } else if uvt[0] == uvt[1] || uvt[1] == uvt[2] {
                3
            } else {
                6
            };
            TripleEntry {
                uvt,
                weight: rat_u(count / mult as u64) / &card,
                multiplicity: mult,
            }
        })
        .collect();
    ThreePointDistribution {
        support,
        cardinality: m,
    }
}

/// One row of the positivity report.
#[derive(Debug, Clone)]
pub struct PositivityRow {
    pub k: u32,
    pub two_point_sum: f64,
    pub three_point_min_eig: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct PositivityReport {
    pub code_name: String,
    pub n: usize,
    pub cardinality: usize,
    pub d: u32,
    pub rows: Vec<PositivityRow>,
    pub gram_condition_ok: bool,
}

impl PositivityReport {
    pub fn all_pass(&self) -> bool {
        self.gram_condition_ok && self.rows.iter().all(|r| r.pass)
    }

    /// Human-readable table.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "code {} (n={}, |C|={}), d={}",
            self.code_name, self.n, self.cardinality, self.d
        );
        let _ = writeln!(s, "{:>3} {:>18} {:>18} {:>6}", "k", "sum x(u)P_k(u)", "min eig S_k sum", "pass");
        for r in self.rows.iter() {
            let _ = writeln!(
                s,
                "{:>3} {:>18.3e} {:>18.3e} {:>6}",
                r.k,
                r.two_point_sum,
                r.three_point_min_eig,
                if r.pass { "yes" } else { "NO" }
            );
        }
        let _ = writeln!(
            s,
            "gram condition: {}",
            if self.gram_condition_ok { "ok" } else { "VIOLATED" }
        );
        s
    }

    /// Machine-readable key: value lines.
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "code: {}", self.code_name);
        let _ = writeln!(s, "n: {}", self.n);
        let _ = writeln!(s, "cardinality: {}", self.cardinality);
        let _ = writeln!(s, "d: {}", self.d);
        let _ = writeln!(s, "gram_condition_ok: {}", self.gram_condition_ok);
        for r in self.rows.iter() {
            let _ = writeln!(s, "two_point_sum_{}: {:e}", r.k, r.two_point_sum);
            let _ = writeln!(s, "three_point_min_eig_{}: {:e}", r.k, r.three_point_min_eig);
            let _ = writeln!(s, "pass_{}: {}", r.k, r.pass);
        }
        let _ = writeln!(s, "all_pass: {}", self.all_pass());
        s
    }
}

/// Checks the scalar positivity of the two-point distribution against
/// `P_k^n` and the matrix positivity of the three-point distribution
/// against `S_k^n`, for k = 0..d. Violations are flagged, not fatal.
pub fn empirical_positivity_report(code: &SphericalCode, d: u32) -> PositivityReport {
    let two = two_point_distribution(code, DEFAULT_MERGE_TOL);
    let three = three_point_distribution(code, DEFAULT_MERGE_TOL);
    let unsorted = three.unsorted_support();
    let card2 = (code.len() * code.len()) as f64;

    let mut gram_ok = true;
    for e in three.support.iter() {
        let [u, v, t] = e.uvt;
        if !(-1.0 - 1e-9..=1.0 + 1e-9).contains(&u)
            || 1.0 + 2.0 * u * v * t - u * u - v * v - t * t < -1e-9
        {
            gram_ok = false;
        }
    }

    let mut rows = Vec::new();
    for k in 0..=d {
        let pk = gegenbauer(code.n as u32, k);
        let two_sum: f64 = two
            .values()
            .map(|(u, w)| rat_to_f64(w) * pk.eval_f64(*u))
            .sum();

        let s = build_s(code.n as u32, k, d);
        let dim = s.body.dim();
        let mut acc = DMatrix::<f64>::zeros(dim, dim);
        for (uvt, w) in unsorted.iter() {
            let vals = s.body.eval_f64(uvt[0], uvt[1], uvt[2]);
            let wf = rat_to_f64(w);
            for i in 0..dim {
                for j in 0..dim {
                    acc[(i, j)] += wf * vals[i * dim + j];
                }
            }
        }
        let min_eig = acc
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let pass = two_sum >= -1e-9 && min_eig >= -1e-9 * dim as f64 * card2;
        rows.push(PositivityRow {
            k,
            two_point_sum: two_sum,
            three_point_min_eig: min_eig,
            pass,
        });
    }
    PositivityReport {
        code_name: code.name.clone().unwrap_or_else(|| "<unnamed>".into()),
        n: code.n,
        cardinality: code.len(),
        d,
        rows,
        gram_condition_ok: gram_ok,
    }
}

/// Uniform random code from seeded Gaussian samples; deterministic per seed.
pub fn random_code(n: usize, size: usize, seed: u64) -> SphericalCode {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..size)
        .map(|_| loop {
            let v: Vec<f64> = (0..n)
                .map(|_| {
                    let u1: f64 = rng.gen_range(1e-12..1.0f64);
                    let u2: f64 = rng.gen_range(0.0..1.0f64);
                    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
                })
                .collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-6 {
                break v.iter().map(|x| x / norm).collect();
            }
        })
        .collect();
    SphericalCode::new(n, points, Some(format!("random-{}-{}-{}", n, size, seed))).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, rat_i};

    #[test]
    fn builtin_sizes() {
        assert_eq!(load_code("icosahedron").unwrap().len(), 12);
        let d4 = load_code("d4-roots").unwrap();
        assert_eq!((d4.n, d4.len()), (4, 24));
        let e8 = load_code("e8-roots").unwrap();
        assert_eq!((e8.n, e8.len()), (8, 240));
        assert!(load_code("no-such-code").is_err());
    }

    #[test]
    fn icosahedron_min_angle() {
        let ico = load_code("icosahedron").unwrap();
        let max_ip = ico.max_inner_product();
        assert!((max_ip - 1.0 / 5.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn load_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("code.txt");
        std::fs::write(&path, "# a simplex edge\n1 0\n0 1\n-1 0\n").unwrap();
        let code = load_code(path.to_str().unwrap()).unwrap();
        assert_eq!((code.n, code.len()), (2, 3));

        let bad = dir.path().join("bad.txt");
        std::fs::write(&bad, "1 1\n").unwrap();
        assert!(matches!(
            load_code(bad.to_str().unwrap()),
            Err(CodeError::NotUnit(..))
        ));
    }

    #[test]
    fn two_point_icosahedron() {
        let ico = load_code("icosahedron").unwrap();
        let dist = two_point_distribution(&ico, DEFAULT_MERGE_TOL);
        assert_eq!(dist.len(), 4);
        let inv_sqrt5 = 1.0 / 5.0f64.sqrt();
        for (u, expect) in [(1.0, 1i64), (inv_sqrt5, 5), (-inv_sqrt5, 5), (-1.0, 1)] {
            let (_, w) = dist
                .values()
                .find(|(x, _)| (x - u).abs() < 1e-9)
                .expect("support value missing");
            assert_eq!(w, &rat_i(expect));
        }
    }

    #[test]
    fn two_point_single_point() {
        let code = SphericalCode::new(3, vec![vec![1.0, 0.0, 0.0]], None).unwrap();
        let dist = two_point_distribution(&code, DEFAULT_MERGE_TOL);
        assert_eq!(dist.len(), 1);
        let (u, w) = dist.values().next().unwrap();
        assert_eq!((*u, w.clone()), (1.0, rat_i(1)));
    }

    #[test]
    fn two_point_d4() {
        let d4 = load_code("d4-roots").unwrap();
        let dist = two_point_distribution(&d4, DEFAULT_MERGE_TOL);
        for (u, expect) in [(1.0, 1i64), (0.5, 8), (0.0, 6), (-0.5, 8), (-1.0, 1)] {
            let (_, w) = dist
                .values()
                .find(|(x, _)| (x - u).abs() < 1e-9)
                .expect("support value missing");
            assert_eq!(w, &rat_i(expect), "u={}", u);
        }
        let total: Rat = dist.values().map(|(_, w)| w.clone()).fold(rat_i(0), |a, b| a + b);
        assert_eq!(total, rat_i(24));
    }

    #[test]
    fn three_point_single_and_antipodal() {
        let single = SphericalCode::new(2, vec![vec![1.0, 0.0]], None).unwrap();
        let d = three_point_distribution(&single, DEFAULT_MERGE_TOL);
        assert_eq!(d.support.len(), 1);
        assert_eq!(d.support[0].uvt, [1.0, 1.0, 1.0]);
        assert_eq!(d.support[0].weight, rat_i(1));

        let anti =
            SphericalCode::new(2, vec![vec![1.0, 0.0], vec![-1.0, 0.0]], None).unwrap();
        let d = three_point_distribution(&anti, DEFAULT_MERGE_TOL);
        // 8 ordered triples over 2 points, total weight 8/2 = |C|^2 = 4.
        assert_eq!(d.total_weight(), rat_i(4));
        let x111 = d
            .support
            .iter()
            .find(|e| e.uvt == [1.0, 1.0, 1.0])
            .unwrap();
        assert_eq!(x111.weight, rat_i(1));
    }

    #[test]
    fn three_point_icosahedron_totals() {
        let ico = load_code("icosahedron").unwrap();
        let d = three_point_distribution(&ico, DEFAULT_MERGE_TOL);
        assert_eq!(d.total_weight(), rat_i(144));
        // x(u,u,1) = x(u) for every two-point support value.
        let two = two_point_distribution(&ico, DEFAULT_MERGE_TOL);
        for (u, w) in two.values() {
            let mut tri = [*u, *u, 1.0];
            tri.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let entry = d
                .support
                .iter()
                .find(|e| {
                    e.uvt
                        .iter()
                        .zip(tri.iter())
                        .all(|(a, b)| (a - b).abs() < 1e-9)
                })
                .expect("missing (u,u,1) triple");
            assert_eq!(&entry.weight, w, "u={}", u);
        }
        // sum_u x(u,u,1) = |C|
        let diag_sum: Rat = two.values().map(|(_, w)| w.clone()).fold(rat_i(0), |a, b| a + b);
        assert_eq!(diag_sum, rat_i(12));
    }

    #[test]
    fn snapping_keeps_small_denominators_exact() {
        assert_eq!(snap(0.4999999999, 1e-9), 0.5);
        assert_eq!(snap(1.0 / 3.0 + 2e-10, 1e-9), 1.0 / 3.0);
        // 1/sqrt(5) is not p/q with q <= 64 to 1e-9; stays floating.
        let x = 1.0 / 5.0f64.sqrt();
        assert_eq!(snap(x, 1e-9), x);
    }

    #[test]
    fn positivity_icosahedron() {
        let ico = load_code("icosahedron").unwrap();
        let report = empirical_positivity_report(&ico, 5);
        assert!(report.all_pass(), "{}", report.to_table());
    }

    #[test]
    fn positivity_random_code() {
        let code = random_code(3, 10, 42);
        let report = empirical_positivity_report(&code, 6);
        assert!(report.all_pass(), "{}", report.to_table());
    }

    #[test]
    fn gram_condition_on_support() {
        for (name, _) in [("icosahedron", 3), ("d4-roots", 4)] {
            let code = load_code(name).unwrap();
            let d = three_point_distribution(&code, DEFAULT_MERGE_TOL);
            for e in d.support.iter() {
                let [u, v, t] = e.uvt;
                assert!(1.0 + 2.0 * u * v * t - u * u - v * v - t * t >= -1e-9);
                assert!(e.weight >= rat(0, 1));
            }
        }
    }
}
