//! Cycle matrices and polynomial synthesis.
//!
//! For a cycle `z_1, ..., z_n` and degree `d`, row `i < n` of the cycle matrix
//! is `(z_i - z_{i+1}) * z'_i - h * z_i` over the monomial coordinates
//! `(1, z, ..., z^d)`, so that `B . A = 0` row by row says `N_{p,h}(z_i) =
//! z_{i+1}` for the polynomial with coefficient vector `A`. The final row
//! forces the multiplier at `z_1` to vanish:
//! `(z_1 - z_2)^2 * z''_1 - h (h - 1) * z_1`, which for `h = 1` is a multiple
//! of the plain `p''(z_1) = 0` condition.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::poly::{Polynomial, Relaxation, Tolerances};
use crate::verify;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Pivot tolerance used when extracting polynomials from a cycle matrix.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Minimum pairwise separation, relative to the cycle diameter.
pub const DEFAULT_SEPARATION: f64 = 1e-9;

/// An ordered list of distinct points, read cyclically (`z_{n+1} = z_1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Cycle {
    points: Vec<Complex64>,
}

impl Cycle {
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "a cycle needs at least 2 points, got {}",
                points.len()
            )));
        }
        if points
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidInput("cycle points must be finite".into()));
        }
        if let Some((i, j)) = first_coincidence(&points, DEFAULT_SEPARATION) {
            return Err(Error::Distinctness { i, j });
        }
        Ok(Self { points })
    }

    pub fn from_real(points: &[f64]) -> Result<Self> {
        Self::new(points.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Successor of point `i`, wrapping around.
    pub fn next(&self, i: usize) -> Complex64 {
        self.points[(i + 1) % self.points.len()]
    }

    pub fn diameter(&self) -> f64 {
        diameter(&self.points)
    }

    /// The same cycle started at point `k`.
    pub fn rotated(&self, k: usize) -> Cycle {
        let mut points = self.points.clone();
        points.rotate_left(k % self.points.len());
        Cycle { points }
    }
}

pub(crate) fn diameter(points: &[Complex64]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            d = d.max((a - b).norm());
        }
    }
    d
}

/// First pair closer than `rel * diameter`, if any.
pub(crate) fn first_coincidence(points: &[Complex64], rel: f64) -> Option<(usize, usize)> {
    let cutoff = rel * diameter(points);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if (points[i] - points[j]).norm() <= cutoff {
                return Some((i, j));
            }
        }
    }
    None
}

/// The `(n + 1) x (d + 1)` homogeneous system for a prescribed cycle.
#[derive(Debug, Clone)]
pub struct CycleMatrix {
    pub b: Matrix,
    pub n: usize,
    pub d: usize,
    pub h: Relaxation,
}

fn powers(z: Complex64, d: usize) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(d + 1);
    let mut acc = ONE;
    for _ in 0..=d {
        v.push(acc);
        acc *= z;
    }
    v
}

/// `(1, z, ..., z^d)` and its first two derivatives in `z`.
fn monomial_jets(z: Complex64, d: usize) -> (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>) {
    let pw = powers(z, d);
    let first = (0..=d)
        .map(|k| if k >= 1 { pw[k - 1] * k as f64 } else { ZERO })
        .collect();
    let second = (0..=d)
        .map(|k| {
            if k >= 2 {
                pw[k - 2] * (k * (k - 1)) as f64
            } else {
                ZERO
            }
        })
        .collect();
    (pw, first, second)
}

fn cycle_rows(omega: &Cycle, d: usize, h: Complex64) -> Vec<Vec<Complex64>> {
    (0..omega.len())
        .map(|i| {
            let z = omega.points[i];
            let step = z - omega.next(i);
            let (pw, first, _) = monomial_jets(z, d);
            pw.iter()
                .zip(&first)
                .map(|(v, dv)| step * dv - h * v)
                .collect()
        })
        .collect()
}

/// Cycle matrix with the relaxed super-attraction row. Accepts any `d >= 1`;
/// [`build_cycle_matrix`] is the validated entry point.
pub(crate) fn cycle_matrix_any_degree(omega: &Cycle, d: usize, h: Relaxation) -> CycleMatrix {
    let hv = h.value();
    let mut rows = cycle_rows(omega, d, hv);
    let z1 = omega.points[0];
    let gap = z1 - omega.points[1];
    let (pw, _, second) = monomial_jets(z1, d);
    rows.push(
        second
            .iter()
            .zip(&pw)
            .map(|(s, v)| gap * gap * s - hv * (hv - 1.0) * v)
            .collect(),
    );
    CycleMatrix {
        b: Matrix::from_rows(&rows).expect("rows have d + 1 entries"),
        n: omega.len(),
        d,
        h,
    }
}

/// Cycle matrix for the relaxed map `z - h p/p'`.
pub fn build_cycle_matrix(omega: &Cycle, d: usize, h: Relaxation) -> Result<CycleMatrix> {
    if d < 2 {
        return Err(Error::InvalidInput(format!(
            "degree must be at least 2, got {d}"
        )));
    }
    Ok(cycle_matrix_any_degree(omega, d, h))
}

/// Plain-Newton cycle matrix whose last row is `z''_1` itself.
pub fn build_plain_cycle_matrix(omega: &Cycle, d: usize) -> Result<CycleMatrix> {
    if d < 2 {
        return Err(Error::InvalidInput(format!(
            "degree must be at least 2, got {d}"
        )));
    }
    let mut rows = cycle_rows(omega, d, ONE);
    let (_, _, second) = monomial_jets(omega.points[0], d);
    rows.push(second);
    Ok(CycleMatrix {
        b: Matrix::from_rows(&rows).expect("rows have d + 1 entries"),
        n: omega.len(),
        d,
        h: Relaxation::plain(),
    })
}

/// Picks the null vector of highest polynomial degree and makes it monic.
pub(crate) fn polynomial_from_nullspace(basis: &[Vec<Complex64>]) -> Result<Polynomial> {
    let tol = Tolerances::default();
    let mut best: Option<(usize, Polynomial)> = None;
    for v in basis {
        let p = Polynomial::new(v.clone())?;
        if p.is_zero() {
            continue;
        }
        let deg = p.degree_with(&tol);
        if best.as_ref().is_none_or(|(d, _)| deg > *d) {
            best = Some((deg, p));
        }
    }
    match best {
        None => Err(Error::NoSolution),
        Some((0, _)) => Err(Error::ConstantSolution),
        Some((_, p)) => p.monic(),
    }
}

/// A polynomial of degree at most `d` whose relaxed Newton map has `omega` as
/// a super-attracting cycle. `d = n + 1` always has a solution.
///
/// When the nullspace has more than one dimension, the basis vector with the
/// highest-degree free variable wins.
pub fn synthesize(omega: &Cycle, h: Relaxation, d: usize) -> Result<Polynomial> {
    synthesize_with_tol(omega, h, d, DEFAULT_RANK_TOL)
}

pub fn synthesize_with_tol(omega: &Cycle, h: Relaxation, d: usize, tol: f64) -> Result<Polynomial> {
    let cm = build_cycle_matrix(omega, d, h)?;
    let basis = linalg::nullspace(&cm.b, tol);
    let p = polynomial_from_nullspace(&basis)?;
    Ok(refine(&cm.b, p, tol))
}

const REFINE_STEPS: usize = 3;

/// Iterative refinement of a monic null vector with the leading coefficient
/// held at 1. Residuals are accumulated in double-word precision. Applies only
/// when the remaining unknowns form a square system.
fn refine(b: &Matrix, p: Polynomial, tol: f64) -> Polynomial {
    let k = p.degree();
    if b.rows() != k {
        return p;
    }
    let mut a = p.coeffs().to_vec();
    a.resize(b.cols(), Complex64::new(0.0, 0.0));
    let square = b.submatrix(k, k);
    let norm = |r: &[Complex64]| linalg::inf_norm(r);
    let mut r = linalg::mul_vec_compensated(b, &a);
    for _ in 0..REFINE_STEPS {
        let rhs: Vec<Complex64> = r.iter().map(|x| -x).collect();
        let Ok(delta) = linalg::solve(&square, &rhs, tol) else {
            break;
        };
        let mut next = a.clone();
        for (x, dx) in next.iter_mut().zip(&delta) {
            *x += dx;
        }
        let r_next = linalg::mul_vec_compensated(b, &next);
        if !(norm(&r_next) < norm(&r)) {
            break;
        }
        a = next;
        r = r_next;
    }
    a.truncate(k + 1);
    Polynomial::new(a).unwrap_or(p)
}

/// `T(z) = a z + b` with `a != 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub a: Complex64,
    pub b: Complex64,
}

impl AffineMap {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        if a.norm() == 0.0 || !a.re.is_finite() || !a.im.is_finite() {
            return Err(Error::InvalidInput("affine scale must be nonzero".into()));
        }
        Ok(Self { a, b })
    }

    pub fn identity() -> Self {
        Self { a: ONE, b: ZERO }
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        self.a * z + self.b
    }

    pub fn inverse(&self) -> AffineMap {
        let inv = ONE / self.a;
        AffineMap {
            a: inv,
            b: -self.b * inv,
        }
    }

    pub fn apply_inverse(&self, w: Complex64) -> Complex64 {
        (w - self.b) / self.a
    }
}

/// Moves the cycle so it starts `0, 1, ...`.
///
/// Returns `T(z) = (z_2 - z_1) z + z_1` and the cycle `T^{-1}(z_i)`.
pub fn normalize_cycle(omega: &Cycle) -> Result<(AffineMap, Cycle)> {
    let (z1, z2) = (omega.points[0], omega.points[1]);
    let t = AffineMap::new(z2 - z1, z1).map_err(|_| Error::Distinctness { i: 0, j: 1 })?;
    let mut points: Vec<Complex64> = omega.points.iter().map(|&z| t.apply_inverse(z)).collect();
    points[0] = ZERO;
    points[1] = ONE;
    Ok((t, Cycle::new(points)?))
}

/// Coefficients of `p(T(z))`.
pub fn conjugate_poly(p: &Polynomial, t: &AffineMap) -> Polynomial {
    let coeffs = p.coeffs();
    let mut out = vec![*coeffs.last().unwrap()];
    for &a in coeffs.iter().rev().skip(1) {
        // out <- out * (t.a z + t.b) + a
        let mut next = vec![ZERO; out.len() + 1];
        for (k, &c) in out.iter().enumerate() {
            next[k + 1] += c * t.a;
            next[k] += c * t.b;
        }
        next[0] += a;
        out = next;
    }
    Polynomial::new(out).expect("finite coefficients")
}

/// Outcome of comparing a cubic with a 2-cycle against `z^3 - 2z + 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmaleVerdict {
    /// Whether some labeling makes `q o T` a multiple of `z^3 - 2z + 2`.
    pub affirmative: bool,
    /// The multiple, when affirmative.
    pub scalar: Option<Complex64>,
    /// Which cycle point played `0` under the successful labeling.
    pub base_point: Option<Complex64>,
}

/// Checks that a cubic with a super-attracting 2-cycle `{w1, w2}` is, after
/// affine normalization of the cycle, a scalar multiple of `z^3 - 2z + 2`.
pub fn classify_cubic_two_cycle(
    q: &Polynomial,
    w1: Complex64,
    w2: Complex64,
) -> Result<SmaleVerdict> {
    if q.degree() != 3 {
        return Err(Error::InvalidInput(format!(
            "expected a cubic, got degree {}",
            q.degree()
        )));
    }
    let cycle = Cycle::new(vec![w1, w2])?;
    let report = verify::check_cycle(q, Relaxation::plain(), cycle.points(), 1e-8);
    if !report.super_attracting {
        return Err(Error::NotACycle(report.failure_summary()));
    }
    let smale = [2.0, -2.0, 0.0, 1.0];
    for (a, b) in [(w1, w2), (w2, w1)] {
        let t = AffineMap::new(b - a, a)?;
        let r = conjugate_poly(&q.trimmed(), &t);
        let scalar = r.coeffs()[3];
        let err = r
            .coeffs()
            .iter()
            .zip(smale)
            .map(|(c, s)| (c - scalar * s).norm())
            .fold(0.0, f64::max);
        if err <= 1e-8 * scalar.norm() {
            return Ok(SmaleVerdict {
                affirmative: true,
                scalar: Some(scalar),
                base_point: Some(a),
            });
        }
    }
    Ok(SmaleVerdict {
        affirmative: false,
        scalar: None,
        base_point: None,
    })
}
