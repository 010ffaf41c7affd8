//! Minimal-degree certificate for the roots-of-unity cycle.
//!
//! For `Omega_n = {zeta, zeta^2, ..., zeta^n = 1}` with `zeta = e^{2 pi i/n}`, the
//! top-left `n x n` block of the cycle matrix factors as `V D` with `V` the
//! Vandermonde matrix `v_ij = zeta^{i(j-1)}` and `D = diag((j-2) - (j-1) zeta)`.
//! Both factors are nonsingular, so the full matrix has rank `n + 1`, its
//! nullspace is one-dimensional and the solution has degree exactly `n + 1`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::json;
use crate::linalg::{self, Matrix};
use crate::poly::{Polynomial, Relaxation};
use crate::synthesis::{
    build_plain_cycle_matrix, cycle_matrix_any_degree, polynomial_from_nullspace, Cycle,
};
use crate::verify;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Largest `n` accepted without an explicit override.
pub const MAX_CERTIFIED_N: usize = 12;
const RANK_TOL: f64 = 1e-10;
const CYCLE_TOL: f64 = 1e-6;

fn zeta(n: usize) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU / n as f64)
}

/// `{zeta, zeta^2, ..., zeta^n = 1}`.
pub fn roots_of_unity_cycle(n: usize) -> Result<Cycle> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "cycle length must be at least 2, got {n}"
        )));
    }
    let points = (1..=n)
        .map(|k| {
            if k == n {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64)
            }
        })
        .collect();
    Cycle::new(points)
}

/// Outcome of looking for a solution of degree at most `degree`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegreeCheck {
    pub degree: usize,
    pub nullity: usize,
    /// Whether some null vector represents a nonzero polynomial.
    pub nonzero_solution: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SharpnessCertificate {
    pub n: usize,
    #[serde(serialize_with = "json::serialize_complex")]
    pub zeta: Complex64,
    pub rank_b: usize,
    pub nullity: usize,
    #[serde(serialize_with = "json::serialize_complex")]
    pub det_bn: Complex64,
    #[serde(serialize_with = "json::serialize_complex")]
    pub det_v: Complex64,
    /// `prod_{j<i} (zeta^i - zeta^j)`.
    #[serde(serialize_with = "json::serialize_complex")]
    pub det_v_product: Complex64,
    #[serde(serialize_with = "json::serialize_complex")]
    pub det_d: Complex64,
    /// `|det(B_n) - det(V) det(D)| / |det(B_n)|`.
    pub factorization_error: f64,
    /// `|a_{n+1}| / max |a_k|` of the raw null vector.
    pub leading_ratio: f64,
    #[serde(serialize_with = "json::serialize_polynomial")]
    pub monic_poly: Polynomial,
    pub cycle_verified: bool,
    pub degree_sweep: Vec<DegreeCheck>,
    /// No polynomial of degree `<= n` solves the system.
    pub minimal_degree: bool,
}

/// `V` with `v_ij = zeta^{i(j-1)}`, `1 <= i, j <= n`.
pub fn vandermonde(n: usize) -> Matrix {
    let z = zeta(n);
    let mut v = Matrix::zeros(n, n);
    for i in 1..=n {
        for j in 1..=n {
            v[(i - 1, j - 1)] = z.powu((i * (j - 1)) as u32);
        }
    }
    v
}

/// Diagonal entries `(j-2) - (j-1) zeta`.
pub fn diagonal_factor(n: usize) -> Vec<Complex64> {
    let z = zeta(n);
    (1..=n)
        .map(|j| Complex64::new(j as f64 - 2.0, 0.0) - z * (j as f64 - 1.0))
        .collect()
}

fn vandermonde_product(n: usize) -> Complex64 {
    let z = zeta(n);
    let mut prod = Complex64::new(1.0, 0.0);
    for i in 1..=n {
        for j in 1..i {
            prod *= z.powu(i as u32) - z.powu(j as u32);
        }
    }
    prod
}

fn degree_check(omega: &Cycle, degree: usize) -> DegreeCheck {
    let cm = cycle_matrix_any_degree(omega, degree, Relaxation::plain());
    let basis = linalg::nullspace(&cm.b, RANK_TOL);
    let nonzero_solution = basis.iter().any(|v| linalg::inf_norm(v) > 0.0);
    DegreeCheck {
        degree,
        nullity: basis.len(),
        nonzero_solution,
    }
}

/// Runs the checks for every degree `1..=max_degree`.
pub fn degree_sweep(omega: &Cycle, max_degree: usize) -> Vec<DegreeCheck> {
    #[cfg(feature = "parallel")]
    {
        (1..=max_degree)
            .into_par_iter()
            .map(|d| degree_check(omega, d))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (1..=max_degree).map(|d| degree_check(omega, d)).collect()
    }
}

/// Certificate for `2 <= n <= 12`.
pub fn min_degree_certificate(n: usize) -> Result<SharpnessCertificate> {
    if n > MAX_CERTIFIED_N {
        return Err(Error::InvalidInput(format!(
            "n = {n} exceeds {MAX_CERTIFIED_N}; Vandermonde conditioning makes the certificate unreliable"
        )));
    }
    min_degree_certificate_unbounded(n)
}

/// Certificate without the `n <= 12` cap. Accuracy degrades as `n` grows.
pub fn min_degree_certificate_unbounded(n: usize) -> Result<SharpnessCertificate> {
    let omega = roots_of_unity_cycle(n)?;
    let cm = build_plain_cycle_matrix(&omega, n + 1)?;
    let red = linalg::rref(&cm.b, RANK_TOL);
    if red.rank != n + 1 {
        return Err(Error::RankMismatch {
            expected: n + 1,
            found: red.rank,
            pivots: red.pivot_magnitudes.clone(),
        });
    }

    let det_bn = linalg::determinant(&cm.b.submatrix(n, n))?;
    let det_v = linalg::determinant(&vandermonde(n))?;
    let det_d = diagonal_factor(n).iter().product::<Complex64>();
    let factorization_error = (det_bn - det_v * det_d).norm() / det_bn.norm();

    let basis = linalg::nullspace_from_rref(&red);
    let raw = &basis[0];
    let leading_ratio = raw[n + 1].norm() / linalg::inf_norm(raw);
    let monic_poly = polynomial_from_nullspace(&basis)?;
    let report = verify::check_cycle(&monic_poly, Relaxation::plain(), omega.points(), CYCLE_TOL);

    let degree_sweep = degree_sweep(&omega, n);
    let minimal_degree = degree_sweep.iter().all(|c| !c.nonzero_solution);

    Ok(SharpnessCertificate {
        n,
        zeta: zeta(n),
        rank_b: red.rank,
        nullity: basis.len(),
        det_bn,
        det_v,
        det_v_product: vandermonde_product(n),
        det_d,
        factorization_error,
        leading_ratio,
        monic_poly,
        cycle_verified: report.super_attracting,
        degree_sweep,
        minimal_degree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::classify_cubic_two_cycle;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn roots_of_unity_examples() {
        let two = roots_of_unity_cycle(2).unwrap();
        assert!((two.points()[0] - c(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(two.points()[1], c(1.0, 0.0));

        let four = roots_of_unity_cycle(4).unwrap();
        for (a, e) in
            four.points()
                .iter()
                .zip([c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0), c(1.0, 0.0)])
        {
            assert!((a - e).norm() < 1e-15);
        }

        let three = roots_of_unity_cycle(3).unwrap();
        let p = three.points();
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            assert!(((p[i] - p[j]).norm() - 3f64.sqrt()).abs() < 1e-14);
        }
        assert!(roots_of_unity_cycle(1).is_err());
    }

    #[test]
    fn diagonal_entries() {
        for n in 2..8 {
            let d = diagonal_factor(n);
            assert_eq!(d[0], c(-1.0, 0.0));
            assert!((d[1] + zeta(n)).norm() < 1e-15);
        }
    }

    #[test]
    fn factorization_holds_entrywise() {
        for n in 2..=10 {
            let omega = roots_of_unity_cycle(n).unwrap();
            let b = build_plain_cycle_matrix(&omega, n + 1)
                .unwrap()
                .b
                .submatrix(n, n);
            let d = diagonal_factor(n);
            let v = vandermonde(n);
            for i in 0..n {
                for j in 0..n {
                    assert!(
                        (b[(i, j)] - v[(i, j)] * d[j]).norm() < 1e-12,
                        "n={n} ({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn certificate_two_is_a_smale_conjugate() {
        let cert = min_degree_certificate(2).unwrap();
        assert_eq!(cert.rank_b, 3);
        assert_eq!(cert.monic_poly.degree(), 3);
        assert!(cert.cycle_verified);
        // independent check: the 3x4 system for {-1, 1} by hand
        let b = Matrix::from_real_rows(&[
            &[-1.0, -1.0, 1.0 + 2.0, -2.0 - 3.0],
            &[-1.0, 1.0, 1.0 + 2.0, 2.0 + 3.0],
            &[0.0, 0.0, 2.0, -6.0],
        ])
        .unwrap();
        assert_eq!(linalg::rank(&b, 1e-12), 3);
        let ns = linalg::nullspace(&b, 1e-12);
        let v = &ns[0];
        for (a, e) in cert.monic_poly.coeffs().iter().zip(v) {
            assert!((a - e / v[3]).norm() < 1e-12);
        }
        let omega = roots_of_unity_cycle(2).unwrap();
        let v = classify_cubic_two_cycle(&cert.monic_poly, omega.points()[0], omega.points()[1])
            .unwrap();
        assert!(v.affirmative);
    }

    #[test]
    fn certificate_three_determinants() {
        let cert = min_degree_certificate(3).unwrap();
        assert!(cert.factorization_error < 1e-9);
        assert!((cert.det_v - cert.det_v_product).norm() < 1e-10 * cert.det_v.norm());
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            min_degree_certificate(13),
            Err(Error::InvalidInput(_))
        ));
        assert!(min_degree_certificate(1).is_err());
    }

    #[test]
    fn certificates_up_to_ten() {
        for n in 2..=10 {
            let cert = min_degree_certificate(n).unwrap();
            assert_eq!(cert.rank_b, n + 1);
            assert_eq!(cert.nullity, 1);
            assert!(cert.leading_ratio > 1e-6);
            assert!(cert.factorization_error < 1e-8);
            assert!((cert.det_v - cert.det_v_product).norm() < 1e-8 * cert.det_v.norm());
            assert!(cert.cycle_verified, "n={n}");
            assert!(cert.minimal_degree, "n={n}: {:?}", cert.degree_sweep);
            assert_eq!(cert.degree_sweep.len(), n);
            assert_eq!(*cert.monic_poly.coeffs().last().unwrap(), c(1.0, 0.0));
        }
    }

    #[test]
    fn certificate_json_has_all_fields() {
        let cert = min_degree_certificate(4).unwrap();
        let v = serde_json::to_value(&cert).unwrap();
        for key in [
            "n",
            "zeta",
            "rank_b",
            "det_bn",
            "det_v",
            "det_d",
            "monic_poly",
            "cycle_verified",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["monic_poly"].as_array().unwrap().len(), 6);
    }
}
