//! Independent verification of claimed super-attracting cycles.
//!
//! Nothing here looks at how a polynomial was produced: closure is measured by
//! applying the Newton map leg by leg and the multiplier is the product of the
//! map's derivative over the cycle.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::json;
use crate::poly::{NewtonMap, Polynomial, Relaxation};
use crate::synthesis::{diameter, first_coincidence, DEFAULT_SEPARATION};

pub const DEFAULT_MULTIPLIER_TOL: f64 = 1e-6;
pub const DEFAULT_CLOSURE_TOL: f64 = 1e-8;

/// Relative threshold below which `|p(z_i)|` marks a cycle point as a root.
const ROOT_CLEARANCE_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    /// Per-leg closure tolerance, relative to the cycle diameter.
    pub closure_tol: f64,
    pub multiplier_tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            closure_tol: DEFAULT_CLOSURE_TOL,
            multiplier_tol: DEFAULT_MULTIPLIER_TOL,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleReport {
    /// `|N(z_i) - z_{i+1}|` per leg; infinite where the map has a pole.
    pub closure_errors: Vec<f64>,
    #[serde(serialize_with = "json::serialize_complex")]
    pub multiplier: Complex64,
    pub multiplier_abs: f64,
    /// `min |p(z_i)|`.
    pub root_clearance: f64,
    pub distinct: bool,
    pub super_attracting: bool,
    #[serde(skip)]
    closure_cutoff: f64,
    #[serde(skip)]
    multiplier_tol: f64,
    #[serde(skip)]
    root_clear: bool,
}

impl CycleReport {
    /// One-line description of every failed check, empty when all pass.
    pub fn failure_summary(&self) -> String {
        let mut parts = Vec::new();
        for (i, e) in self.closure_errors.iter().enumerate() {
            if !e.is_finite() || self.closure_fails(*e) {
                parts.push(format!("leg {} closure error {e:e}", i + 1));
            }
        }
        if !self.distinct {
            parts.push("points not distinct".to_string());
        }
        if !(self.multiplier_abs < self.multiplier_tol) {
            parts.push(format!("|multiplier| = {:e}", self.multiplier_abs));
        }
        if !self.root_clear {
            parts.push(format!(
                "cycle point is a root (|p| = {:e})",
                self.root_clearance
            ));
        }
        parts.join("; ")
    }

    fn closure_fails(&self, e: f64) -> bool {
        !(e < self.closure_cutoff)
    }
}

/// `prod_i N'_{p,h}(z_i)`.
pub fn multiplier(p: &Polynomial, h: Relaxation, points: &[Complex64]) -> Result<Complex64> {
    let map = NewtonMap::new(p, h)?;
    points.iter().try_fold(Complex64::new(1.0, 0.0), |acc, &z| {
        Ok(acc * map.derivative(z)?)
    })
}

pub fn check_cycle(p: &Polynomial, h: Relaxation, points: &[Complex64], tol: f64) -> CycleReport {
    check_cycle_with(
        p,
        h,
        points,
        &CheckOptions {
            closure_tol: tol,
            ..CheckOptions::default()
        },
    )
}

pub fn check_cycle_with(
    p: &Polynomial,
    h: Relaxation,
    points: &[Complex64],
    opts: &CheckOptions,
) -> CycleReport {
    let n = points.len();
    let diam = diameter(points);
    let closure_cutoff = opts.closure_tol * if n > 1 { diam } else { 1.0 };
    let distinct = n > 0 && first_coincidence(points, DEFAULT_SEPARATION).is_none();

    let scale = p.max_coeff();
    let deg = p.degree() as i32;
    let root_clearance = points
        .iter()
        .map(|&z| p.eval(z).norm())
        .fold(f64::INFINITY, f64::min);
    let root_clear = points
        .iter()
        .all(|&z| p.eval(z).norm() > ROOT_CLEARANCE_REL * scale * z.norm().max(1.0).powi(deg));

    let (closure_errors, mult) = match NewtonMap::new(p, h) {
        Ok(map) => {
            let errors = (0..n)
                .map(|i| match map.step(points[i]) {
                    Ok(w) => (w - points[(i + 1) % n]).norm(),
                    Err(_) => f64::INFINITY,
                })
                .collect();
            let mult = points
                .iter()
                .try_fold(Complex64::new(1.0, 0.0), |acc, &z| {
                    map.derivative(z).map(|d| acc * d)
                })
                .unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            (errors, mult)
        }
        Err(_) => (vec![f64::INFINITY; n], Complex64::new(f64::NAN, f64::NAN)),
    };

    let multiplier_abs = mult.norm();
    let super_attracting = distinct
        && root_clear
        && closure_errors.iter().all(|&e| e < closure_cutoff)
        && multiplier_abs < opts.multiplier_tol;

    CycleReport {
        closure_errors,
        multiplier: mult,
        multiplier_abs,
        root_clearance,
        distinct,
        super_attracting,
        closure_cutoff,
        multiplier_tol: opts.multiplier_tol,
        root_clear,
    }
}
