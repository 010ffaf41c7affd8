//! Real degree-`d` polynomials with a real super-attracting `n`-cycle.
//!
//! The Newton map of `p_c(z) = z^d - (d-1)c^d z + (d-1)c^d` is the real
//! rational map
//!
//! ```text
//! f_c(x) = ((d-1)c^d - (d-1)x^d) / ((d-1)c^d - d x^(d-1))
//! ```
//!
//! with `f_c(0) = 1`. Writing `Q_k(c) = f_c^k(0)`, a parameter with
//! `Q_n(c) = 0` puts `0` on an `n`-cycle. The minimal positive roots
//! `c_k` of `y^d = Q_k(y)^d` and `b_k` of `(d-1)y^d = d Q_k(y)^(d-1)` interleave,
//! `0 < ... < c_k < b_k < c_{k-1} < ... < c_1 = 1 < b_1`, and `c = c_{n-1}`
//! yields the cycle `{0, 1, z_3, ..., z_n = c}`.
//!
//! Minimal roots are located by a uniform scan followed by bisection, so
//! minimality is only certified up to the scan resolution.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::synthesis::Cycle;

/// Denominators below this (relative) size count as poles.
const POLE_TOL: f64 = 1e-13;
const INITIAL_SCAN: usize = 4096;
const MAX_SCAN: usize = 1 << 20;
const BISECT_TOL: f64 = 1e-14;
const INTERLEAVE_MARGIN: f64 = 1e-12;
/// Absolute tolerance on `|f_c^n(0)|` for an emitted cycle.
pub const CLOSURE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyParams {
    pub d: usize,
    pub c: f64,
}

impl FamilyParams {
    pub fn new(d: usize, c: f64) -> Result<Self> {
        if d < 3 {
            return Err(Error::InvalidInput(format!(
                "degree must be at least 3, got {d}"
            )));
        }
        if !c.is_finite() || c == 0.0 {
            return Err(Error::InvalidInput(
                "parameter c must be finite and nonzero".into(),
            ));
        }
        Ok(Self { d, c })
    }

    /// Vertical asymptote of `f_c` on the positive axis, `((d-1)/d)^(1/(d-1)) c^(d/(d-1))`.
    pub fn pole_location(&self) -> f64 {
        let d = self.d as f64;
        ((d - 1.0) / d).powf(1.0 / (d - 1.0)) * self.c.abs().powf(d / (d - 1.0))
    }
}

/// `f_c(x)`.
pub fn f_c(params: &FamilyParams, x: f64) -> Result<f64> {
    let d = params.d as i32;
    let dm1 = f64::from(d - 1);
    let cd = params.c.powi(d);
    let den = dm1 * cd - f64::from(d) * x.powi(d - 1);
    if den.abs() < POLE_TOL * dm1 * cd.abs().max(1.0) {
        return Err(Error::RealPole { at: x, index: 1 });
    }
    Ok(dm1 * (cd - x.powi(d)) / den)
}

/// `[Q_1(c), ..., Q_n(c)]` where `Q_1 = 1` and
/// `Q_{i+1} = (c^d - Q_i^d) / (c^d - (d/(d-1)) Q_i^(d-1))`.
///
/// At `c = 0` the continuous extension `((d-1)/d)^(k-1)` is returned.
pub fn q_sequence(d: usize, c: f64, n: usize) -> Result<Vec<f64>> {
    if d < 3 {
        return Err(Error::InvalidInput(format!(
            "degree must be at least 3, got {d}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidInput(
            "sequence length must be at least 1".into(),
        ));
    }
    let df = d as f64;
    if c == 0.0 {
        let ratio = (df - 1.0) / df;
        return Ok((0..n).map(|k| ratio.powi(k as i32)).collect());
    }
    let di = d as i32;
    let cd = c.powi(di);
    let guard = POLE_TOL * cd.abs().max(1.0);
    let ratio = df / (df - 1.0);
    let mut out = Vec::with_capacity(n);
    let mut q: f64 = 1.0;
    out.push(q);
    for i in 1..n {
        let den = cd - ratio * q.powi(di - 1);
        if den.abs() < guard {
            return Err(Error::RealPole {
                at: c,
                index: i + 1,
            });
        }
        q = (cd - q.powi(di)) / den;
        out.push(q);
    }
    Ok(out)
}

fn q_last(d: usize, c: f64, k: usize) -> Result<f64> {
    Ok(*q_sequence(d, c, k)?.last().expect("k >= 1"))
}

/// Interleaved minimal roots `c_k`, `b_k` for `k = 1..=k_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketTable {
    pub d: usize,
    #[serde(rename = "c")]
    pub c_seq: Vec<f64>,
    #[serde(rename = "b")]
    pub b_seq: Vec<f64>,
}

impl BracketTable {
    /// `c_k` with 1-based `k`.
    pub fn c(&self, k: usize) -> f64 {
        self.c_seq[k - 1]
    }

    pub fn b(&self, k: usize) -> f64 {
        self.b_seq[k - 1]
    }

    /// The chain `b_1 > c_1 > b_2 > c_2 > ...`, largest first.
    pub fn chain(&self) -> Vec<f64> {
        self.b_seq
            .iter()
            .zip(&self.c_seq)
            .flat_map(|(&b, &c)| [b, c])
            .collect()
    }

    /// Smallest gap in the chain `0 < ... < c_k < b_k < ... < c_1 < b_1`.
    pub fn interleaving_margin(&self) -> f64 {
        let chain = self.chain();
        let gaps = chain.windows(2).map(|w| w[0] - w[1]);
        gaps.chain(std::iter::once(*chain.last().unwrap()))
            .fold(f64::INFINITY, f64::min)
    }
}

enum Bisection {
    Root(f64),
    /// The sign change came from a pole, not a root.
    Pole,
}

fn bisect<F: Fn(f64) -> Result<f64>>(
    f: &F,
    mut lo: f64,
    mut hi: f64,
    mut flo: f64,
    fhi: f64,
) -> Bisection {
    let bound = flo.abs().max(fhi.abs());
    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let Ok(fm) = f(mid) else {
            return Bisection::Pole;
        };
        if fm == 0.0 {
            return Bisection::Root(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    match f(root) {
        // across a pole the function grows without bound instead of shrinking
        Ok(v) if v.abs() <= bound => Bisection::Root(root),
        _ => Bisection::Pole,
    }
}

/// First root found scanning `[lo, hi]` on `n` uniform subintervals, skipping
/// subintervals that touch a pole.
fn first_root_at<F: Fn(f64) -> Result<f64>>(f: &F, lo: f64, hi: f64, n: usize) -> Option<f64> {
    let step = (hi - lo) / n as f64;
    let mut prev: Option<(f64, f64)> = f(lo).ok().map(|v| (lo, v));
    if let Some((_, v)) = prev {
        if v == 0.0 {
            return Some(lo);
        }
    }
    for i in 1..=n {
        let y = if i == n { hi } else { lo + step * i as f64 };
        let cur = f(y).ok();
        if let (Some((py, pv)), Some(v)) = (prev, cur) {
            if v == 0.0 {
                return Some(y);
            }
            if (pv < 0.0) != (v < 0.0) {
                if let Bisection::Root(r) = bisect(f, py, y, pv, v) {
                    return Some(r);
                }
            }
        }
        prev = cur.map(|v| (y, v));
    }
    None
}

/// Minimal root of `f` in `[lo, hi]`. The scan resolution doubles until two
/// consecutive resolutions agree on the first root.
fn minimal_root<F: Fn(f64) -> Result<f64>>(f: F, lo: f64, hi: f64, what: &str) -> Result<f64> {
    let mut n = INITIAL_SCAN;
    let mut last = first_root_at(&f, lo, hi, n);
    while n < MAX_SCAN {
        n *= 2;
        let next = first_root_at(&f, lo, hi, n);
        match (last, next) {
            (Some(a), Some(b)) if (a - b).abs() <= 4.0 * BISECT_TOL => return Ok(b.min(a)),
            _ => last = next,
        }
    }
    Err(Error::BracketFailure(format!(
        "no stable sign change for {what} in [{lo}, {hi}] after {MAX_SCAN} subintervals"
    )))
}

/// Computes `c_1..c_{k_max}` and `b_1..b_{k_max}`.
pub fn find_brackets(d: usize, k_max: usize) -> Result<BracketTable> {
    if d < 3 {
        return Err(Error::InvalidInput(format!(
            "degree must be at least 3, got {d}"
        )));
    }
    if k_max == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    let df = d as f64;
    let di = d as i32;
    let mut c_seq = vec![1.0];
    let mut b_seq = vec![(df / (df - 1.0)).powf(1.0 / df)];

    for k in 2..=k_max {
        let c_prev = c_seq[k - 2];
        let g = |y: f64| -> Result<f64> {
            let q = q_last(d, y, k)?;
            Ok((df - 1.0) * y.powi(di) - df * q.powi(di - 1))
        };
        let b_k = minimal_root(g, 0.0, c_prev, &format!("b_{k}"))?;
        let h = |y: f64| -> Result<f64> {
            let q = q_last(d, y, k)?;
            Ok(y.powi(di) - q.powi(di))
        };
        let c_k = minimal_root(h, 0.0, b_k, &format!("c_{k}"))?;
        b_seq.push(b_k);
        c_seq.push(c_k);
    }

    let table = BracketTable { d, c_seq, b_seq };
    let margin = table.interleaving_margin();
    if !(margin > INTERLEAVE_MARGIN) {
        return Err(Error::BracketFailure(format!(
            "interleaving margin {margin:e} at or below {INTERLEAVE_MARGIN:e}"
        )));
    }
    Ok(table)
}

/// Real cycle `0 = z_1, 1 = z_2, z_3, ..., z_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealCycle {
    pub points: Vec<f64>,
}

impl RealCycle {
    pub fn to_cycle(&self) -> Result<Cycle> {
        Cycle::from_real(&self.points)
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.points
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect()
    }
}

/// Checks `0 = z_1 < z_n < z_{n-1} < ... < z_3 < z_2 = 1`.
pub fn check_ordering(points: &[f64]) -> Result<()> {
    let n = points.len();
    if points[0] != 0.0 || points[1] != 1.0 {
        return Err(Error::OrderingViolation(format!(
            "cycle must start 0, 1; got {}, {}",
            points[0], points[1]
        )));
    }
    // walk 1 = z_2 > z_3 > ... > z_n > 0 = z_1
    let mut chain: Vec<f64> = points[1..].to_vec();
    chain.push(0.0);
    for (i, w) in chain.windows(2).enumerate() {
        if !(w[1] < w[0]) {
            return Err(Error::OrderingViolation(format!(
                "z_{} = {} is not below z_{} = {}",
                (i + 3).min(n + 1),
                w[1],
                i + 2,
                w[0]
            )));
        }
    }
    Ok(())
}

/// The real `n`-cycle of `f_c` through `0` for `c = c_{n-1}`.
pub fn build_cycle(d: usize, n: usize) -> Result<(RealCycle, FamilyParams)> {
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "cycle length must be at least 3 here, got {n}; use synthesis for 2-cycles"
        )));
    }
    let table = find_brackets(d, n - 1)?;
    cycle_from_table(&table, n)
}

/// Same as [`build_cycle`] but reuses an existing table with at least `n - 1`
/// entries.
pub fn cycle_from_table(table: &BracketTable, n: usize) -> Result<(RealCycle, FamilyParams)> {
    if n < 3 || table.c_seq.len() < n - 1 {
        return Err(Error::InvalidInput(format!(
            "table of length {} cannot produce a {n}-cycle",
            table.c_seq.len()
        )));
    }
    let d = table.d;
    let params = FamilyParams::new(d, table.c(n - 1))?;
    let qs = q_sequence(d, params.c, n)?;
    let closure = qs[n - 1];
    if !(closure.abs() < CLOSURE_TOL) {
        return Err(Error::BracketFailure(format!(
            "f_c^{n}(0) = {closure:e} does not close the cycle"
        )));
    }
    let mut points = Vec::with_capacity(n);
    points.push(0.0);
    points.extend_from_slice(&qs[..n - 1]);
    let cycle = RealCycle { points };
    check_ordering(&cycle.points)?;
    // strict ordering already implies pairwise distinctness
    Ok((cycle, params))
}

/// `a (z^d - (d-1) c^d z + (d-1) c^d)`.
pub fn family_polynomial(d: usize, c: f64, a: Complex64) -> Result<Polynomial> {
    if d < 2 {
        return Err(Error::InvalidInput(format!(
            "degree must be at least 2, got {d}"
        )));
    }
    if c == 0.0 || !c.is_finite() {
        return Err(Error::InvalidInput(
            "parameter c must be finite and nonzero".into(),
        ));
    }
    if a.norm() == 0.0 {
        return Err(Error::InvalidInput("scale a must be nonzero".into()));
    }
    let k = (d as f64 - 1.0) * c.powi(d as i32);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); d + 1];
    coeffs[0] = a * k;
    coeffs[1] = -a * k;
    coeffs[d] = a;
    Polynomial::new(coeffs)
}
