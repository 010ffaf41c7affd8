//! Complex polynomials and their (relaxed) Newton maps.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerances used when deciding that a coefficient or a derivative
/// value is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// A coefficient counts as zero when its modulus is below
    /// `zero_coeff * max |a_k|`.
    pub zero_coeff: f64,
    /// `p'(z)` counts as zero when its modulus is below
    /// `deriv_zero * max(1, |z|)^(d-1) * max |a_k|`.
    pub deriv_zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            zero_coeff: 1e-12,
            deriv_zero: 1e-12,
        }
    }
}

/// A complex polynomial stored as ascending coefficients `a_0, ..., a_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput(
                "polynomial needs at least one coefficient".into(),
            ));
        }
        if coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::InvalidInput(
                "polynomial coefficients must be finite".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    /// Builds a polynomial from real ascending coefficients.
    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn constant(c: Complex64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// `z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = Complex64::new(1.0, 0.0);
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Largest coefficient modulus.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn degree(&self) -> usize {
        self.degree_with(&Tolerances::default())
    }

    /// Index of the last coefficient whose modulus exceeds the zero tolerance.
    /// The zero polynomial reports degree 0.
    pub fn degree_with(&self, tol: &Tolerances) -> usize {
        let cutoff = tol.zero_coeff * self.max_coeff();
        self.coeffs
            .iter()
            .rposition(|c| c.norm() > cutoff)
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.max_coeff() == 0.0
    }

    /// Leading coefficient under the default tolerance.
    pub fn leading(&self) -> Complex64 {
        self.coeffs[self.degree()]
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Self::constant(Complex64::new(0.0, 0.0));
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &a)| a * k as f64)
            .collect();
        Self { coeffs }
    }

    pub fn scale(&self, c: Complex64) -> Polynomial {
        Self {
            coeffs: self.coeffs.iter().map(|&a| a * c).collect(),
        }
    }

    /// Drops trailing coefficients that are zero under the tolerance.
    pub fn trimmed(&self) -> Polynomial {
        Self {
            coeffs: self.coeffs[..=self.degree()].to_vec(),
        }
    }

    /// Rescales so that the leading coefficient is exactly one.
    pub fn monic(&self) -> Result<Polynomial> {
        if self.is_zero() {
            return Err(Error::DegeneratePolynomial);
        }
        let trimmed = self.trimmed();
        let lead = *trimmed.coeffs.last().unwrap();
        let mut coeffs: Vec<_> = trimmed.coeffs.iter().map(|&a| a / lead).collect();
        *coeffs.last_mut().unwrap() = Complex64::new(1.0, 0.0);
        Ok(Self { coeffs })
    }
}

/// Complex damping parameter `h` of the relaxed Newton map `z - h p/p'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Relaxation {
    h: Complex64,
    in_disk: bool,
}

impl Relaxation {
    pub fn new(h: Complex64) -> Result<Self> {
        if !h.re.is_finite() || !h.im.is_finite() {
            return Err(Error::InvalidInput("relaxation must be finite".into()));
        }
        if h == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidInput(
                "relaxation h = 0 turns the Newton map into the identity".into(),
            ));
        }
        Ok(Self {
            h,
            in_disk: (h - 1.0).norm() < 1.0,
        })
    }

    /// Plain Newton, `h = 1`.
    pub fn plain() -> Self {
        Self {
            h: Complex64::new(1.0, 0.0),
            in_disk: true,
        }
    }

    pub fn value(&self) -> Complex64 {
        self.h
    }

    /// Whether `|h - 1| < 1`, the region where roots stay attracting.
    pub fn in_unit_disk(&self) -> bool {
        self.in_disk
    }
}

impl Default for Relaxation {
    fn default() -> Self {
        Self::plain()
    }
}

/// A relaxed Newton map with its first two derivatives precomputed, for
/// repeated evaluation.
#[derive(Debug, Clone)]
pub struct NewtonMap {
    p: Polynomial,
    dp: Polynomial,
    ddp: Polynomial,
    h: Complex64,
    degree: usize,
    scale: f64,
    tol: Tolerances,
}

impl NewtonMap {
    pub fn new(p: &Polynomial, h: Relaxation) -> Result<Self> {
        Self::with_tolerances(p, h, Tolerances::default())
    }

    pub fn with_tolerances(p: &Polynomial, h: Relaxation, tol: Tolerances) -> Result<Self> {
        let degree = p.degree_with(&tol);
        if p.is_zero() || degree == 0 {
            return Err(Error::DegeneratePolynomial);
        }
        let p = Polynomial {
            coeffs: p.coeffs[..=degree].to_vec(),
        };
        let dp = p.derivative();
        let ddp = dp.derivative();
        Ok(Self {
            scale: p.max_coeff(),
            p,
            dp,
            ddp,
            h: h.value(),
            degree,
            tol,
        })
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.p
    }

    fn check_derivative(&self, z: Complex64, pz: Complex64, dpz: Complex64) -> Result<()> {
        let local = z.norm().max(1.0);
        let dthresh = self.tol.deriv_zero * local.powi(self.degree as i32 - 1) * self.scale;
        if dpz.norm() < dthresh {
            let vthresh = self.tol.deriv_zero * local.powi(self.degree as i32) * self.scale;
            if pz.norm() < vthresh {
                return Err(Error::FixedRoot { at: z });
            }
            return Err(Error::Pole { at: z });
        }
        Ok(())
    }

    /// `z - h p(z)/p'(z)`.
    pub fn step(&self, z: Complex64) -> Result<Complex64> {
        let pz = self.p.eval(z);
        let dpz = self.dp.eval(z);
        self.check_derivative(z, pz, dpz)?;
        Ok(z - self.h * pz / dpz)
    }

    /// `1 - h + h p p'' / p'^2`.
    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        let pz = self.p.eval(z);
        let dpz = self.dp.eval(z);
        self.check_derivative(z, pz, dpz)?;
        let ddpz = self.ddp.eval(z);
        Ok(1.0 - self.h + self.h * pz * ddpz / (dpz * dpz))
    }
}

pub fn eval(p: &Polynomial, z: Complex64) -> Complex64 {
    p.eval(z)
}

pub fn derivative(p: &Polynomial) -> Polynomial {
    p.derivative()
}

pub fn newton_step(p: &Polynomial, h: Relaxation, z: Complex64) -> Result<Complex64> {
    NewtonMap::new(p, h)?.step(z)
}

pub fn newton_derivative(p: &Polynomial, h: Relaxation, z: Complex64) -> Result<Complex64> {
    NewtonMap::new(p, h)?.derivative(z)
}
