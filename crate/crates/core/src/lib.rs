//! Polynomials whose Newton maps (plain or relaxed) carry prescribed
//! super-attracting cycles.
//!
//! * [`synthesis`] builds the homogeneous system for a given cycle and reads a
//!   polynomial of degree at most `n + 1` off its nullspace.
//! * [`family`] produces real degree-`d` polynomials with a real `n`-cycle
//!   `{0, 1, z_3, ..., z_n}` through a bracketed search on a rational family.
//! * [`sharpness`] certifies that the roots-of-unity cycle needs degree `n + 1`.
//! * [`verify`] independently checks closure and multiplier of a claimed cycle.
//! * [`render`] classifies a pixel grid by Newton attractor and writes PPM.
//!
//! The `parallel` feature (on by default) lets rendering and the degree sweep
//! run on rayon; results are identical to the sequential path.

// `!(x < tol)` is deliberate: NaN must fail a check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod family;
pub mod json;
pub mod linalg;
pub mod poly;
pub mod render;
pub mod sharpness;
pub mod synthesis;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use poly::{NewtonMap, Polynomial, Relaxation, Tolerances};
pub use synthesis::{AffineMap, Cycle, CycleMatrix};
pub use verify::CycleReport;
