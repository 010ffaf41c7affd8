use num_complex::Complex64;
use thiserror::Error;

/// Errors raised across the crate.
///
/// Variant names double as the machine-readable reason printed by the CLI,
/// see [`Error::kind`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("Newton map has a pole at {at} (derivative vanishes, value does not)")]
    Pole { at: Complex64 },
    #[error("point {at} is a multiple root: value and derivative both vanish")]
    FixedRoot { at: Complex64 },
    #[error("rational map denominator vanishes at x = {at} (iterate {index})")]
    RealPole { at: f64, index: usize },
    #[error("polynomial is zero or constant where a nonconstant one is required")]
    DegeneratePolynomial,
    #[error("matrix is {rows}x{cols}, expected square")]
    NonSquare { rows: usize, cols: usize },
    #[error("cycle points {i} and {j} coincide within tolerance")]
    Distinctness { i: usize, j: usize },
    #[error("homogeneous system has no nonzero polynomial solution")]
    NoSolution,
    #[error("only constant polynomials solve the system")]
    ConstantSolution,
    #[error("points are not a super-attracting cycle: {0}")]
    NotACycle(String),
    #[error("bracket search failed: {0}")]
    BracketFailure(String),
    #[error("cycle ordering violated: {0}")]
    OrderingViolation(String),
    #[error("rank {found} but expected {expected}; pivot magnitudes {pivots:?}")]
    RankMismatch {
        expected: usize,
        found: usize,
        pivots: Vec<f64>,
    },
    #[error("root finder did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short stable identifier for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Pole { .. } | Error::RealPole { .. } => "PoleError",
            Error::FixedRoot { .. } => "FixedRoot",
            Error::DegeneratePolynomial => "DegeneratePolynomial",
            Error::NonSquare { .. } => "NonSquare",
            Error::Distinctness { .. } => "DistinctnessError",
            Error::NoSolution => "NoSolution",
            Error::ConstantSolution => "ConstantSolution",
            Error::NotACycle(_) => "NotACycle",
            Error::BracketFailure(_) => "BracketFailure",
            Error::OrderingViolation(_) => "OrderingViolation",
            Error::RankMismatch { .. } => "RankMismatch",
            Error::ConvergenceFailure(_) => "ConvergenceFailure",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Io(_) => "IoError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
