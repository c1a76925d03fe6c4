use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Construction and precondition failures are distinguished from contract
/// violations: the former mean the input was unusable, the latter that a
/// computed residual exceeded its declared bound.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("pole of the symbol at z = {0}")]
    PoleAtPoint(Complex64),

    #[error("sampled symbol evaluated off its grid at z = {0}")]
    OffGrid(Complex64),

    #[error("denominator root {root} lies within {tol:e} of the unit circle")]
    RootOnCircle { root: Complex64, tol: f64 },

    #[error("grid size {0} must be a power of two and at least 8")]
    BadGrid(usize),

    #[error("sampled symbols live on different grids ({0} vs {1}) and promotion is disabled")]
    GridMismatch(usize, usize),

    #[error("Blaschke zero {0} is not inside the disc |a| <= 1 - tau_disc")]
    ZeroOutsideDisc(Complex64),

    #[error("inner-function constant {0} is not unimodular")]
    NonUnimodularConstant(Complex64),

    #[error("atomic singular mass point {xi} must lie on the circle with positive weight (got weight {mu})")]
    BadAtom { xi: Complex64, mu: f64 },

    #[error("operation requires Fourier coefficients but the symbol has a boundary essential singularity")]
    EssentialSingularity,

    #[error("operation requires a finite Blaschke product")]
    NotFiniteBlaschke,

    #[error("model space of degree 0 has no basis")]
    DegreeZero,

    #[error("{what} is not unimodular: max ||value|-1| = {deviation:e}")]
    NotUnimodular { what: &'static str, deviation: f64 },

    #[error("bands are not orthogonal: max |A^theta_(conj(phi) psi)| entry = {max_entry:e}")]
    NotOrthogonal { max_entry: f64 },

    #[error("degenerate decomposition: {which} is within {distance:e} of a constant multiple of theta")]
    Degenerate { which: &'static str, distance: f64 },

    #[error("supplied A+/A- do not decompose conj(psi) phi: residual {residual:e}")]
    DecompositionMismatch { residual: f64 },

    #[error("{which} fails its analyticity check: tail energy {tail:e}")]
    NotAnalytic { which: String, tail: f64 },

    #[error("A+ and A- are not available for this space")]
    MissingDecomposition,

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("extension cutoff {cutoff} is inadequate: tail energy {tail:e}")]
    CutoffInadequate { cutoff: usize, tail: f64 },

    #[error("input is not in the kernel: residual {residual:e}")]
    NotInKernel { residual: f64 },

    #[error("operator is singular (smallest singular value {sigma_min:e})")]
    Singular { sigma_min: f64 },

    #[error("lambda = {0} is an eigenvalue; no canonical factorization exists")]
    Eigenvalue(Complex64),

    #[error("lambda = {0} is not an eigenvalue")]
    NotAnEigenvalue(Complex64),

    #[error("theta has no angular derivative at {0}")]
    NoAdc(Complex64),

    #[error("theta has no boundary value at {0}")]
    NoBoundaryValue(Complex64),

    #[error("lambda = {0} is outside the region this formula covers")]
    OutOfRegion(Complex64),

    #[error("root finder did not converge from start {0}")]
    NoConvergence(Complex64),

    #[error("R has a zero or pole within tolerance of the circle at {0}")]
    RationalOnCircle(Complex64),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{what}: {value:e} exceeds the bound {bound:e}")]
    Contract { what: String, value: f64, bound: f64 },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
