//! Crate-wide error type.
//!
//! Every fallible operation in this crate returns [`Result`]. Numerical
//! preconditions (symplecticity, grid compatibility, invertibility) are
//! validated eagerly so that failures carry enough context to act on.

use num_complex::Complex64;

/// Errors produced by the symplectic, oracle, engine, distribution, frame and
/// modulation-space layers.
#[derive(thiserror::Error, Debug)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix size {size} is not 2d or 4d for d = {d}")]
    BadBlockSize { size: usize, d: usize },

    #[error("matrix is not symplectic: residual {residual:.3e} exceeds tolerance {tol:.1e}")]
    NotSymplectic { residual: f64, tol: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("projection is not shift-invertible: E_A fails the singularity threshold")]
    NotShiftInvertible,

    #[error("invalid Gaussian parameters: {0}")]
    InvalidGaussian(String),

    #[error("Gaussian is ill-conditioned: cond(Im Q) = {cond:.3e} exceeds 1e12")]
    IllConditioned { cond: f64 },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("signal length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("sample spacing must be positive, got {0}")]
    BadSpacing(f64),

    #[error("grid is not self-dual: N*dx^2 = {0:.6} (the metaplectic grid path needs N*dx^2 = 1)")]
    NotSelfDual(f64),

    #[error("point ({x}, {xi}) is not on the grid (spacings {dx}, {dxi})")]
    OffGrid { x: f64, xi: f64, dx: f64, dxi: f64 },

    #[error("lattice step {step} is not a positive multiple of the grid spacing {spacing}")]
    BadLatticeStep { step: f64, spacing: f64 },

    #[error("lattice is empty at radius {0}")]
    EmptyLattice(f64),

    #[error(
        "system is not a frame at this truncation: {iterations} CG iterations, \
         residual {residual:.3e}, bound estimates [{lower:.3e}, {upper:.3e}]"
    )]
    NotAFrame {
        iterations: usize,
        residual: f64,
        lower: f64,
        upper: f64,
    },

    #[error("windows ⟨γ, g⟩ are nearly orthogonal (|inner| = {0:.3e}); inversion is unstable")]
    NearOrthogonal(f64),

    #[error(
        "deformation-window paths disagree: phase-blind residual {residual:.3e} exceeds {tol:.1e}; \
         both candidates attached"
    )]
    ConventionMismatch {
        residual: f64,
        tol: f64,
        primary: Box<Vec<Complex64>>,
        validation: Box<Vec<Complex64>>,
    },

    #[error("zero input: {0}")]
    ZeroInput(&'static str),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
