//! Time-frequency analysis through symplectic projections.
//!
//! The crate revolves around one object: for a `4d x 4d` symplectic matrix
//! `A`, the distribution `W_A(f, g) = Â(f ⊗ conj(g))` obtained by applying the
//! metaplectic operator of `A` to the tensor product of two signals. Classical
//! time-frequency representations (Wigner, spectrogram, Rihaczek, ambiguity,
//! …) are the special cases where `A` is one of a handful of named matrices.
//!
//! Modules:
//! - [`symplectic`]: block matrices, named projections, derived blocks,
//!   structural predicates (free / covariant / shift-invertible).
//! - [`engine`]: generator factorization and its discrete action on sampled
//!   signals and grids.
//! - [`gaussian`]: closed-form metaplectic action on generalized Gaussians —
//!   the exact oracle behind the numerics.
//! - [`distributions`]: direct grid evaluators for the named distributions,
//!   the general matrix path, and their cross-checks.
//! - [`frames`]: Gabor systems deformed by a projection, frame bounds, dual
//!   windows, reconstruction, and the inversion integral.
//! - [`modspaces`]: mixed-norm measurements of distribution grids and norm
//!   equivalence diagnostics.
//! - [`verify`]: the acceptance criteria bundled as runnable suites.

pub use nalgebra;
pub use num_complex;

pub mod distributions;
pub mod engine;
pub mod error;
pub mod frames;
pub mod gaussian;
pub mod io;
pub mod modspaces;
pub mod random;
pub mod symplectic;
pub mod verify;

pub use engine::{
    apply_1d, apply_1d_inverse, apply_2d, apply_2d_inverse, centered_dft, centered_idft,
    factorize, phase_blind_compare, relative_l2_error, Factorization, Generator, Grid2,
    PhaseBlind, SampledSignal,
};
pub use error::{Error, Result};
pub use symplectic::{
    ambiguity_projection, classify, composite_projection, covariant_projection, derived_blocks,
    hbar_projection, is_covariant, is_free, is_shift_invertible, stft_projection, tau_projection,
    tensor_embed, BlockSymplectic, ClassificationReport, DerivedBlocks,
};
