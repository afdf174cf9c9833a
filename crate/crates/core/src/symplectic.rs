//! Block-symplectic matrices and their classification.
//!
//! A matrix here is always real, of size `2n x 2n` with `n = d` (an operator
//! matrix acting on phase space `R^{2d}`) or `n = 2d` (a projection matrix for
//! a two-window distribution on `R^{2d} x R^{2d}`). The symplectic form is
//! `J = [[0, I], [-I, 0]]` and symplecticity means `MᵀJM = J`.
//!
//! Besides the named projections (short-time Fourier, τ-family, ħ-family,
//! composites) the module computes the derived blocks
//!
//! ```text
//! E_A = [[A11, A13], [A21, A23]]          shift block
//! B_A = [[A13, I/2 - A11], [I/2 - A11ᵀ, -A21]]   Cohen kernel (covariant A)
//! M_A = [[A11ᵀA31 + A21ᵀA41, A11ᵀA33 + A21ᵀA43],
//!        [A13ᵀA31 + A23ᵀA41 + I, A13ᵀA33 + A23ᵀA43]]   chirp matrix
//! G_A = [[0, I], [I, 0]] · E_A⁻¹ · [[A12, A14], [A22, A24]]   window deformation
//! ```
//!
//! where `Aij` are the `d x d` blocks of the `4d x 4d` projection.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Default tolerance for the symplecticity residual `max|MᵀJM - J|`.
pub const SYMPLECTIC_TOL: f64 = 1e-10;

/// A matrix block is treated as invertible when its smallest singular value
/// exceeds this ratio times the largest one.
pub const SINGULARITY_RATIO: f64 = 1e-10;

/// The standard symplectic form `J` of size `2n x 2n`.
pub fn j_matrix(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, n + k)] = 1.0;
        j[(n + k, k)] = -1.0;
    }
    j
}

/// Rotation `[[cos θ · I, sin θ · I], [-sin θ · I, cos θ · I]]` of size `2n x 2n`.
pub fn rotation_matrix(theta: f64, n: usize) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    let mut r = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        r[(k, k)] = c;
        r[(k, n + k)] = s;
        r[(n + k, k)] = -s;
        r[(n + k, n + k)] = c;
    }
    r
}

/// Max-abs entry of `MᵀJM - J`; zero exactly when `M` is symplectic.
pub fn symplectic_residual(m: &DMatrix<f64>) -> f64 {
    let rows = m.nrows();
    if rows != m.ncols() || rows % 2 != 0 {
        return f64::INFINITY;
    }
    let j = j_matrix(rows / 2);
    (m.transpose() * &j * m - j).amax()
}

/// True when `max|MᵀJM - J| <= tol`.
pub fn symplectic_check(m: &DMatrix<f64>, tol: f64) -> bool {
    symplectic_residual(m) <= tol
}

fn smallest_largest_singular(m: &DMatrix<f64>) -> (f64, f64) {
    let sv = m.clone().svd(false, false).singular_values;
    let largest = sv.iter().cloned().fold(0.0_f64, f64::max);
    let smallest = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    (smallest, largest)
}

/// Scale-free invertibility test: smallest singular value must exceed
/// [`SINGULARITY_RATIO`] times the largest.
pub fn is_invertible(m: &DMatrix<f64>) -> bool {
    let (smallest, largest) = smallest_largest_singular(m);
    largest > 0.0 && smallest > SINGULARITY_RATIO * largest
}

/// A validated real symplectic matrix of size `2n x 2n` with `n ∈ {d, 2d}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSymplectic {
    d: usize,
    mat: DMatrix<f64>,
}

impl BlockSymplectic {
    /// Validates squareness, the block size (`2d` or `4d`), the symplecticity
    /// residual at [`SYMPLECTIC_TOL`] and `|det - 1| <= 1e-9`.
    pub fn new(mat: DMatrix<f64>, d: usize) -> Result<Self> {
        Self::with_tol(mat, d, SYMPLECTIC_TOL)
    }

    /// As [`BlockSymplectic::new`] with an explicit symplecticity tolerance.
    pub fn with_tol(mat: DMatrix<f64>, d: usize, tol: f64) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        if d == 0 || (mat.nrows() != 2 * d && mat.nrows() != 4 * d) {
            return Err(Error::BadBlockSize {
                size: mat.nrows(),
                d,
            });
        }
        let residual = symplectic_residual(&mat);
        if residual > tol {
            return Err(Error::NotSymplectic { residual, tol });
        }
        let det = mat.determinant();
        if (det - 1.0).abs() > 1e-9 {
            return Err(Error::NotSymplectic {
                residual: (det - 1.0).abs(),
                tol: 1e-9,
            });
        }
        Ok(Self { d, mat })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Full matrix size `2n`.
    pub fn size(&self) -> usize {
        self.mat.nrows()
    }

    /// Half size `n`: generators produced by a factorization act on `R^n`.
    pub fn half(&self) -> usize {
        self.mat.nrows() / 2
    }

    /// 1 for a `2d x 2d` operator matrix, 2 for a `4d x 4d` projection.
    pub fn level(&self) -> usize {
        self.mat.nrows() / (2 * self.d)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    /// The `d x d` block in block-row `i`, block-column `j` (zero-indexed).
    pub fn block(&self, i: usize, j: usize) -> DMatrix<f64> {
        let d = self.d;
        self.mat.view((i * d, j * d), (d, d)).into_owned()
    }

    /// The half-size blocks `(A, B, C, D)` of `[[A, B], [C, D]]`.
    pub fn half_blocks(&self) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let n = self.half();
        (
            self.mat.view((0, 0), (n, n)).into_owned(),
            self.mat.view((0, n), (n, n)).into_owned(),
            self.mat.view((n, 0), (n, n)).into_owned(),
            self.mat.view((n, n), (n, n)).into_owned(),
        )
    }

    /// Matrix product `self * rhs` revalidated as symplectic.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        if self.size() != rhs.size() || self.d != rhs.d {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}x{} with {}x{}",
                self.size(),
                self.size(),
                rhs.size(),
                rhs.size()
            )));
        }
        Self::with_tol(self.matrix() * rhs.matrix(), self.d, 1e-8)
    }
}

fn set_block(target: &mut DMatrix<f64>, row: usize, col: usize, block: &DMatrix<f64>) {
    let (r, c) = block.shape();
    target.view_mut((row, col), (r, c)).copy_from(block);
}

fn eye(d: usize) -> DMatrix<f64> {
    DMatrix::identity(d, d)
}

/// Projection of the short-time Fourier transform `V_g f`:
/// `[[I, -I, 0, 0], [0, 0, I, I], [0, 0, 0, -I], [-I, 0, 0, 0]]`.
pub fn stft_projection(d: usize) -> BlockSymplectic {
    let i = eye(d);
    let mut m = DMatrix::zeros(4 * d, 4 * d);
    set_block(&mut m, 0, 0, &i);
    set_block(&mut m, 0, d, &(-&i));
    set_block(&mut m, d, 2 * d, &i);
    set_block(&mut m, d, 3 * d, &i);
    set_block(&mut m, 2 * d, 3 * d, &(-&i));
    set_block(&mut m, 3 * d, 0, &(-&i));
    BlockSymplectic::new(m, d).expect("stft projection is symplectic")
}

/// Projection of the τ-Wigner family; `τ = 1/2` is the Wigner distribution,
/// `τ = 0` the Rihaczek distribution.
pub fn tau_projection(tau: f64, d: usize) -> Result<BlockSymplectic> {
    if !tau.is_finite() {
        return Err(Error::Domain(format!("tau must be finite, got {tau}")));
    }
    let i = eye(d);
    let mut m = DMatrix::zeros(4 * d, 4 * d);
    set_block(&mut m, 0, 0, &(&i * (1.0 - tau)));
    set_block(&mut m, 0, d, &(&i * tau));
    set_block(&mut m, d, 2 * d, &(&i * tau));
    set_block(&mut m, d, 3 * d, &(&i * -(1.0 - tau)));
    set_block(&mut m, 2 * d, 2 * d, &i);
    set_block(&mut m, 2 * d, 3 * d, &i);
    set_block(&mut m, 3 * d, 0, &(-&i));
    set_block(&mut m, 3 * d, d, &i);
    BlockSymplectic::new(m, d)
}

/// Projection of the rescaled STFT
/// `V^ħ_g f(x, ξ) = (2πħ)^{-d/2} e^{2πi xξ/(4πħ)} V_g f(x, ξ/(2πħ))`, `ħ > 0`.
pub fn hbar_projection(hbar: f64, d: usize) -> Result<BlockSymplectic> {
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::Domain(format!("hbar must be positive, got {hbar}")));
    }
    let i = eye(d);
    let a = 2.0 * std::f64::consts::PI * hbar;
    let mut m = DMatrix::zeros(4 * d, 4 * d);
    set_block(&mut m, 0, 0, &i);
    set_block(&mut m, 0, d, &(-&i));
    set_block(&mut m, d, 2 * d, &(&i * a));
    set_block(&mut m, d, 3 * d, &(&i * a));
    set_block(&mut m, 2 * d, 2 * d, &(&i * 0.5));
    set_block(&mut m, 2 * d, 3 * d, &(&i * -0.5));
    set_block(&mut m, 3 * d, 0, &(&i * (-0.5 / a)));
    set_block(&mut m, 3 * d, d, &(&i * (-0.5 / a)));
    BlockSymplectic::new(m, d)
}

/// Projection of the cross-ambiguity function `A(f, g) = e^{iπxξ} V_g f`:
/// a chirp times the STFT projection.
pub fn ambiguity_projection(d: usize) -> BlockSymplectic {
    let ast = stft_projection(d);
    // [[I, 0], [Q, I]] * A_st with Q = [[0, I/2], [I/2, 0]] on R^{2d}.
    let mut chirp = DMatrix::identity(4 * d, 4 * d);
    let half = eye(d) * 0.5;
    set_block(&mut chirp, 2 * d, d, &half);
    set_block(&mut chirp, 3 * d, 0, &half);
    BlockSymplectic::new(chirp * ast.matrix(), d).expect("chirp * A_st is symplectic")
}

/// Projection of the two-window distribution
/// `(id ⊗ Ŝ) T_{M_{1/2}} (Ŝ₁ f ⊗ conj(Ŝ₂ g))` built from three operator
/// matrices `S, S1, S2` of equal dimension.
pub fn composite_projection(
    s: &BlockSymplectic,
    s1: &BlockSymplectic,
    s2: &BlockSymplectic,
) -> Result<BlockSymplectic> {
    let d = s.d();
    for (name, m) in [("S", s), ("S1", s1), ("S2", s2)] {
        if m.level() != 1 || m.d() != d {
            return Err(Error::DimensionMismatch(format!(
                "{name} must be a 2d x 2d operator matrix with d = {d}"
            )));
        }
    }
    let (a, b, c, dd) = s.half_blocks();
    let (a1, b1, c1, d1) = s1.half_blocks();
    let (a2, b2, c2, d2) = s2.half_blocks();

    let mut m = DMatrix::zeros(4 * d, 4 * d);
    // Row 1: [A1/2, A2/2, B1/2, -B2/2]
    set_block(&mut m, 0, 0, &(&a1 * 0.5));
    set_block(&mut m, 0, d, &(&a2 * 0.5));
    set_block(&mut m, 0, 2 * d, &(&b1 * 0.5));
    set_block(&mut m, 0, 3 * d, &(&b2 * -0.5));
    // Row 2: [AA1 + BC1/2, -AA2 + BC2/2, AB1 + BD1/2, AB2 - BD2/2]
    set_block(&mut m, d, 0, &(&a * &a1 + &b * &c1 * 0.5));
    set_block(&mut m, d, d, &(-(&a * &a2) + &b * &c2 * 0.5));
    set_block(&mut m, d, 2 * d, &(&a * &b1 + &b * &d1 * 0.5));
    set_block(&mut m, d, 3 * d, &(&a * &b2 - &b * &d2 * 0.5));
    // Row 3: [C1, -C2, D1, D2]
    set_block(&mut m, 2 * d, 0, &c1);
    set_block(&mut m, 2 * d, d, &(-&c2));
    set_block(&mut m, 2 * d, 2 * d, &d1);
    set_block(&mut m, 2 * d, 3 * d, &d2);
    // Row 4: [CA1 + DC1/2, -CA2 + DC2/2, CB1 + DD1/2, CB2 - DD2/2]
    set_block(&mut m, 3 * d, 0, &(&c * &a1 + &dd * &c1 * 0.5));
    set_block(&mut m, 3 * d, d, &(-(&c * &a2) + &dd * &c2 * 0.5));
    set_block(&mut m, 3 * d, 2 * d, &(&c * &b1 + &dd * &d1 * 0.5));
    set_block(&mut m, 3 * d, 3 * d, &(&c * &b2 - &dd * &d2 * 0.5));

    BlockSymplectic::with_tol(m, d, 1e-10)
}

/// Projection of `id ⊗ Ŝ` acting on `R^{2d} x R^{2d}` in coordinates
/// `(x1, x2, ξ1, ξ2)`: `[[I,0,0,0], [0,A,0,B], [0,0,I,0], [0,C,0,D]]`.
pub fn tensor_embed(s: &BlockSymplectic) -> Result<BlockSymplectic> {
    if s.level() != 1 {
        return Err(Error::DimensionMismatch(
            "tensor_embed expects a 2d x 2d operator matrix".into(),
        ));
    }
    let d = s.d();
    let (a, b, c, dd) = s.half_blocks();
    let i = eye(d);
    let mut m = DMatrix::zeros(4 * d, 4 * d);
    set_block(&mut m, 0, 0, &i);
    set_block(&mut m, d, d, &a);
    set_block(&mut m, d, 3 * d, &b);
    set_block(&mut m, 2 * d, 2 * d, &i);
    set_block(&mut m, 3 * d, d, &c);
    set_block(&mut m, 3 * d, 3 * d, &dd);
    BlockSymplectic::with_tol(m, d, 1e-10)
}

/// The blocks derived from a `4d x 4d` projection.
#[derive(Clone, Debug)]
pub struct DerivedBlocks {
    /// `E_A`, the `2d x 2d` shift block; the projection is shift-invertible
    /// exactly when this passes the singularity threshold.
    pub e: DMatrix<f64>,
    /// `B_A`, the Cohen-kernel matrix; present only for covariant projections.
    pub b: Option<DMatrix<f64>>,
    /// `M_A`, the symmetric chirp matrix of the rescaled-STFT identity.
    pub m: DMatrix<f64>,
    /// `G_A`, the window-deformation matrix; present when `E_A` is invertible.
    pub g: Option<DMatrix<f64>>,
}

/// Computes `E_A`, `B_A`, `M_A`, `G_A` from a `4d x 4d` projection.
pub fn derived_blocks(a: &BlockSymplectic) -> Result<DerivedBlocks> {
    if a.level() != 2 {
        return Err(Error::DimensionMismatch(
            "derived blocks need a 4d x 4d projection".into(),
        ));
    }
    let d = a.d();
    let b = |i, j| a.block(i, j);

    let mut e = DMatrix::zeros(2 * d, 2 * d);
    set_block(&mut e, 0, 0, &b(0, 0));
    set_block(&mut e, 0, d, &b(0, 2));
    set_block(&mut e, d, 0, &b(1, 0));
    set_block(&mut e, d, d, &b(1, 2));

    let bmat = if is_covariant(a)? {
        let mut bm = DMatrix::zeros(2 * d, 2 * d);
        let half = eye(d) * 0.5;
        set_block(&mut bm, 0, 0, &b(0, 2));
        set_block(&mut bm, 0, d, &(&half - b(0, 0)));
        set_block(&mut bm, d, 0, &(&half - b(0, 0).transpose()));
        set_block(&mut bm, d, d, &(-b(1, 0)));
        Some(bm)
    } else {
        None
    };

    let (a11, a13, a21, a23) = (b(0, 0), b(0, 2), b(1, 0), b(1, 2));
    let (a31, a33, a41, a43) = (b(2, 0), b(2, 2), b(3, 0), b(3, 2));
    let mut m = DMatrix::zeros(2 * d, 2 * d);
    set_block(&mut m, 0, 0, &(a11.transpose() * &a31 + a21.transpose() * &a41));
    set_block(&mut m, 0, d, &(a11.transpose() * &a33 + a21.transpose() * &a43));
    set_block(
        &mut m,
        d,
        0,
        &(a13.transpose() * &a31 + a23.transpose() * &a41 + eye(d)),
    );
    set_block(&mut m, d, d, &(a13.transpose() * &a33 + a23.transpose() * &a43));
    // Symmetric for every symplectic projection; enforce exactly.
    let m = (&m + m.transpose()) * 0.5;

    let g = if is_invertible(&e) {
        let einv = e
            .clone()
            .try_inverse()
            .ok_or(Error::Singular("E_A inverse"))?;
        let mut rhs = DMatrix::zeros(2 * d, 2 * d);
        set_block(&mut rhs, 0, 0, &b(0, 1));
        set_block(&mut rhs, 0, d, &b(0, 3));
        set_block(&mut rhs, d, 0, &b(1, 1));
        set_block(&mut rhs, d, d, &b(1, 3));
        let mut swap = DMatrix::zeros(2 * d, 2 * d);
        set_block(&mut swap, 0, d, &eye(d));
        set_block(&mut swap, d, 0, &eye(d));
        Some(swap * einv * rhs)
    } else {
        None
    };

    Ok(DerivedBlocks { e, b: bmat, m, g })
}

/// Builds the covariant projection determined by blocks `A11`, `A13`, `A21`
/// (with `A13`, `A21` symmetric):
/// rows `[A11, I-A11, A13, A13]`, `[A21, -A21, I-A11ᵀ, -A11ᵀ]`,
/// `[0, 0, I, I]`, `[-I, I, 0, 0]`.
pub fn covariant_projection(
    a11: &DMatrix<f64>,
    a13: &DMatrix<f64>,
    a21: &DMatrix<f64>,
) -> Result<BlockSymplectic> {
    let d = a11.nrows();
    for (name, m) in [("A11", a11), ("A13", a13), ("A21", a21)] {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch(format!("{name} must be {d} x {d}")));
        }
    }
    for (name, m) in [("A13", a13), ("A21", a21)] {
        if (m - m.transpose()).amax() > 1e-12 * (1.0 + m.amax()) {
            return Err(Error::Domain(format!("{name} must be symmetric")));
        }
    }
    let i = eye(d);
    let mut m = DMatrix::zeros(4 * d, 4 * d);
    set_block(&mut m, 0, 0, a11);
    set_block(&mut m, 0, d, &(&i - a11));
    set_block(&mut m, 0, 2 * d, a13);
    set_block(&mut m, 0, 3 * d, a13);
    set_block(&mut m, d, 0, a21);
    set_block(&mut m, d, d, &(-a21));
    set_block(&mut m, d, 2 * d, &(&i - a11.transpose()));
    set_block(&mut m, d, 3 * d, &(-a11.transpose()));
    set_block(&mut m, 2 * d, 2 * d, &i);
    set_block(&mut m, 2 * d, 3 * d, &i);
    set_block(&mut m, 3 * d, 0, &(-&i));
    set_block(&mut m, 3 * d, d, &i);
    BlockSymplectic::with_tol(m, d, 1e-10)
}

/// True when the projection matches the covariant template: `A13`, `A21`
/// symmetric and the matrix equal to [`covariant_projection`] of its own
/// `A11, A13, A21` blocks.
pub fn is_covariant(a: &BlockSymplectic) -> Result<bool> {
    if a.level() != 2 {
        return Err(Error::DimensionMismatch(
            "covariance applies to 4d x 4d projections".into(),
        ));
    }
    let (a11, a13, a21) = (a.block(0, 0), a.block(0, 2), a.block(1, 0));
    let tol = 1e-9 * (1.0 + a.matrix().amax());
    if (&a13 - a13.transpose()).amax() > tol || (&a21 - a21.transpose()).amax() > tol {
        return Ok(false);
    }
    let template = match covariant_projection(&a11, &a13, &a21) {
        Ok(t) => t,
        Err(_) => return Ok(false),
    };
    Ok((a.matrix() - template.matrix()).amax() <= tol)
}

/// True when the shift block `E_A` passes the singularity threshold.
pub fn is_shift_invertible(a: &BlockSymplectic) -> Result<bool> {
    Ok(is_invertible(&derived_blocks(a)?.e))
}

/// True when the upper-right half block `B` of `[[A, B], [C, D]]` passes the
/// singularity threshold (the free case of the generator factorization).
pub fn is_free(s: &BlockSymplectic) -> bool {
    let (_, b, _, _) = s.half_blocks();
    is_invertible(&b)
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Serializable form of [`DerivedBlocks`].
#[derive(Clone, Debug, Serialize)]
pub struct DerivedBlocksReport {
    pub e: Vec<Vec<f64>>,
    pub b: Option<Vec<Vec<f64>>>,
    pub m: Vec<Vec<f64>>,
    pub g: Option<Vec<Vec<f64>>>,
}

impl From<&DerivedBlocks> for DerivedBlocksReport {
    fn from(db: &DerivedBlocks) -> Self {
        Self {
            e: matrix_rows(&db.e),
            b: db.b.as_ref().map(matrix_rows),
            m: matrix_rows(&db.m),
            g: db.g.as_ref().map(matrix_rows),
        }
    }
}

/// Classification of an arbitrary real matrix against the symplectic
/// predicates. Non-symplectic input is reported, not rejected.
#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub d: usize,
    pub size: usize,
    pub symplectic: bool,
    pub residual: f64,
    /// 1 = operator matrix (2d x 2d), 2 = projection (4d x 4d).
    pub level: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub free: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub covariant: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift_invertible: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derived: Option<DerivedBlocksReport>,
}

/// Classifies a matrix: symplecticity always, freeness for `2d x 2d` input,
/// covariance / shift-invertibility / derived blocks for `4d x 4d` input.
pub fn classify(mat: &DMatrix<f64>, d: usize, tol: f64) -> Result<ClassificationReport> {
    if mat.nrows() != mat.ncols() {
        return Err(Error::NotSquare {
            rows: mat.nrows(),
            cols: mat.ncols(),
        });
    }
    if d == 0 || (mat.nrows() != 2 * d && mat.nrows() != 4 * d) {
        return Err(Error::BadBlockSize {
            size: mat.nrows(),
            d,
        });
    }
    let residual = symplectic_residual(mat);
    let symplectic = residual <= tol;
    let level = mat.nrows() / (2 * d);
    let mut report = ClassificationReport {
        d,
        size: mat.nrows(),
        symplectic,
        residual,
        level,
        free: None,
        covariant: None,
        shift_invertible: None,
        derived: None,
    };
    if !symplectic {
        return Ok(report);
    }
    let bs = BlockSymplectic::with_tol(mat.clone(), d, tol.max(1e-9))?;
    if level == 1 {
        report.free = Some(is_free(&bs));
    } else {
        report.covariant = Some(is_covariant(&bs)?);
        report.shift_invertible = Some(is_shift_invertible(&bs)?);
        report.derived = Some(DerivedBlocksReport::from(&derived_blocks(&bs)?));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(m: &DMatrix<f64>, expected: &DMatrix<f64>, tol: f64) {
        assert!(
            (m - expected).amax() <= tol,
            "matrices differ by {:.3e}:\n{m}\nvs\n{expected}",
            (m - expected).amax()
        );
    }

    #[test]
    fn test_named_projections_are_symplectic() {
        for d in [1usize, 2] {
            assert!(symplectic_check(stft_projection(d).matrix(), 1e-12));
            assert!(symplectic_check(ambiguity_projection(d).matrix(), 1e-12));
            for tau in [0.0, 0.3, 0.5, 1.0] {
                assert!(symplectic_check(
                    tau_projection(tau, d).unwrap().matrix(),
                    1e-12
                ));
            }
            for hbar in [0.05, 1.0 / (2.0 * std::f64::consts::PI), 2.0] {
                assert!(symplectic_check(
                    hbar_projection(hbar, d).unwrap().matrix(),
                    1e-12
                ));
            }
        }
    }

    #[test]
    fn test_hbar_requires_positive_parameter() {
        assert!(hbar_projection(0.0, 1).is_err());
        assert!(hbar_projection(-1.0, 1).is_err());
    }

    #[test]
    fn test_tau_half_matches_wigner_projection() {
        let a = tau_projection(0.5, 1).unwrap();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.5, 0.5, 0.0, 0.0, //
                0.0, 0.0, 0.5, -0.5, //
                0.0, 0.0, 1.0, 1.0, //
                -1.0, 1.0, 0.0, 0.0,
            ],
        );
        assert_close(a.matrix(), &expected, 1e-15);
    }

    #[test]
    fn test_hbar_at_one_over_two_pi_is_ambiguity_projection() {
        let h = hbar_projection(1.0 / (2.0 * std::f64::consts::PI), 1).unwrap();
        let amb = ambiguity_projection(1);
        assert_close(h.matrix(), amb.matrix(), 1e-14);
    }

    #[test]
    fn test_composite_of_fourier_and_identities_is_wigner_projection() {
        let d = 1;
        let j = BlockSymplectic::new(j_matrix(d), d).unwrap();
        let id = BlockSymplectic::new(DMatrix::identity(2 * d, 2 * d), d).unwrap();
        let a = composite_projection(&j, &id, &id).unwrap();
        let wigner = tau_projection(0.5, d).unwrap();
        assert_close(a.matrix(), wigner.matrix(), 1e-14);
    }

    #[test]
    fn test_tensor_embed_of_fourier() {
        let d = 1;
        let j = BlockSymplectic::new(j_matrix(d), d).unwrap();
        let e = tensor_embed(&j).unwrap();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, -1.0, 0.0, 0.0,
            ],
        );
        assert_close(e.matrix(), &expected, 1e-15);
    }

    #[test]
    fn test_stft_derived_blocks() {
        let a = stft_projection(1);
        let db = derived_blocks(&a).unwrap();
        assert_close(&db.e, &DMatrix::identity(2, 2), 1e-14);
        assert_close(&db.m, &DMatrix::zeros(2, 2), 1e-14);
        let g = db.g.unwrap();
        assert_close(&g, &j_matrix(1), 1e-14);
        // B_A exists only for covariant projections; A_st is not covariant.
        assert!(db.b.is_none());
    }

    #[test]
    fn test_stft_is_not_covariant_but_shift_invertible() {
        let a = stft_projection(1);
        assert!(!is_covariant(&a).unwrap());
        assert!(is_shift_invertible(&a).unwrap());
    }

    #[test]
    fn test_tau_derived_blocks() {
        let tau = 0.3;
        let a = tau_projection(tau, 1).unwrap();
        let db = derived_blocks(&a).unwrap();
        assert_close(
            &db.e,
            &DMatrix::from_row_slice(2, 2, &[1.0 - tau, 0.0, 0.0, tau]),
            1e-14,
        );
        assert_close(
            &db.m,
            &DMatrix::from_row_slice(2, 2, &[0.0, 1.0 - tau, 1.0 - tau, 0.0]),
            1e-14,
        );
        let b = db.b.unwrap();
        assert_close(
            &b,
            &DMatrix::from_row_slice(2, 2, &[0.0, tau - 0.5, tau - 0.5, 0.0]),
            1e-14,
        );
        let g = db.g.unwrap();
        assert!(symplectic_check(&g, 1e-12));
        assert_close(
            &g,
            &DMatrix::from_row_slice(2, 2, &[0.0, -(1.0 - tau) / tau, tau / (1.0 - tau), 0.0]),
            1e-14,
        );
    }

    #[test]
    fn test_wigner_projection_blocks() {
        let a = tau_projection(0.5, 1).unwrap();
        let db = derived_blocks(&a).unwrap();
        let b = db.b.unwrap();
        assert_close(&b, &DMatrix::zeros(2, 2), 1e-14);
        assert_close(
            &db.m,
            &DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]),
            1e-14,
        );
        let g = db.g.unwrap();
        assert_close(&g, &DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]), 1e-14);
    }

    #[test]
    fn test_tau_family_is_covariant() {
        for tau in [0.0, 0.25, 0.5, 1.0] {
            let a = tau_projection(tau, 1).unwrap();
            assert!(is_covariant(&a).unwrap(), "tau = {tau}");
        }
        for tau in [0.1, 0.5, 0.9] {
            let a = tau_projection(tau, 2).unwrap();
            assert!(is_covariant(&a).unwrap(), "tau = {tau}, d = 2");
        }
    }

    #[test]
    fn test_shift_invertibility_of_tau_family() {
        assert!(is_shift_invertible(&tau_projection(0.3, 1).unwrap()).unwrap());
        // τ = 0 and τ = 1 degenerate: E = diag(1, 0) or diag(0, 1).
        assert!(!is_shift_invertible(&tau_projection(0.0, 1).unwrap()).unwrap());
        assert!(!is_shift_invertible(&tau_projection(1.0, 1).unwrap()).unwrap());
    }

    #[test]
    fn test_hbar_derived_blocks() {
        let hbar = 0.7;
        let a = hbar_projection(hbar, 1).unwrap();
        let db = derived_blocks(&a).unwrap();
        let tp = 2.0 * std::f64::consts::PI * hbar;
        assert_close(&db.e, &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, tp]), 1e-12);
        assert!(is_shift_invertible(&a).unwrap());
    }

    #[test]
    fn test_composite_with_b_zero_is_not_shift_invertible() {
        let d = 1;
        let id = BlockSymplectic::new(DMatrix::identity(2, 2), d).unwrap();
        let a = composite_projection(&id, &id, &id).unwrap();
        assert!(!is_shift_invertible(&a).unwrap());
    }

    #[test]
    fn test_composite_shift_block_factored_form() {
        // E of the composite must equal (1/2) [[I, 0], [2A, B]] S1, the
        // factored form consistent with the projection's own blocks.
        let d = 1;
        let s = BlockSymplectic::new(
            DMatrix::from_row_slice(2, 2, &[0.8, 0.5, -0.4, 1.0]),
            d,
        )
        .unwrap();
        let s1 = BlockSymplectic::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.7, 1.0]),
            d,
        )
        .unwrap();
        let s2 = BlockSymplectic::new(
            DMatrix::from_row_slice(2, 2, &[1.3, 0.0, 0.0, 1.0 / 1.3]),
            d,
        )
        .unwrap();
        let comp = composite_projection(&s, &s1, &s2).unwrap();
        let db = derived_blocks(&comp).unwrap();
        let (a, b, _, _) = s.half_blocks();
        let mut factor = DMatrix::zeros(2, 2);
        factor[(0, 0)] = 1.0;
        factor[(1, 0)] = 2.0 * a[(0, 0)];
        factor[(1, 1)] = b[(0, 0)];
        let expected = factor * s1.matrix() * 0.5;
        assert_close(&db.e, &expected, 1e-12);
    }

    #[test]
    fn test_classify_accepts_non_symplectic() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let r = classify(&m, 1, SYMPLECTIC_TOL).unwrap();
        assert!(!r.symplectic);
        assert!(r.free.is_none());
    }

    #[test]
    fn test_classify_levels() {
        let r = classify(&j_matrix(1), 1, SYMPLECTIC_TOL).unwrap();
        assert_eq!(r.level, 1);
        assert_eq!(r.free, Some(true));

        let r2 = classify(stft_projection(1).matrix(), 1, SYMPLECTIC_TOL).unwrap();
        assert_eq!(r2.level, 2);
        assert_eq!(r2.covariant, Some(false));
        assert_eq!(r2.shift_invertible, Some(true));
        assert!(r2.derived.is_some());
    }

    #[test]
    fn test_rotation_is_symplectic() {
        for n in [1usize, 2] {
            for theta in [0.1, std::f64::consts::FRAC_PI_4, 1.3] {
                assert!(symplectic_check(&rotation_matrix(theta, n), 1e-14));
            }
        }
    }
}
