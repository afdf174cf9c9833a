//! Exact metaplectic action on generalized Gaussians.
//!
//! A generalized Gaussian is `G(x) = c · e^{iπ Qx·x} e^{2πi p·x}` with
//! complex symmetric `Q`, positive-definite `Im Q`, complex center frequency
//! `p`, and complex amplitude `c`. The class is closed under all three
//! metaplectic generators, under complex conjugation, and under tensor
//! products, and has a closed-form inner product — so any generator word can
//! be pushed through exactly, giving machine-precision reference values for
//! the sampled pipeline.
//!
//! The Fourier step uses the Fresnel–Gauss integral
//! `∫ e^{iπQx·x + 2πib·x} dx = det(-iQ)^{-1/2} e^{-iπ Q⁻¹b·b}` with the
//! principal branch of the square root taken on the total determinant at each
//! step. Along a word the accumulated amplitude may therefore differ from the
//! continuum operator's by a fixed unit-modulus constant; every consumer
//! either compares phase-blind or cancels the constant by sending both sides
//! through the same word.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

use crate::engine::{Factorization, Generator, Grid2, SampledSignal};
use crate::error::{Error, Result};
use crate::symplectic::BlockSymplectic;

const IM_Q_CONDITION_LIMIT: f64 = 1e12;

/// `c · e^{iπ Qx·x} e^{2πi p·x}` with `Q = Qᵀ` complex and `Im Q ≻ 0`.
#[derive(Clone, Debug)]
pub struct GeneralizedGaussian {
    pub dim: usize,
    pub q: DMatrix<Complex64>,
    pub p: DVector<Complex64>,
    pub c: Complex64,
}

fn im_part(q: &DMatrix<Complex64>) -> DMatrix<f64> {
    q.map(|z| z.im)
}

fn check_im_positive(q: &DMatrix<Complex64>) -> Result<()> {
    let im = im_part(q);
    if Cholesky::new(im.clone()).is_none() {
        return Err(Error::InvalidGaussian(
            "imaginary part of Q must be positive definite".into(),
        ));
    }
    let sv = im.svd(false, false).singular_values;
    let largest = sv.iter().cloned().fold(0.0_f64, f64::max);
    let smallest = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smallest <= 0.0 || largest / smallest > IM_Q_CONDITION_LIMIT {
        return Err(Error::IllConditioned {
            cond: if smallest > 0.0 { largest / smallest } else { f64::INFINITY },
        });
    }
    Ok(())
}

fn symmetrize_c(q: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (q + q.transpose()) * Complex64::new(0.5, 0.0)
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

impl GeneralizedGaussian {
    pub fn new(q: DMatrix<Complex64>, p: DVector<Complex64>, c: Complex64) -> Result<Self> {
        let dim = q.nrows();
        if q.ncols() != dim || p.len() != dim {
            return Err(Error::InvalidGaussian(format!(
                "Q is {}x{}, p has length {}",
                q.nrows(),
                q.ncols(),
                p.len()
            )));
        }
        let sym_err = (&q - q.transpose()).map(|z| z.norm()).max();
        if sym_err > 1e-9 * (1.0 + q.map(|z| z.norm()).max()) {
            return Err(Error::InvalidGaussian(format!(
                "Q must be symmetric (asymmetry {sym_err:.3e})"
            )));
        }
        let q = symmetrize_c(&q);
        check_im_positive(&q)?;
        Ok(Self { dim, q, p, c })
    }

    /// The unit-norm standard Gaussian `2^{dim/4} e^{-π|x|²}`.
    pub fn standard(dim: usize) -> Self {
        let q = DMatrix::from_diagonal_element(dim, dim, Complex64::new(0.0, 1.0));
        let p = DVector::zeros(dim);
        let c = Complex64::new(2.0_f64.powf(dim as f64 / 4.0), 0.0);
        Self { dim, q, p, c }
    }

    /// A centered Gaussian `(2a)^{dim/4} e^{-πa|x|²} e^{iπr|x|²}` with width
    /// `a > 0` and chirp rate `r`.
    pub fn chirped(dim: usize, a: f64, r: f64) -> Result<Self> {
        if a <= 0.0 {
            return Err(Error::InvalidGaussian(format!("width must be positive, got {a}")));
        }
        let q = DMatrix::from_diagonal_element(dim, dim, Complex64::new(r, a));
        let p = DVector::zeros(dim);
        let c = Complex64::new((2.0 * a).powf(dim as f64 / 4.0), 0.0);
        Self::new(q, p, c)
    }

    pub fn evaluate(&self, x: &[f64]) -> Complex64 {
        let xv = DVector::from_iterator(self.dim, x.iter().map(|&v| Complex64::new(v, 0.0)));
        let quad = (&self.q * &xv).dot(&xv);
        let lin = self.p.dot(&xv);
        let pi = std::f64::consts::PI;
        self.c * (Complex64::new(0.0, pi) * quad + Complex64::new(0.0, 2.0 * pi) * lin).exp()
    }

    /// Complex conjugate: `Q ↦ -conj(Q)`, `p ↦ -conj(p)`, `c ↦ conj(c)`.
    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            q: self.q.map(|z| -z.conj()),
            p: self.p.map(|z| -z.conj()),
            c: self.c.conj(),
        }
    }

    /// Tensor product on `R^{d1+d2}`.
    pub fn tensor(&self, other: &Self) -> Self {
        let dim = self.dim + other.dim;
        let mut q = DMatrix::zeros(dim, dim);
        q.view_mut((0, 0), (self.dim, self.dim)).copy_from(&self.q);
        q.view_mut((self.dim, self.dim), (other.dim, other.dim))
            .copy_from(&other.q);
        let mut p = DVector::zeros(dim);
        p.rows_mut(0, self.dim).copy_from(&self.p);
        p.rows_mut(self.dim, other.dim).copy_from(&other.p);
        Self { dim, q, p, c: self.c * other.c }
    }

    /// Applies one generator exactly.
    pub fn apply_generator(&self, gen: &Generator) -> Result<Self> {
        let out = match gen {
            Generator::Chirp(q0) => {
                if q0.nrows() != self.dim {
                    return Err(Error::DimensionMismatch(format!(
                        "chirp acts on R^{}, Gaussian lives on R^{}",
                        q0.nrows(),
                        self.dim
                    )));
                }
                Self {
                    dim: self.dim,
                    q: &self.q + to_complex(q0),
                    p: self.p.clone(),
                    c: self.c,
                }
            }
            Generator::Linear(m) => {
                if m.nrows() != self.dim {
                    return Err(Error::DimensionMismatch(format!(
                        "linear map acts on R^{}, Gaussian lives on R^{}",
                        m.nrows(),
                        self.dim
                    )));
                }
                let det = m.determinant();
                if det == 0.0 {
                    return Err(Error::Singular("linear generator"));
                }
                let mc = to_complex(m);
                Self {
                    dim: self.dim,
                    q: symmetrize_c(&(mc.transpose() * &self.q * &mc)),
                    p: mc.transpose() * &self.p,
                    c: self.c * det.abs().sqrt(),
                }
            }
            Generator::Fourier => {
                let qinv = self
                    .q
                    .clone()
                    .try_inverse()
                    .ok_or(Error::Singular("Gaussian Q matrix"))?;
                let minus_iq = self.q.map(|z| z * Complex64::new(0.0, -1.0));
                let det = minus_iq.determinant();
                let amp = det.sqrt().finv();
                let pi = std::f64::consts::PI;
                let fresnel = (&qinv * &self.p).dot(&self.p);
                let phase = (Complex64::new(0.0, -pi) * fresnel).exp();
                Self {
                    dim: self.dim,
                    q: symmetrize_c(&qinv.map(|z| -z)),
                    p: &qinv * &self.p,
                    c: self.c * amp * phase,
                }
            }
        };
        check_im_positive(&out.q)?;
        Ok(out)
    }

    /// Pushes the Gaussian through a whole generator word.
    pub fn apply(&self, fact: &Factorization) -> Result<Self> {
        if fact.dim != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "word acts on R^{}, Gaussian lives on R^{}",
                fact.dim, self.dim
            )));
        }
        let mut g = self.clone();
        for gen in &fact.generators {
            g = g.apply_generator(gen)?;
        }
        Ok(g)
    }

    /// Closed-form `∫ G1(x) conj(G2(x)) dx`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "inner product needs equal dimensions ({} vs {})",
                self.dim, other.dim
            )));
        }
        let q_tilde = &self.q - other.q.map(|z| z.conj());
        check_im_positive(&q_tilde)?;
        let b = &self.p - other.p.map(|z| z.conj());
        let qinv = q_tilde
            .clone()
            .try_inverse()
            .ok_or(Error::Singular("combined Q matrix"))?;
        let minus_iq = q_tilde.map(|z| z * Complex64::new(0.0, -1.0));
        let det = minus_iq.determinant();
        let pi = std::f64::consts::PI;
        let fresnel = (&qinv * &b).dot(&b);
        Ok(self.c * other.c.conj() * det.sqrt().finv() * (Complex64::new(0.0, -pi) * fresnel).exp())
    }

    pub fn l2_norm(&self) -> Result<f64> {
        Ok(self.inner_product(self)?.re.max(0.0).sqrt())
    }

    /// Samples a 1-dimensional Gaussian on the centered grid.
    pub fn sample_1d(&self, n: usize, dx: f64) -> Result<SampledSignal> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch(format!(
                "sampling a signal needs dim 1, Gaussian lives on R^{}",
                self.dim
            )));
        }
        SampledSignal::from_fn(n, dx, |x| self.evaluate(&[x]))
    }

    /// Samples a 2-dimensional Gaussian on the tensor-square grid.
    pub fn sample_2d(&self, n: usize, step: f64) -> Result<Grid2> {
        if self.dim != 2 {
            return Err(Error::DimensionMismatch(format!(
                "sampling a grid needs dim 2, Gaussian lives on R^{}",
                self.dim
            )));
        }
        let half = n as f64 / 2.0;
        let mut values = vec![Complex64::ZERO; n * n];
        for ix in 0..n {
            let x = (ix as f64 - half) * step;
            for iy in 0..n {
                let y = (iy as f64 - half) * step;
                values[ix * n + iy] = self.evaluate(&[x, y]);
            }
        }
        Grid2::new(n, step, values)
    }
}

/// Exact distribution of two 1-signal Gaussians under a level-2 projection:
/// the generator word of `A` pushed through `f ⊗ conj(g)`. The result is a
/// generalized Gaussian on the time-frequency plane, canonical up to one
/// unit-modulus constant per projection.
pub fn gaussian_distribution(
    a: &BlockSymplectic,
    f: &GeneralizedGaussian,
    g: &GeneralizedGaussian,
) -> Result<GeneralizedGaussian> {
    if a.level() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "distribution projections act on R^{{4d}}, got half-size {}",
            a.half()
        )));
    }
    if f.dim != a.d() || g.dim != a.d() {
        return Err(Error::DimensionMismatch(format!(
            "signals live on R^{}, projection expects R^{}",
            f.dim,
            a.d()
        )));
    }
    let word = crate::engine::factorize(a)?;
    f.tensor(&g.conj()).apply(&word)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{factorize, phase_blind_compare};
    use crate::symplectic::{j_matrix, stft_projection, tau_projection};
    use nalgebra::dmatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Trapezoid quadrature of `f(x) conj(g(x))` over a wide fine grid; both
    /// integrands decay like Gaussians, so truncation and step errors are far
    /// below 1e-12.
    fn quad_inner(
        f: &GeneralizedGaussian,
        g: &GeneralizedGaussian,
        extent: f64,
        n: usize,
    ) -> Complex64 {
        let dx = 2.0 * extent / n as f64;
        let mut acc = Complex64::ZERO;
        for k in 0..=n {
            let x = -extent + k as f64 * dx;
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            acc += f.evaluate(&[x]) * g.evaluate(&[x]).conj() * w;
        }
        acc * dx
    }

    #[test]
    fn test_standard_gaussian_is_normalized() {
        let g = GeneralizedGaussian::standard(1);
        assert!((g.l2_norm().unwrap() - 1.0).abs() < 1e-14);
        let g2 = GeneralizedGaussian::standard(2);
        assert!((g2.l2_norm().unwrap() - 1.0).abs() < 1e-14);
        let num = quad_inner(&g, &g, 12.0, 4096);
        assert!((num - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn test_fourier_fixes_standard_gaussian() {
        let g = GeneralizedGaussian::standard(1);
        let hat = g.apply_generator(&Generator::Fourier).unwrap();
        assert!((hat.q[(0, 0)] - c(0.0, 1.0)).norm() < 1e-14);
        assert!((hat.c - g.c).norm() < 1e-14);
        assert!(hat.p[0].norm() < 1e-14);
    }

    #[test]
    fn test_chirped_inner_product_matches_quadrature() {
        let g0 = GeneralizedGaussian::standard(1);
        let q = dmatrix![1.0];
        let chirped = g0.apply_generator(&Generator::Chirp(q)).unwrap();
        let closed = g0.inner_product(&chirped).unwrap();
        // (1 + i/2)^{-1/2}, fixed by direct integration of √2 e^{-2πt²} e^{-iπt²}.
        let expected = c(1.0, 0.5).sqrt().finv();
        assert!((closed - expected).norm() < 1e-14);
        assert!((closed - c(0.92044, -0.21729)).norm() < 1e-4);
        let num = quad_inner(&chirped, &g0, 12.0, 8192).conj();
        assert!((closed - num).norm() < 1e-12, "quadrature disagrees: {closed} vs {num}");
    }

    #[test]
    fn test_linear_action_matches_pointwise_evaluation() {
        let g = GeneralizedGaussian::chirped(1, 1.3, 0.4).unwrap();
        let m = dmatrix![1.7];
        let mapped = g.apply_generator(&Generator::Linear(m)).unwrap();
        for &x in &[-1.2, 0.3, 0.9] {
            let direct = 1.7_f64.sqrt() * g.evaluate(&[1.7 * x]);
            assert!((mapped.evaluate(&[x]) - direct).norm() < 1e-13);
        }
    }

    #[test]
    fn test_fourier_matches_quadrature_for_offset_chirped_gaussian() {
        let q = dmatrix![c(0.7, 1.2)];
        let p = DVector::from_element(1, c(0.6, -0.2));
        let g = GeneralizedGaussian::new(q, p, c(0.9, 0.4)).unwrap();
        let hat = g.apply_generator(&Generator::Fourier).unwrap();
        for &xi in &[-0.8, 0.0, 1.1] {
            // Direct ∫ g(x) e^{-2πiξx} dx by trapezoid quadrature.
            let n = 16384;
            let extent = 14.0;
            let dx = 2.0 * extent / n as f64;
            let mut acc = Complex64::ZERO;
            for k in 0..=n {
                let x = -extent + k as f64 * dx;
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                acc += g.evaluate(&[x])
                    * (Complex64::new(0.0, -std::f64::consts::TAU * xi * x)).exp()
                    * w;
            }
            acc *= dx;
            assert!(
                (hat.evaluate(&[xi]) - acc).norm() < 1e-10,
                "Fourier value at {xi}: {} vs {acc}",
                hat.evaluate(&[xi])
            );
        }
    }

    #[test]
    fn test_word_preserves_norm() {
        let s = BlockSymplectic::new(
            dmatrix![0.9, 0.7; -0.5, (1.0 - 0.35) / 0.9],
            1,
        )
        .unwrap();
        let word = factorize(&s).unwrap();
        let g = GeneralizedGaussian::chirped(1, 0.8, -0.3).unwrap();
        let out = g.apply(&word).unwrap();
        assert!((out.l2_norm().unwrap() - g.l2_norm().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn test_wigner_of_standard_gaussian() {
        let a = tau_projection(0.5, 1).unwrap();
        let g0 = GeneralizedGaussian::standard(1);
        let w = gaussian_distribution(&a, &g0, &g0).unwrap();
        // Up to the word's constant: 2 e^{-2π(x² + ξ²)}.
        let reference = |x: f64, xi: f64| 2.0 * (-std::f64::consts::TAU * (x * x + xi * xi)).exp();
        let mut samples = Vec::new();
        let mut expected = Vec::new();
        for &x in &[-0.9, -0.3, 0.0, 0.4, 1.1] {
            for &xi in &[-0.7, 0.0, 0.5] {
                samples.push(w.evaluate(&[x, xi]));
                expected.push(c(reference(x, xi), 0.0));
            }
        }
        let pb = phase_blind_compare(&samples, &expected).unwrap();
        assert!(pb.residual < 1e-12, "Wigner oracle residual {:.3e}", pb.residual);
    }

    #[test]
    fn test_stft_of_standard_gaussian() {
        let a = stft_projection(1);
        let g0 = GeneralizedGaussian::standard(1);
        let w = gaussian_distribution(&a, &g0, &g0).unwrap();
        let pi = std::f64::consts::PI;
        let reference = |x: f64, xi: f64| {
            Complex64::from_polar((-pi * (x * x + xi * xi) / 2.0).exp(), -pi * x * xi)
        };
        let mut samples = Vec::new();
        let mut expected = Vec::new();
        for &x in &[-1.1, -0.4, 0.0, 0.6, 1.3] {
            for &xi in &[-0.8, 0.1, 0.9] {
                samples.push(w.evaluate(&[x, xi]));
                expected.push(reference(x, xi));
            }
        }
        let pb = phase_blind_compare(&samples, &expected).unwrap();
        assert!(pb.residual < 1e-11, "STFT oracle residual {:.3e}", pb.residual);
    }

    #[test]
    fn test_rihaczek_modulus_of_standard_gaussian() {
        let a = tau_projection(0.0, 1).unwrap();
        let g0 = GeneralizedGaussian::standard(1);
        let w = gaussian_distribution(&a, &g0, &g0).unwrap();
        let pi = std::f64::consts::PI;
        for &x in &[-0.8, 0.0, 0.5] {
            for &xi in &[-0.6, 0.2, 1.0] {
                let expected = 2.0_f64.sqrt() * (-pi * (x * x + xi * xi)).exp();
                assert!(
                    (w.evaluate(&[x, xi]).norm() - expected).abs() < 1e-12,
                    "Rihaczek modulus at ({x}, {xi})"
                );
            }
        }
    }

    #[test]
    fn test_fourier_projection_word_on_gaussian_oracle() {
        let j = BlockSymplectic::new(j_matrix(1), 1).unwrap();
        let word = factorize(&j).unwrap();
        let g = GeneralizedGaussian::chirped(1, 1.0, 0.8).unwrap();
        let hat = g.apply(&word).unwrap();
        // q̂ = -1/q for the pure Fourier word.
        let q = c(0.8, 1.0);
        assert!((hat.q[(0, 0)] + q.finv()).norm() < 1e-14);
    }

    #[test]
    fn test_moyal_identity_for_random_words() {
        use rand::rngs::StdRng;
        use rand::SeedableRng;
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let m = crate::random::random_symplectic(2, 0.5, &mut rng);
            let a = BlockSymplectic::with_tol(m, 1, 1e-8).unwrap();
            let f1 = GeneralizedGaussian::chirped(1, 1.2, 0.3).unwrap();
            let g1 = GeneralizedGaussian::standard(1);
            let f2 = GeneralizedGaussian::chirped(1, 0.7, -0.5).unwrap();
            let g2 = GeneralizedGaussian::chirped(1, 1.0, 0.2).unwrap();
            let w1 = gaussian_distribution(&a, &f1, &g1).unwrap();
            let w2 = gaussian_distribution(&a, &f2, &g2).unwrap();
            let lhs = w1.inner_product(&w2).unwrap();
            let rhs =
                f1.inner_product(&f2).unwrap() * g1.inner_product(&g2).unwrap().conj();
            assert!(
                (lhs - rhs).norm() < 1e-10,
                "Moyal residual {:.3e}",
                (lhs - rhs).norm()
            );
        }
    }

    #[test]
    fn test_ill_conditioned_gaussian_rejected() {
        let q = DMatrix::from_diagonal(&DVector::from_vec(vec![
            c(0.0, 1.0),
            c(0.0, 1e-13),
        ]));
        let p = DVector::zeros(2);
        assert!(matches!(
            GeneralizedGaussian::new(q, p, c(1.0, 0.0)),
            Err(Error::IllConditioned { .. }) | Err(Error::InvalidGaussian(_))
        ));
    }

    #[test]
    fn test_tensor_and_conj_sample_consistency() {
        let f = GeneralizedGaussian::chirped(1, 1.1, 0.6).unwrap();
        let g = GeneralizedGaussian::chirped(1, 0.9, -0.2).unwrap();
        let t = f.tensor(&g.conj());
        for &(x, y) in &[(0.3, -0.4), (-1.0, 0.2)] {
            let expected = f.evaluate(&[x]) * g.evaluate(&[y]).conj();
            assert!((t.evaluate(&[x, y]) - expected).norm() < 1e-13);
        }
    }
}
