//! Seeded random generation of symplectic matrices, covariant projections,
//! and test signals.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::engine::SampledSignal;
use crate::symplectic::{covariant_projection, rotation_matrix, BlockSymplectic};

/// Draws a random symplectic matrix on `R^{2·half}` as a bounded product of
/// generator projections `[[I,0],[C,I]]·[[A,0],[0,A⁻ᵀ]]·[[I,B],[0,I]]` with a
/// random rotation mixed in, so both free and non-free words occur. Entries of
/// the factor blocks are drawn from `[-amplitude, amplitude]`; ill-conditioned
/// draws are rejected and retried.
pub fn random_symplectic(half: usize, amplitude: f64, rng: &mut impl Rng) -> DMatrix<f64> {
    loop {
        let n = half;
        let mut a = DMatrix::<f64>::identity(n, n);
        for v in a.iter_mut() {
            *v += rng.random_range(-amplitude..amplitude) * 0.5;
        }
        if a.clone().svd(false, false).singular_values.iter().any(|&s| s < 0.3) {
            continue;
        }
        let mut b = DMatrix::<f64>::zeros(n, n);
        let mut c = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let vb = rng.random_range(-amplitude..amplitude);
                let vc = rng.random_range(-amplitude..amplitude);
                b[(i, j)] = vb;
                b[(j, i)] = vb;
                c[(i, j)] = vc;
                c[(j, i)] = vc;
            }
        }
        let two = 2 * n;
        let mut lower = DMatrix::<f64>::identity(two, two);
        lower.view_mut((n, 0), (n, n)).copy_from(&c);
        let mut upper = DMatrix::<f64>::identity(two, two);
        upper.view_mut((0, n), (n, n)).copy_from(&b);
        let mut diag = DMatrix::<f64>::zeros(two, two);
        let a_inv_t = a.clone().try_inverse().expect("conditioned block").transpose();
        diag.view_mut((0, 0), (n, n)).copy_from(&a);
        diag.view_mut((n, n), (n, n)).copy_from(&a_inv_t);
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let m = lower * diag * upper * rotation_matrix(theta, n);
        if m.clone().svd(false, false).singular_values.iter().all(|&s| s > 1e-3 && s < 1e3) {
            return m;
        }
    }
}

/// Draws a random covariant projection with moderate block entries
/// (`a11, a21` in `[-0.6, 0.6]`, `a13` with magnitude in `[0.4, 1.0]`), sized
/// to keep discrete chirp rates small enough for accurate sampling.
pub fn random_covariant(d: usize, rng: &mut impl Rng) -> BlockSymplectic {
    loop {
        let mut a11 = DMatrix::<f64>::zeros(d, d);
        let mut a13 = DMatrix::<f64>::zeros(d, d);
        let mut a21 = DMatrix::<f64>::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                a11[(i, j)] = rng.random_range(-0.6..0.6);
            }
        }
        for i in 0..d {
            for j in i..d {
                let sign = if rng.random_range(0..2) == 0 { -1.0 } else { 1.0 };
                let v13 = sign * rng.random_range(0.4..1.0) / (1.0 + (i != j) as u8 as f64);
                let v21 = rng.random_range(-0.6..0.6);
                a13[(i, j)] = v13;
                a13[(j, i)] = v13;
                a21[(i, j)] = v21;
                a21[(j, i)] = v21;
            }
        }
        if let Ok(s) = covariant_projection(&a11, &a13, &a21) {
            return s;
        }
    }
}

/// A unit-norm signal `c·e^{-πa x²} e^{iπ q x²} e^{2πi p x}` with moderate
/// random width, chirp rate, and center frequency.
pub fn random_gaussian_signal(n: usize, dx: f64, rng: &mut impl Rng) -> SampledSignal {
    let a: f64 = rng.random_range(0.5..2.0);
    let q: f64 = rng.random_range(-1.0..1.0);
    let p: f64 = rng.random_range(-1.5..1.5);
    let norm = (2.0 * a).powf(0.25);
    SampledSignal::from_fn(n, dx, |x| {
        let envelope = norm * (-std::f64::consts::PI * a * x * x).exp();
        let phase = std::f64::consts::PI * q * x * x + std::f64::consts::TAU * p * x;
        Complex64::from_polar(envelope, phase)
    })
    .expect("grid parameters are valid")
}

/// A band-limited random signal: white noise shaped by a Gaussian frequency
/// envelope of the given bandwidth, then localized in time by a Gaussian
/// envelope at a third of the grid half-extent (so samples decay to ~1e-11 at
/// the box edge and periodization error stays far below identity tolerances),
/// normalized to unit energy. The time envelope widens the spectrum by
/// `3/extent`, which is negligible against any reasonable bandwidth.
pub fn random_band_limited(
    n: usize,
    dx: f64,
    bandwidth: f64,
    rng: &mut impl Rng,
) -> SampledSignal {
    let noise: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut spectrum = crate::engine::centered_dft(&SampledSignal::new(noise, dx).unwrap());
    for (j, v) in spectrum.samples.iter_mut().enumerate() {
        let xi = (j as f64 - n as f64 / 2.0) * spectrum.dx;
        *v *= (-std::f64::consts::PI * (xi / bandwidth).powi(2)).exp();
    }
    let mut sig = crate::engine::centered_idft(&spectrum);
    let width = n as f64 * dx / 6.0;
    for (k, v) in sig.samples.iter_mut().enumerate() {
        let x = (k as f64 - n as f64 / 2.0) * dx;
        *v *= (-std::f64::consts::PI * (x / width).powi(2)).exp();
    }
    let norm = sig.l2_norm();
    if norm > 0.0 {
        for v in sig.samples.iter_mut() {
            *v /= norm;
        }
    }
    sig.spill = 0.0;
    sig
}
