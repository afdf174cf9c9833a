//! Generator factorization of symplectic matrices and its discrete action.
//!
//! Every symplectic matrix factors into the three elementary generators
//!
//! ```text
//! fourier      F f(ξ)  = ∫ f(x) e^{-2πi ξ·x} dx      projection [[0, I], [-I, 0]]
//! linear(M)    T_M f(x) = |det M|^{1/2} f(Mx)         projection [[M⁻¹, 0], [0, Mᵀ]]
//! chirp(Q)     p_Q f(x) = e^{iπ Qx·x} f(x), Q = Qᵀ    projection [[I, 0], [Q, I]]
//! ```
//!
//! For a free matrix (invertible upper-right block `B`) the factorization is
//! `[chirp(B⁻¹A), fourier, linear(B⁻¹), chirp(DB⁻¹)]` in application order,
//! using the symplectic identity `C = DB⁻¹A - B⁻ᵀ`. A non-free matrix is
//! pre-composed with a rotation `R_θ` from a fixed candidate list so that
//! `S·R_{-θ}` becomes free, and the factorization of `R_θ` is prepended.
//!
//! The discrete action operates on sampled signals over the centered grid
//! `x_k = (k - N/2)·Δx` (1-D) or its tensor square (2-D). The Fourier step is
//! the centered DFT with `Δx ↦ 1/(NΔx)`, exactly unitary for the weighted
//! `ℓ²` norms; chirps act pointwise; linear maps resample through windowed
//! Lagrange interpolation of configurable order. Operators may move energy
//! off the grid; a spill metric accumulates on outputs instead of silently
//! clipping.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::symplectic::{rotation_matrix, BlockSymplectic};

/// Interpolation order of the windowed Lagrange resampler.
pub const DEFAULT_INTERP_ORDER: usize = 8;

const MAX_INTERP_ORDER: usize = 16;

/// Upper-right-block conditioning required to take the direct free path in
/// [`factorize`]; matrices below it go through the rotation fallback.
const FREE_PATH_RATIO: f64 = 1e-6;

/// Max-abs residual the factorization must achieve against its source.
pub const FACTORIZATION_TOL: f64 = 1e-9;

const DROP_TOL: f64 = 1e-13;

/// One elementary metaplectic generator acting on `R^n`.
#[derive(Clone, Debug)]
pub enum Generator {
    /// Fourier transform with kernel `e^{-2πi ξ·x}`.
    Fourier,
    /// `T_M f(x) = |det M|^{1/2} f(Mx)` for invertible `M`.
    Linear(DMatrix<f64>),
    /// `p_Q f(x) = e^{iπ Qx·x} f(x)` for symmetric `Q`.
    Chirp(DMatrix<f64>),
}

/// Projection of one generator onto `Sp(n)` as a `2n x 2n` matrix.
pub fn generator_projection(gen: &Generator, n: usize) -> DMatrix<f64> {
    let mut p = DMatrix::identity(2 * n, 2 * n);
    match gen {
        Generator::Fourier => {
            p = DMatrix::zeros(2 * n, 2 * n);
            for k in 0..n {
                p[(k, n + k)] = 1.0;
                p[(n + k, k)] = -1.0;
            }
        }
        Generator::Linear(m) => {
            let minv = m.clone().try_inverse().expect("linear generator invertible");
            p.view_mut((0, 0), (n, n)).copy_from(&minv);
            p.view_mut((n, n), (n, n)).copy_from(&m.transpose());
        }
        Generator::Chirp(q) => {
            p.view_mut((n, 0), (n, n)).copy_from(q);
        }
    }
    p
}

/// An ordered generator word for one symplectic matrix: `Ŝ = G_k ∘ … ∘ G_1`
/// with `generators[0]` applied first.
#[derive(Clone, Debug)]
pub struct Factorization {
    /// Generators act on `R^dim`.
    pub dim: usize,
    pub generators: Vec<Generator>,
}

impl Factorization {
    /// Product of the generator projections in composition order
    /// (`P_k ⋯ P_1` for the word `G_1, …, G_k`).
    pub fn projection(&self) -> DMatrix<f64> {
        let mut p = DMatrix::identity(2 * self.dim, 2 * self.dim);
        for gen in &self.generators {
            p = generator_projection(gen, self.dim) * p;
        }
        p
    }

    /// Max-abs difference between [`Factorization::projection`] and `source`.
    pub fn residual(&self, source: &DMatrix<f64>) -> f64 {
        (self.projection() - source).amax()
    }
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn half_blocks(m: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let n = m.nrows() / 2;
    (
        m.view((0, 0), (n, n)).into_owned(),
        m.view((0, n), (n, n)).into_owned(),
        m.view((n, 0), (n, n)).into_owned(),
        m.view((n, n), (n, n)).into_owned(),
    )
}

fn push_chirp(gens: &mut Vec<Generator>, q: DMatrix<f64>, scale: f64) {
    if q.amax() > DROP_TOL * scale.max(1.0) {
        gens.push(Generator::Chirp(q));
    }
}

fn push_linear(gens: &mut Vec<Generator>, m: DMatrix<f64>, scale: f64) {
    let n = m.nrows();
    if (&m - DMatrix::<f64>::identity(n, n)).amax() > DROP_TOL * scale.max(1.0) {
        gens.push(Generator::Linear(m));
    }
}

fn singular_ratio(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let largest = sv.iter().cloned().fold(0.0_f64, f64::max);
    let smallest = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if largest == 0.0 {
        0.0
    } else {
        smallest / largest
    }
}

/// `[chirp(B⁻¹A), fourier, linear(B⁻¹), chirp(DB⁻¹)]` for invertible `B`,
/// dropping trivial factors.
fn free_word(m: &DMatrix<f64>) -> Result<Vec<Generator>> {
    let (a, b, _c, d) = half_blocks(m);
    let scale = m.amax();
    let binv = b
        .clone()
        .try_inverse()
        .ok_or(Error::Factorization("free word needs invertible B block".into()))?;
    let mut gens = Vec::with_capacity(4);
    push_chirp(&mut gens, symmetrize(&(&binv * &a)), scale);
    gens.push(Generator::Fourier);
    push_linear(&mut gens, binv.clone(), scale);
    push_chirp(&mut gens, symmetrize(&(&d * &binv)), scale);
    Ok(gens)
}

/// Factors a symplectic matrix into a generator word with projection residual
/// at most [`FACTORIZATION_TOL`].
pub fn factorize(s: &BlockSymplectic) -> Result<Factorization> {
    let n = s.half();
    let m = s.matrix();
    let scale = m.amax();
    let (a, b, c, _d) = half_blocks(m);

    let mut gens = Vec::new();
    if b.amax() <= 1e-12 * scale.max(1.0) {
        // Block lower-triangular: S = [[A, 0], [C, A⁻ᵀ]] = chirp(CA⁻¹) ∘ T_{A⁻¹}.
        let ainv = a
            .clone()
            .try_inverse()
            .ok_or(Error::Factorization("triangular word needs invertible A block".into()))?;
        push_linear(&mut gens, ainv.clone(), scale);
        push_chirp(&mut gens, symmetrize(&(&c * &ainv)), scale);
    } else if singular_ratio(&b) > FREE_PATH_RATIO {
        gens = free_word(m)?;
    } else {
        // Rotation fallback: find θ making the B block of S·R_{-θ} well
        // conditioned, then S = (S·R_{-θ}) · R_θ.
        let candidates: [f64; 12] = {
            use std::f64::consts::PI;
            [
                PI / 2.0,
                PI / 4.0,
                PI / 8.0,
                3.0 * PI / 8.0,
                PI / 16.0,
                3.0 * PI / 16.0,
                5.0 * PI / 16.0,
                7.0 * PI / 16.0,
                PI / 32.0,
                5.0 * PI / 32.0,
                9.0 * PI / 32.0,
                13.0 * PI / 32.0,
            ]
        };
        let mut best: Option<(f64, f64)> = None;
        for &theta in &candidates {
            let rot = rotation_matrix(-theta, n);
            let product = m * rot;
            let (_, b_theta, _, _) = half_blocks(&product);
            let ratio = singular_ratio(&b_theta);
            if best.map_or(true, |(_, r)| ratio > r) {
                best = Some((theta, ratio));
            }
        }
        let (theta, ratio) = best.unwrap();
        if ratio <= 1e-9 {
            return Err(Error::Factorization(format!(
                "no rotation candidate makes the B block invertible (best ratio {ratio:.3e})"
            )));
        }
        gens = free_word(&rotation_matrix(theta, n))?;
        gens.extend(free_word(&(m * rotation_matrix(-theta, n)))?);
    }

    let fact = Factorization { dim: n, generators: gens };
    let residual = fact.residual(m);
    if residual > FACTORIZATION_TOL {
        return Err(Error::Factorization(format!(
            "projection residual {residual:.3e} exceeds {FACTORIZATION_TOL:.1e}"
        )));
    }
    Ok(fact)
}

// ---------------------------------------------------------------------------
// Sampled carriers
// ---------------------------------------------------------------------------

/// A complex signal sampled on the centered grid `x_k = (k - N/2)·Δx`,
/// `N` a power of two. `spill` accumulates the relative energy moved off the
/// grid by resampling steps.
#[derive(Clone, Debug)]
pub struct SampledSignal {
    pub samples: Vec<Complex64>,
    pub dx: f64,
    pub spill: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<Complex64>, dx: f64) -> Result<Self> {
        if samples.is_empty() || !samples.len().is_power_of_two() {
            return Err(Error::NotPowerOfTwo(samples.len()));
        }
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::BadSpacing(dx));
        }
        Ok(Self { samples, dx, spill: 0.0 })
    }

    pub fn from_fn(n: usize, dx: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let half = n as f64 / 2.0;
        let samples = (0..n).map(|k| f((k as f64 - half) * dx)).collect();
        Self::new(samples, dx)
    }

    /// The normalized Gaussian `2^{1/4} e^{-πx²}`.
    pub fn gaussian_g0(n: usize, dx: f64) -> Self {
        Self::from_fn(n, dx, |x| {
            Complex64::new(2.0_f64.powf(0.25) * (-std::f64::consts::PI * x * x).exp(), 0.0)
        })
        .expect("gaussian window construction")
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    /// Grid point `x_k`.
    pub fn x(&self, k: usize) -> f64 {
        (k as f64 - self.n() as f64 / 2.0) * self.dx
    }

    /// Full extent `N·Δx` of the grid.
    pub fn extent(&self) -> f64 {
        self.n() as f64 * self.dx
    }

    /// `Δx`-weighted inner product `Δx Σ f_k conj(g_k)`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            * self.dx
    }

    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx).sqrt()
    }

    /// True when `N·Δx² = 1`, i.e. the centered DFT maps the grid to itself.
    pub fn is_self_dual(&self) -> bool {
        (self.n() as f64 * self.dx * self.dx - 1.0).abs() <= 1e-9
    }
}

/// An `N x N` complex field over the tensor square of a centered grid, with
/// equal spacing `step` on both axes; `values[ix * n + iy]` sits at
/// `(coord(ix), coord(iy))`.
#[derive(Clone, Debug)]
pub struct Grid2 {
    pub n: usize,
    pub step: f64,
    pub values: Vec<Complex64>,
    pub spill: f64,
}

impl Grid2 {
    pub fn new(n: usize, step: f64, values: Vec<Complex64>) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        if values.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "grid expects {} values, got {}",
                n * n,
                values.len()
            )));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::BadSpacing(step));
        }
        Ok(Self { n, step, values, spill: 0.0 })
    }

    /// Tensor `f ⊗ conj(g)` (or `f ⊗ g`): the two signals must share the grid.
    pub fn tensor(f: &SampledSignal, g: &SampledSignal, conj_second: bool) -> Result<Self> {
        if f.n() != g.n() || (f.dx - g.dx).abs() > 1e-12 * f.dx {
            return Err(Error::DimensionMismatch(
                "tensor factors must share N and Δx".into(),
            ));
        }
        let n = f.n();
        let mut values = vec![Complex64::ZERO; n * n];
        for ix in 0..n {
            let fv = f.samples[ix];
            let row = &mut values[ix * n..(ix + 1) * n];
            for (iy, out) in row.iter_mut().enumerate() {
                let gv = if conj_second { g.samples[iy].conj() } else { g.samples[iy] };
                *out = fv * gv;
            }
        }
        let mut grid = Self::new(n, f.dx, values)?;
        grid.spill = f.spill + g.spill;
        Ok(grid)
    }

    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - self.n as f64 / 2.0) * self.step
    }

    pub fn value(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[ix * self.n + iy]
    }

    /// `step²`-weighted inner product.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            * (self.step * self.step)
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.step * self.step).sqrt()
    }

    pub fn is_self_dual(&self) -> bool {
        (self.n as f64 * self.step * self.step - 1.0).abs() <= 1e-9
    }
}

// ---------------------------------------------------------------------------
// Centered DFT
// ---------------------------------------------------------------------------

struct Dft {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Dft {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// `e^{-iπN/2}` for even `N`: +1 when `N ≡ 0 (mod 4)`, -1 otherwise.
    fn center_constant(&self) -> f64 {
        if (self.n / 2) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// In-place centered DFT `F_j = Δx Σ_k f_k e^{-2πi ξ_j x_k}` over
    /// `x_k = (k - N/2)Δx`, `ξ_j = (j - N/2)/(NΔx)`.
    fn forward(&self, data: &mut [Complex64], dx: f64, scratch: &mut [Complex64]) {
        for v in data.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
        self.forward.process_with_scratch(data, scratch);
        let c = self.center_constant() * dx;
        for (j, v) in data.iter_mut().enumerate() {
            *v *= if j % 2 == 0 { c } else { -c };
        }
    }

    /// Exact inverse of [`Dft::forward`]; `dxi` is the spacing of the input
    /// (frequency) grid.
    fn backward(&self, data: &mut [Complex64], dxi: f64, scratch: &mut [Complex64]) {
        for v in data.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
        self.inverse.process_with_scratch(data, scratch);
        let c = self.center_constant() * dxi;
        for (k, v) in data.iter_mut().enumerate() {
            *v *= if k % 2 == 0 { c } else { -c };
        }
    }

    fn scratch(&self) -> Vec<Complex64> {
        let len = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        vec![Complex64::ZERO; len]
    }
}

/// Centered DFT of a signal; the spacing maps to `1/(NΔx)`.
pub fn centered_dft(f: &SampledSignal) -> SampledSignal {
    let dft = Dft::new(f.n());
    let mut out = f.clone();
    let mut scratch = dft.scratch();
    dft.forward(&mut out.samples, f.dx, &mut scratch);
    out.dx = 1.0 / (f.n() as f64 * f.dx);
    out
}

/// Inverse centered DFT; exact inverse of [`centered_dft`].
pub fn centered_idft(f: &SampledSignal) -> SampledSignal {
    let dft = Dft::new(f.n());
    let mut out = f.clone();
    let mut scratch = dft.scratch();
    dft.backward(&mut out.samples, f.dx, &mut scratch);
    out.dx = 1.0 / (f.n() as f64 * f.dx);
    out
}

fn transpose_square(values: &mut Vec<Complex64>, n: usize) {
    let mut out = vec![Complex64::ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = values[i * n + j];
        }
    }
    *values = std::mem::take(&mut out);
}

pub(crate) fn dft_rows(values: &mut [Complex64], n: usize, step: f64, forward: bool) {
    let dft = Dft::new(n);
    values
        .par_chunks_mut(n)
        .for_each_init(
            || dft.scratch(),
            |scratch, row| {
                if forward {
                    dft.forward(row, step, scratch);
                } else {
                    dft.backward(row, step, scratch);
                }
            },
        );
}

/// Centered 2-D DFT of a grid (both axes); spacing maps to the dual spacing.
pub fn centered_dft_2d(g: &Grid2, forward: bool) -> Grid2 {
    let n = g.n;
    let mut out = g.clone();
    // Rows transform the second coordinate, columns (via transpose) the first.
    dft_rows(&mut out.values, n, g.step, forward);
    transpose_square(&mut out.values, n);
    dft_rows(&mut out.values, n, g.step, forward);
    transpose_square(&mut out.values, n);
    out.step = 1.0 / (n as f64 * g.step);
    out
}

// ---------------------------------------------------------------------------
// Windowed Lagrange interpolation
// ---------------------------------------------------------------------------

fn lagrange_weights(u: f64, left: isize, order: usize, w: &mut [f64]) {
    for m in 0..order {
        let xm = (left + m as isize) as f64;
        let mut prod = 1.0;
        for l in 0..order {
            if l != m {
                let xl = (left + l as isize) as f64;
                prod *= (u - xl) / (xm - xl);
            }
        }
        w[m] = prod;
    }
}

fn window_left(u: f64, order: usize) -> isize {
    u.floor() as isize - (order as isize / 2 - 1)
}

/// Order-`order` Lagrange interpolation of `samples` at fractional index `u`;
/// indices outside the slice contribute zero. Integer `u` is exact.
pub fn interp_fractional(samples: &[Complex64], u: f64, order: usize) -> Complex64 {
    let n = samples.len() as isize;
    let r = u.round();
    if (u - r).abs() < 1e-9 {
        let k = r as isize;
        return if (0..n).contains(&k) {
            samples[k as usize]
        } else {
            Complex64::ZERO
        };
    }
    let left = window_left(u, order);
    let mut w = [0.0_f64; MAX_INTERP_ORDER];
    lagrange_weights(u, left, order, &mut w[..order]);
    let mut acc = Complex64::ZERO;
    for (m, &wm) in w[..order].iter().enumerate() {
        let idx = left + m as isize;
        if (0..n).contains(&idx) {
            acc += samples[idx as usize] * wm;
        }
    }
    acc
}

/// Tensor-product Lagrange interpolation on a square grid at fractional
/// indices `(ux, uy)`; outside contributions are zero.
pub fn interp2_fractional(
    values: &[Complex64],
    n: usize,
    ux: f64,
    uy: f64,
    order: usize,
) -> Complex64 {
    let ni = n as isize;
    let rx = ux.round();
    let ry = uy.round();
    if (ux - rx).abs() < 1e-9 && (uy - ry).abs() < 1e-9 {
        let (ix, iy) = (rx as isize, ry as isize);
        return if (0..ni).contains(&ix) && (0..ni).contains(&iy) {
            values[ix as usize * n + iy as usize]
        } else {
            Complex64::ZERO
        };
    }
    let lx = window_left(ux, order);
    let ly = window_left(uy, order);
    let mut wx = [0.0_f64; MAX_INTERP_ORDER];
    let mut wy = [0.0_f64; MAX_INTERP_ORDER];
    lagrange_weights(ux, lx, order, &mut wx[..order]);
    lagrange_weights(uy, ly, order, &mut wy[..order]);
    let mut acc = Complex64::ZERO;
    for (mx, &wxm) in wx[..order].iter().enumerate() {
        let ix = lx + mx as isize;
        if !(0..ni).contains(&ix) {
            continue;
        }
        let row = &values[ix as usize * n..ix as usize * n + n];
        let mut racc = Complex64::ZERO;
        for (my, &wym) in wy[..order].iter().enumerate() {
            let iy = ly + my as isize;
            if (0..ni).contains(&iy) {
                racc += row[iy as usize] * wym;
            }
        }
        acc += racc * wxm;
    }
    acc
}

fn energy(values: &[Complex64]) -> f64 {
    values.iter().map(|v| v.norm_sqr()).sum()
}

fn spill_update(spill: &mut f64, e_in: f64, e_out: f64) {
    if e_in > 0.0 {
        *spill += (1.0 - e_out / e_in).max(0.0);
    }
}

// ---------------------------------------------------------------------------
// Discrete generator action
// ---------------------------------------------------------------------------

fn chirp_scalar(q: &DMatrix<f64>) -> f64 {
    q[(0, 0)]
}

fn apply_gen_1d(gen: &Generator, sig: &mut SampledSignal, order: usize, inverse: bool) -> Result<()> {
    match gen {
        Generator::Fourier => {
            let out = if inverse { centered_idft(sig) } else { centered_dft(sig) };
            *sig = out;
        }
        Generator::Chirp(q) => {
            if q.nrows() != 1 {
                return Err(Error::DimensionMismatch("1-D chirp needs a 1x1 matrix".into()));
            }
            let rate = if inverse { -chirp_scalar(q) } else { chirp_scalar(q) };
            let n = sig.n();
            let dx = sig.dx;
            let half = n as f64 / 2.0;
            sig.samples.iter_mut().enumerate().for_each(|(k, v)| {
                let x = (k as f64 - half) * dx;
                let phase = std::f64::consts::PI * rate * x * x;
                *v *= Complex64::from_polar(1.0, phase);
            });
        }
        Generator::Linear(mmat) => {
            if mmat.nrows() != 1 {
                return Err(Error::DimensionMismatch("1-D linear map needs a 1x1 matrix".into()));
            }
            let m0 = mmat[(0, 0)];
            if m0 == 0.0 {
                return Err(Error::Singular("linear generator"));
            }
            let m = if inverse { 1.0 / m0 } else { m0 };
            let scale = m.abs().sqrt();
            let n = sig.n();
            let dx = sig.dx;
            let half = n as f64 / 2.0;
            let src = sig.samples.clone();
            let e_in = energy(&src);
            sig.samples
                .par_iter_mut()
                .enumerate()
                .for_each(|(k, v)| {
                    let x = (k as f64 - half) * dx;
                    let u = m * x / dx + half;
                    *v = interp_fractional(&src, u, order) * scale;
                });
            let e_out = energy(&sig.samples);
            spill_update(&mut sig.spill, e_in, e_out);
        }
    }
    Ok(())
}

fn apply_gen_2d(gen: &Generator, grid: &mut Grid2, order: usize, inverse: bool) -> Result<()> {
    let n = grid.n;
    let half = n as f64 / 2.0;
    let step = grid.step;
    match gen {
        Generator::Fourier => {
            *grid = centered_dft_2d(grid, !inverse);
        }
        Generator::Chirp(q) => {
            if q.nrows() != 2 {
                return Err(Error::DimensionMismatch("2-D chirp needs a 2x2 matrix".into()));
            }
            let sign = if inverse { -1.0 } else { 1.0 };
            let (q00, q01, q11) = (q[(0, 0)], q[(0, 1)], q[(1, 1)]);
            grid.values.par_chunks_mut(n).enumerate().for_each(|(ix, row)| {
                let x = (ix as f64 - half) * step;
                for (iy, v) in row.iter_mut().enumerate() {
                    let y = (iy as f64 - half) * step;
                    let phase =
                        sign * std::f64::consts::PI * (q00 * x * x + 2.0 * q01 * x * y + q11 * y * y);
                    *v *= Complex64::from_polar(1.0, phase);
                }
            });
        }
        Generator::Linear(mmat) => {
            if mmat.nrows() != 2 {
                return Err(Error::DimensionMismatch("2-D linear map needs a 2x2 matrix".into()));
            }
            let m = if inverse {
                mmat.clone()
                    .try_inverse()
                    .ok_or(Error::Singular("linear generator"))?
            } else {
                mmat.clone()
            };
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            if det == 0.0 {
                return Err(Error::Singular("linear generator"));
            }
            let scale = det.abs().sqrt();
            let src = grid.values.clone();
            let e_in = energy(&src);
            let (m00, m01, m10, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
            grid.values.par_chunks_mut(n).enumerate().for_each(|(ix, row)| {
                let x = (ix as f64 - half) * step;
                for (iy, v) in row.iter_mut().enumerate() {
                    let y = (iy as f64 - half) * step;
                    let zx = m00 * x + m01 * y;
                    let zy = m10 * x + m11 * y;
                    *v = interp2_fractional(&src, n, zx / step + half, zy / step + half, order)
                        * scale;
                }
            });
            let e_out = energy(&grid.values);
            spill_update(&mut grid.spill, e_in, e_out);
        }
    }
    Ok(())
}

/// Applies a 1-dimensional factorization (`dim = 1`) to a sampled signal.
pub fn apply_1d(fact: &Factorization, f: &SampledSignal) -> Result<SampledSignal> {
    apply_1d_with_order(fact, f, DEFAULT_INTERP_ORDER)
}

pub fn apply_1d_with_order(
    fact: &Factorization,
    f: &SampledSignal,
    order: usize,
) -> Result<SampledSignal> {
    check_order(order)?;
    if fact.dim != 1 {
        return Err(Error::DimensionMismatch(format!(
            "signal path needs dim 1, factorization has dim {}",
            fact.dim
        )));
    }
    if !f.is_self_dual() {
        return Err(Error::NotSelfDual(f.n() as f64 * f.dx * f.dx));
    }
    let mut out = f.clone();
    for gen in &fact.generators {
        apply_gen_1d(gen, &mut out, order, false)?;
    }
    Ok(out)
}

/// Applies the exact inverse of a 1-dimensional factorization: the generator
/// word is walked in reverse with each discrete step inverted (the inverse
/// centered DFT is the exact inverse of the forward one).
pub fn apply_1d_inverse(fact: &Factorization, f: &SampledSignal) -> Result<SampledSignal> {
    check_order(DEFAULT_INTERP_ORDER)?;
    if fact.dim != 1 {
        return Err(Error::DimensionMismatch(format!(
            "signal path needs dim 1, factorization has dim {}",
            fact.dim
        )));
    }
    if !f.is_self_dual() {
        return Err(Error::NotSelfDual(f.n() as f64 * f.dx * f.dx));
    }
    let mut out = f.clone();
    for gen in fact.generators.iter().rev() {
        apply_gen_1d(gen, &mut out, DEFAULT_INTERP_ORDER, true)?;
    }
    Ok(out)
}

/// Applies a 2-dimensional factorization (`dim = 2`) to a grid. The grid must
/// be self-dual (`N·step² = 1`) so every Fourier step maps it to itself.
pub fn apply_2d(fact: &Factorization, g: &Grid2) -> Result<Grid2> {
    apply_2d_with_order(fact, g, DEFAULT_INTERP_ORDER)
}

pub fn apply_2d_with_order(fact: &Factorization, g: &Grid2, order: usize) -> Result<Grid2> {
    check_order(order)?;
    if fact.dim != 2 {
        return Err(Error::DimensionMismatch(format!(
            "grid path needs dim 2, factorization has dim {}",
            fact.dim
        )));
    }
    if !g.is_self_dual() {
        return Err(Error::NotSelfDual(g.n as f64 * g.step * g.step));
    }
    let mut out = g.clone();
    for gen in &fact.generators {
        apply_gen_2d(gen, &mut out, order, false)?;
    }
    Ok(out)
}

/// Exact inverse of [`apply_2d`].
pub fn apply_2d_inverse(fact: &Factorization, g: &Grid2) -> Result<Grid2> {
    if fact.dim != 2 {
        return Err(Error::DimensionMismatch(format!(
            "grid path needs dim 2, factorization has dim {}",
            fact.dim
        )));
    }
    if !g.is_self_dual() {
        return Err(Error::NotSelfDual(g.n as f64 * g.step * g.step));
    }
    let mut out = g.clone();
    for gen in fact.generators.iter().rev() {
        apply_gen_2d(gen, &mut out, DEFAULT_INTERP_ORDER, true)?;
    }
    Ok(out)
}

fn check_order(order: usize) -> Result<()> {
    if order < 2 || order > MAX_INTERP_ORDER || order % 2 != 0 {
        return Err(Error::Domain(format!(
            "interpolation order must be even and within 2..={MAX_INTERP_ORDER}, got {order}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Phase-blind comparison
// ---------------------------------------------------------------------------

/// Result of a phase-blind comparison: the fitted unit-modulus constant and
/// the relative residual after removing it.
#[derive(Clone, Copy, Debug)]
pub struct PhaseBlind {
    pub alpha: Complex64,
    pub residual: f64,
}

/// Fits the best unit-modulus constant `α = ⟨x, y⟩/|⟨x, y⟩|` and returns
/// `‖x - αy‖ / ‖y‖`.
pub fn phase_blind_compare(x: &[Complex64], y: &[Complex64]) -> Result<PhaseBlind> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "phase-blind comparison needs equal lengths ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let ny: f64 = y.iter().map(|v| v.norm_sqr()).sum();
    if ny == 0.0 {
        return Err(Error::ZeroInput("phase-blind reference"));
    }
    let inner: Complex64 = x.iter().zip(y).map(|(a, b)| a * b.conj()).sum();
    let alpha = if inner.norm() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        inner / inner.norm()
    };
    let diff: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - alpha * b).norm_sqr())
        .sum();
    Ok(PhaseBlind {
        alpha,
        residual: (diff / ny).sqrt(),
    })
}

/// Plain relative error `‖x - y‖ / ‖y‖` without phase fitting.
pub fn relative_l2_error(x: &[Complex64], y: &[Complex64]) -> f64 {
    let ny: f64 = y.iter().map(|v| v.norm_sqr()).sum();
    let diff: f64 = x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum();
    if ny == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (diff / ny).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{j_matrix, stft_projection, tau_projection};

    const N: usize = 256;
    const DX: f64 = 1.0 / 16.0;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn test_centered_dft_of_delta_has_constant_modulus() {
        let mut f = SampledSignal::from_fn(N, DX, |_| c(0.0, 0.0)).unwrap();
        f.samples[N / 2] = c(1.0, 0.0);
        let hat = centered_dft(&f);
        for v in &hat.samples {
            assert!((v.norm() - DX).abs() < 1e-12);
        }
    }

    #[test]
    fn test_centered_dft_parseval_and_roundtrip() {
        let f = SampledSignal::from_fn(N, DX, |x| {
            c((-x * x).exp() * (3.0 * x).cos(), (-0.5 * x * x).exp() * x.sin())
        })
        .unwrap();
        let hat = centered_dft(&f);
        assert!((hat.l2_norm() - f.l2_norm()).abs() < 1e-12 * f.l2_norm());
        assert!((hat.dx - 1.0 / (N as f64 * DX)).abs() < 1e-15);
        let back = centered_idft(&hat);
        let err = relative_l2_error(&back.samples, &f.samples);
        assert!(err < 1e-13, "roundtrip error {err:.3e}");
    }

    #[test]
    fn test_centered_dft_fixes_gaussian() {
        let f = SampledSignal::gaussian_g0(N, DX);
        let hat = centered_dft(&f);
        let err = relative_l2_error(&hat.samples, &f.samples);
        assert!(err < 1e-12, "Fourier transform of g0 deviates by {err:.3e}");
    }

    #[test]
    fn test_factorize_fourier_is_single_generator() {
        let j = BlockSymplectic::new(j_matrix(1), 1).unwrap();
        let fact = factorize(&j).unwrap();
        assert_eq!(fact.generators.len(), 1);
        assert!(matches!(fact.generators[0], Generator::Fourier));
        assert!(fact.residual(j.matrix()) < 1e-15);
    }

    #[test]
    fn test_factorize_chirp_is_single_generator() {
        let mut m = DMatrix::identity(2, 2);
        m[(1, 0)] = 0.8;
        let s = BlockSymplectic::new(m.clone(), 1).unwrap();
        let fact = factorize(&s).unwrap();
        assert_eq!(fact.generators.len(), 1);
        assert!(matches!(&fact.generators[0], Generator::Chirp(q) if (q[(0,0)] - 0.8).abs() < 1e-15));
    }

    #[test]
    fn test_factorize_identity_is_empty() {
        let s = BlockSymplectic::new(DMatrix::identity(4, 4), 2).unwrap();
        let fact = factorize(&s).unwrap();
        assert!(fact.generators.is_empty());
    }

    #[test]
    fn test_factorize_non_free_projections() {
        for a in [stft_projection(1), tau_projection(0.3, 1).unwrap()] {
            let fact = factorize(&a).unwrap();
            let residual = fact.residual(a.matrix());
            assert!(residual < 1e-9, "fallback residual {residual:.3e}");
        }
    }

    #[test]
    fn test_fourier_via_factorization_matches_direct_dft() {
        let j = BlockSymplectic::new(j_matrix(1), 1).unwrap();
        let fact = factorize(&j).unwrap();
        let f = SampledSignal::gaussian_g0(N, DX);
        let out = apply_1d(&fact, &f).unwrap();
        let err = relative_l2_error(&out.samples, &centered_dft(&f).samples);
        assert!(err < 1e-14);
    }

    #[test]
    fn test_fractional_fourier_fixes_gaussian_up_to_phase() {
        let theta = std::f64::consts::PI / 5.0;
        let s = BlockSymplectic::new(rotation_matrix(theta, 1), 1).unwrap();
        let fact = factorize(&s).unwrap();
        let g = SampledSignal::gaussian_g0(N, DX);
        let out = apply_1d(&fact, &g).unwrap();
        let pb = phase_blind_compare(&out.samples, &g.samples).unwrap();
        assert!(pb.residual < 1e-6, "FrFT residual {:.3e}", pb.residual);
    }

    #[test]
    fn test_linear_scaling_matches_closed_form() {
        let m = DMatrix::from_row_slice(1, 1, &[2.0]);
        let sig = SampledSignal::gaussian_g0(N, DX);
        let mut out = sig.clone();
        apply_gen_1d(&Generator::Linear(m), &mut out, DEFAULT_INTERP_ORDER, false).unwrap();
        let expected = SampledSignal::from_fn(N, DX, |x| {
            c(
                2.0_f64.sqrt() * 2.0_f64.powf(0.25) * (-4.0 * std::f64::consts::PI * x * x).exp(),
                0.0,
            )
        })
        .unwrap();
        let err = relative_l2_error(&out.samples, &expected.samples);
        assert!(err < 1e-9, "scaling error {err:.3e}");
    }

    #[test]
    fn test_fractional_scaling_accuracy() {
        let m = DMatrix::from_row_slice(1, 1, &[1.0 / 1.3]);
        let sig = SampledSignal::gaussian_g0(N, DX);
        let mut out = sig.clone();
        apply_gen_1d(&Generator::Linear(m), &mut out, DEFAULT_INTERP_ORDER, false).unwrap();
        let expected = SampledSignal::from_fn(N, DX, |x| {
            let y = x / 1.3;
            c(
                (1.0 / 1.3_f64).sqrt() * 2.0_f64.powf(0.25)
                    * (-std::f64::consts::PI * y * y).exp(),
                0.0,
            )
        })
        .unwrap();
        let err = relative_l2_error(&out.samples, &expected.samples);
        assert!(err < 1e-7, "fractional scaling error {err:.3e}");
    }

    #[test]
    fn test_apply_inverse_undoes_apply() {
        let s = BlockSymplectic::new(
            DMatrix::from_row_slice(2, 2, &[0.9, 0.7, -0.5, 0.722222222222222]),
            1,
        );
        // Build an exactly symplectic 2x2 (det = 1) instead.
        let det_fix = DMatrix::from_row_slice(2, 2, &[0.9, 0.7, -0.5, (1.0 - 0.35) / 0.9]);
        let s = s.or_else(|_| BlockSymplectic::new(det_fix, 1)).unwrap();
        let fact = factorize(&s).unwrap();
        let f = SampledSignal::gaussian_g0(N, DX);
        let there = apply_1d(&fact, &f).unwrap();
        let back = apply_1d_inverse(&fact, &there).unwrap();
        let err = relative_l2_error(&back.samples, &f.samples);
        assert!(err < 1e-5, "roundtrip error {err:.3e}");
    }

    #[test]
    fn test_random_free_words_have_small_residual() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(11);
        for half in [1usize, 2] {
            for _ in 0..50 {
                let m = crate::random::random_symplectic(half, 0.6, &mut rng);
                let s = BlockSymplectic::with_tol(m.clone(), half, 1e-9).unwrap();
                let fact = factorize(&s).unwrap();
                assert!(fact.residual(&m) <= FACTORIZATION_TOL);
                let _ = rng.random_range(0..2);
            }
        }
    }

    #[test]
    fn test_interp_reproduces_polynomials() {
        let samples: Vec<Complex64> = (0..32)
            .map(|k| {
                let x = k as f64;
                c(x * x * x - 2.0 * x + 1.0, 0.5 * x * x)
            })
            .collect();
        for &u in &[5.3, 9.75, 20.1] {
            let v = interp_fractional(&samples, u, 8);
            let expected = c(u * u * u - 2.0 * u + 1.0, 0.5 * u * u);
            assert!((v - expected).norm() < 1e-8, "poly interp at {u}");
        }
    }

    #[test]
    fn test_phase_blind_detects_pure_phase() {
        let x: Vec<Complex64> = (0..64).map(|k| c((k as f64 * 0.1).sin(), 0.3)).collect();
        let alpha = Complex64::from_polar(1.0, 1.234);
        let y: Vec<Complex64> = x.iter().map(|v| v / alpha).collect();
        let pb = phase_blind_compare(&x, &y).unwrap();
        assert!(pb.residual < 1e-14);
        assert!((pb.alpha - alpha).norm() < 1e-12);
    }

    #[test]
    fn test_grid_fourier_parseval() {
        let f = SampledSignal::gaussian_g0(N, DX);
        let g = SampledSignal::from_fn(N, DX, |x| c((-x * x).exp(), 0.1 * x)).unwrap();
        let grid = Grid2::tensor(&f, &g, true).unwrap();
        let hat = centered_dft_2d(&grid, true);
        assert!((hat.l2_norm() - grid.l2_norm()).abs() < 1e-10 * grid.l2_norm());
        let back = centered_dft_2d(&hat, false);
        let err = relative_l2_error(&back.values, &grid.values);
        assert!(err < 1e-13);
    }

    #[test]
    fn test_non_self_dual_grid_rejected() {
        let f = SampledSignal::gaussian_g0(128, DX).samples;
        let f = SampledSignal::new(f, DX).unwrap();
        let j = BlockSymplectic::new(j_matrix(1), 1).unwrap();
        let fact = factorize(&j).unwrap();
        assert!(matches!(
            apply_1d(&fact, &f),
            Err(Error::NotSelfDual(_))
        ));
    }
}
