//! Metaplectic atoms, deformed Gabor frames, dual windows, and inversion.
//!
//! For a shift-invertible projection `A` the atoms are
//!
//! ```text
//! π_A(z)g = |det E_A|^{-1/2} · conj(Φ_{M_A}(w)) · π(w) δ_A g,   w = E_A⁻¹z,
//! ```
//!
//! normalized so that `⟨f, π_A(z)g⟩` equals the fast-path distribution value
//! `W_A(f, g)(z)` (both carry the same convention constant, which therefore
//! cancels in every frame computation: the frame operator is a Gram sum, the
//! inversion integral pairs the two). Frames over a lattice `aℤ × bℤ`
//! truncated to the grid support analysis, frame-operator application,
//! conjugate-gradient dual windows with power-iteration bounds, discrete
//! reconstruction, and the Riemann-sum inversion integral.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::distributions::{deformed_window, deformed_window_inverse, wigner_a_fast, wigner_a_general};
use crate::engine::{interp2_fractional, interp_fractional, phase_blind_compare, SampledSignal, DEFAULT_INTERP_ORDER};
use crate::error::{Error, Result};
use crate::symplectic::{derived_blocks, is_invertible, BlockSymplectic};

pub const CG_TOL: f64 = 1e-10;
pub const CG_MAX_ITERS: usize = 500;
pub const POWER_ITERS: usize = 200;
const INVERSE_POWER_ITERS: usize = 12;
const FRAME_RATIO_FLOOR: f64 = 1e-8;

/// A rectangular lattice `aℤ × bℤ` truncated to `[-R, R)²` on the grid.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub a: f64,
    pub b: f64,
    pub radius: f64,
    pub points: Vec<(f64, f64)>,
}

impl Lattice {
    /// Lattice over the full grid extent; `a` and `b` must be positive
    /// multiples of the grid spacings (`Δx` and `Δξ = Δx` on self-dual grids).
    pub fn new(a: f64, b: f64, n: usize, dx: f64) -> Result<Self> {
        Self::with_radius(a, b, n, dx, n as f64 * dx / 2.0)
    }

    /// Lattice truncated to `[-radius, radius)²`.
    pub fn with_radius(a: f64, b: f64, n: usize, dx: f64, radius: f64) -> Result<Self> {
        for step in [a, b] {
            if !(step.is_finite() && step > 0.0) {
                return Err(Error::BadLatticeStep { step, spacing: dx });
            }
            let ratio = step / dx;
            if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
                return Err(Error::BadLatticeStep { step, spacing: dx });
            }
        }
        let max_radius = n as f64 * dx / 2.0;
        let radius = radius.min(max_radius);
        if radius <= 0.0 {
            return Err(Error::EmptyLattice(radius));
        }
        let mut points = Vec::new();
        let range = |step: f64| {
            let lo = (-radius / step).ceil() as i64;
            let hi = ((radius - 1e-12) / step).floor() as i64;
            (lo, hi)
        };
        let (mlo, mhi) = range(a);
        let (nlo, nhi) = range(b);
        for m in mlo..=mhi {
            for nn in nlo..=nhi {
                points.push((m as f64 * a, nn as f64 * b));
            }
        }
        if points.is_empty() {
            return Err(Error::EmptyLattice(radius));
        }
        Ok(Self { a, b, radius, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

struct AtomShape {
    e_inv: [f64; 4],
    det_scale: f64,
    m: [f64; 3],
}

impl AtomShape {
    fn new(a: &BlockSymplectic) -> Result<Self> {
        if a.level() != 2 || a.d() != 1 {
            return Err(Error::DimensionMismatch(format!(
                "atoms need a 4x4 projection, got size {}",
                a.size()
            )));
        }
        let db = derived_blocks(a)?;
        if !is_invertible(&db.e) {
            return Err(Error::NotShiftInvertible);
        }
        let e_inv = db.e.clone().try_inverse().ok_or(Error::NotShiftInvertible)?;
        Ok(Self {
            e_inv: [e_inv[(0, 0)], e_inv[(0, 1)], e_inv[(1, 0)], e_inv[(1, 1)]],
            det_scale: db.e.determinant().abs().powf(-0.5),
            m: [db.m[(0, 0)], db.m[(0, 1)], db.m[(1, 1)]],
        })
    }

    fn warp(&self, z: (f64, f64)) -> (f64, f64) {
        (
            self.e_inv[0] * z.0 + self.e_inv[1] * z.1,
            self.e_inv[2] * z.0 + self.e_inv[3] * z.1,
        )
    }

    /// `|det E|^{-1/2} e^{-iπ M w·w}` — the scalar in front of `π(w)h`.
    fn prefactor(&self, w: (f64, f64)) -> Complex64 {
        let quad = self.m[0] * w.0 * w.0 + 2.0 * self.m[1] * w.0 * w.1 + self.m[2] * w.1 * w.1;
        Complex64::from_polar(self.det_scale, -std::f64::consts::PI * quad)
    }

    fn build_atom(&self, h: &[Complex64], dx: f64, z: (f64, f64)) -> Vec<Complex64> {
        self.build_atom_deformed(h, dx, self.warp(z))
    }

    fn build_atom_deformed(&self, h: &[Complex64], dx: f64, w: (f64, f64)) -> Vec<Complex64> {
        let n = h.len();
        let half = n as f64 / 2.0;
        let pre = self.prefactor(w);
        (0..n)
            .map(|k| {
                let t = (k as f64 - half) * dx;
                let u = (t - w.0) / dx + half;
                let shifted = interp_fractional(h, u, DEFAULT_INTERP_ORDER);
                pre * shifted * Complex64::from_polar(1.0, std::f64::consts::TAU * w.1 * t)
            })
            .collect()
    }
}

/// The metaplectic atom `π_A(z)g` at an on-grid point `z`.
pub fn atom(a: &BlockSymplectic, g: &SampledSignal, z: (f64, f64)) -> Result<SampledSignal> {
    let shape = AtomShape::new(a)?;
    for coord in [z.0, z.1] {
        let steps = coord / g.dx;
        if (steps - steps.round()).abs() > 1e-9 {
            return Err(Error::OffGrid { x: z.0, xi: z.1, dx: g.dx, dxi: g.dx });
        }
    }
    let h = deformed_window(a, g)?;
    let samples = shape.build_atom(&h.samples, g.dx, z);
    let mut out = SampledSignal::new(samples, g.dx)?;
    out.spill = h.spill;
    Ok(out)
}

/// The deformed window `δ_A g` with cross-validation: the primary generator
/// word is checked against an independent extraction from the general-path
/// distribution (divide Eq-level prefactors out of `W_A(f₀, g)`, flip the
/// STFT, invert it row by row). Disagreement beyond the tolerance raises an
/// error carrying both candidates.
pub fn deformation_window(a: &BlockSymplectic, g: &SampledSignal) -> Result<SampledSignal> {
    const TOL: f64 = 1e-2;
    let primary = deformed_window(a, g)?;
    let shape = AtomShape::new(a)?;
    let db = derived_blocks(a)?;
    let e = [db.e[(0, 0)], db.e[(0, 1)], db.e[(1, 0)], db.e[(1, 1)]];
    let det_half = db.e.determinant().abs().sqrt();

    let n = g.n();
    let dx = g.dx;
    let half = n as f64 / 2.0;
    let f0 = SampledSignal::gaussian_g0(n, dx);
    let w_grid = wigner_a_general(a, &f0, g)?;

    // Ṽ(w) = W(Ew)·|det E|^{1/2}·conj(Φ_M(w)) equals V_{δg} f₀ up to one constant.
    let mut vtilde = vec![Complex64::ZERO; n * n];
    vtilde.par_chunks_mut(n).enumerate().for_each(|(ix, row)| {
        let wx = (ix as f64 - half) * dx;
        for (iy, out) in row.iter_mut().enumerate() {
            let wxi = (iy as f64 - half) * dx;
            let zx = e[0] * wx + e[1] * wxi;
            let zy = e[2] * wx + e[3] * wxi;
            let val = interp2_fractional(
                &w_grid.values,
                n,
                zx / dx + half,
                zy / dx + half,
                DEFAULT_INTERP_ORDER,
            );
            *out = val * det_half * shape.prefactor((wx, wxi)) / shape.det_scale;
        }
    });

    // Swap window and signal: V_{f₀}h(x, ξ) = conj(Ṽ(-x, -ξ)) e^{-2πiξx}.
    let mut vswap = vec![Complex64::ZERO; n * n];
    for ix in 1..n {
        let x = (ix as f64 - half) * dx;
        for iy in 1..n {
            let xi = (iy as f64 - half) * dx;
            let src = vtilde[(n - ix) * n + (n - iy)];
            vswap[ix * n + iy] =
                src.conj() * Complex64::from_polar(1.0, -std::f64::consts::TAU * xi * x);
        }
    }
    // Invert the STFT row by row: each row is cdft_t[h·conj(f₀(·-x))], so the
    // inverse transform recovers h(t)conj(f₀(t-x)); weighting by f₀(t-x) and
    // summing over x isolates h.
    crate::engine::dft_rows(&mut vswap, n, dx, false);
    let mut numer = vec![Complex64::ZERO; n];
    let mut denom = vec![0.0_f64; n];
    for ix in 0..n {
        let shift = ix as isize - (n / 2) as isize;
        for k in 0..n {
            let src = k as isize - shift;
            if (0..n as isize).contains(&src) {
                let f0v = f0.samples[src as usize];
                numer[k] += vswap[ix * n + k] * f0v;
                denom[k] += f0v.norm_sqr();
            }
        }
    }
    let peak = denom.iter().cloned().fold(0.0_f64, f64::max);
    let validation: Vec<Complex64> = numer
        .iter()
        .zip(&denom)
        .map(|(v, d)| if *d > 1e-9 * peak { v / d } else { Complex64::ZERO })
        .collect();

    let pb = phase_blind_compare(&validation, &primary.samples)?;
    if pb.residual > TOL {
        return Err(Error::ConventionMismatch {
            residual: pb.residual,
            tol: TOL,
            primary: Box::new(primary.samples),
            validation: Box::new(validation),
        });
    }
    Ok(primary)
}

/// Result of a dual-window solve.
#[derive(Clone, Debug)]
pub struct DualWindow {
    pub gamma: SampledSignal,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// A deformed Gabor system: window, lattice, projection, and the precomputed
/// atom matrix.
///
/// The lattice parametrizes the atoms in deformed coordinates: the atom for
/// `λ` is `|det E|^{-1/2} conj(Φ_M(λ)) π(λ)h`, which is `π_A(z)g` at
/// `z = E_A λ`. Analysis coefficients are therefore samples `W_A(f, g)(E_A λ)`
/// up to the shared convention constant, and the frame property is governed
/// by the density of `λ`-space itself: `a·b < 1` gives a frame for Gaussian
/// windows under every shift-invertible projection, `a·b = 1` never does.
pub struct FrameSystem {
    pub projection: BlockSymplectic,
    pub lattice: Lattice,
    pub window: SampledSignal,
    pub deformed: SampledSignal,
    shape: AtomShape,
    atoms: Vec<Vec<Complex64>>,
    dx: f64,
    n: usize,
}

impl FrameSystem {
    pub fn new(a: &BlockSymplectic, g: &SampledSignal, lattice: Lattice) -> Result<Self> {
        if !g.is_self_dual() {
            return Err(Error::NotSelfDual(g.n() as f64 * g.dx * g.dx));
        }
        let shape = AtomShape::new(a)?;
        let h = deformed_window(a, g)?;
        let atoms: Vec<Vec<Complex64>> = lattice
            .points
            .par_iter()
            .map(|&w| shape.build_atom_deformed(&h.samples, g.dx, w))
            .collect();
        Ok(Self {
            projection: a.clone(),
            lattice,
            window: g.clone(),
            deformed: h,
            shape,
            atoms,
            dx: g.dx,
            n: g.n(),
        })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Frame coefficients `⟨f, π_A(λ)g⟩` for every lattice point.
    pub fn analysis(&self, f: &SampledSignal) -> Result<Vec<Complex64>> {
        if f.n() != self.n {
            return Err(Error::DimensionMismatch(
                "signal and frame system grids differ".into(),
            ));
        }
        Ok(self
            .atoms
            .par_iter()
            .map(|atom| {
                f.samples
                    .iter()
                    .zip(atom)
                    .map(|(a, b)| a * b.conj())
                    .sum::<Complex64>()
                    * self.dx
            })
            .collect())
    }

    fn synthesis(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        if coeffs.len() != self.atoms.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for {} lattice points",
                coeffs.len(),
                self.atoms.len()
            )));
        }
        let n = self.n;
        Ok((0..n)
            .into_par_iter()
            .map(|k| {
                let mut acc = Complex64::ZERO;
                for (c, atom) in coeffs.iter().zip(&self.atoms) {
                    acc += c * atom[k];
                }
                acc
            })
            .collect())
    }

    fn apply_operator(&self, x: &[Complex64]) -> Vec<Complex64> {
        let coeffs: Vec<Complex64> = self
            .atoms
            .par_iter()
            .map(|atom| {
                x.iter()
                    .zip(atom)
                    .map(|(a, b)| a * b.conj())
                    .sum::<Complex64>()
                    * self.dx
            })
            .collect();
        self.synthesis(&coeffs).expect("coefficient count matches atom count")
    }

    /// Frame operator `S_A f = Σ_λ ⟨f, π_A(λ)g⟩ π_A(λ)g`.
    pub fn frame_operator(&self, f: &SampledSignal) -> Result<SampledSignal> {
        if f.n() != self.n {
            return Err(Error::DimensionMismatch(
                "signal and frame system grids differ".into(),
            ));
        }
        let mut out = SampledSignal::new(self.apply_operator(&f.samples), self.dx)?;
        out.spill = f.spill;
        Ok(out)
    }

    fn norm(&self, x: &[Complex64]) -> f64 {
        (x.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx).sqrt()
    }

    fn inner(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        x.iter().zip(y).map(|(a, b)| a * b.conj()).sum::<Complex64>() * self.dx
    }

    /// Power-iteration estimate of the largest eigenvalue of `S_A`.
    pub fn upper_bound(&self) -> f64 {
        let n = self.n;
        let half = n as f64 / 2.0;
        let mut v: Vec<Complex64> = (0..n)
            .map(|k| {
                let t = (k as f64 - half) * self.dx;
                Complex64::new((-t * t).exp(), 0.3 * (1.7 * t).sin())
            })
            .collect();
        let mut estimate = 0.0;
        for _ in 0..POWER_ITERS {
            let sv = self.apply_operator(&v);
            let nrm = self.norm(&sv);
            if nrm == 0.0 {
                return 0.0;
            }
            estimate = self.inner(&sv, &v).re / self.inner(&v, &v).re;
            for (a, b) in v.iter_mut().zip(&sv) {
                *a = b / nrm;
            }
        }
        estimate
    }

    fn cg_solve(
        &self,
        rhs: &[Complex64],
        tol: f64,
        max_iters: usize,
    ) -> std::result::Result<(Vec<Complex64>, usize, f64), (usize, f64)> {
        let mut x = vec![Complex64::ZERO; rhs.len()];
        let mut r = rhs.to_vec();
        let mut p = r.clone();
        let rhs_norm = self.norm(rhs);
        if rhs_norm == 0.0 {
            return Ok((x, 0, 0.0));
        }
        let mut rs_old: f64 = r.iter().map(|v| v.norm_sqr()).sum();
        for iter in 0..max_iters {
            let res = self.norm(&r) / rhs_norm;
            if res <= tol {
                return Ok((x, iter, res));
            }
            let sp = self.apply_operator(&p);
            let denom = self.inner(&sp, &p).re;
            if denom <= 0.0 {
                return Err((iter, res));
            }
            let alpha = rs_old * self.dx / denom;
            for (xv, pv) in x.iter_mut().zip(&p) {
                *xv += pv * alpha;
            }
            for (rv, spv) in r.iter_mut().zip(&sp) {
                *rv -= spv * alpha;
            }
            let rs_new: f64 = r.iter().map(|v| v.norm_sqr()).sum();
            let beta = rs_new / rs_old;
            for (pv, rv) in p.iter_mut().zip(&r) {
                *pv = rv + *pv * beta;
            }
            rs_old = rs_new;
        }
        let res = self.norm(&r) / rhs_norm;
        if res <= tol {
            Ok((x, max_iters, res))
        } else {
            Err((max_iters, res))
        }
    }

    /// Inverse-power estimate of the smallest eigenvalue of `S_A`; fails when
    /// the inner solves stagnate (the not-a-frame signature).
    fn lower_bound(&self) -> std::result::Result<f64, (usize, f64)> {
        let n = self.n;
        let half = n as f64 / 2.0;
        let mut v: Vec<Complex64> = (0..n)
            .map(|k| {
                let t = (k as f64 - half) * self.dx;
                Complex64::new((-0.5 * t * t).exp() * (0.9 * t).cos(), (1.3 * t).sin().powi(2) * 0.2)
            })
            .collect();
        let nrm = self.norm(&v);
        for x in v.iter_mut() {
            *x /= nrm;
        }
        let mut mu = 0.0;
        for _ in 0..INVERSE_POWER_ITERS {
            let (u, _, _) = self.cg_solve(&v, 1e-8, 200)?;
            mu = self.inner(&u, &v).re.abs();
            let nrm = self.norm(&u);
            if nrm == 0.0 {
                return Err((0, f64::INFINITY));
            }
            for (a, b) in v.iter_mut().zip(&u) {
                *a = b / nrm;
            }
        }
        Ok(if mu > 0.0 { 1.0 / mu } else { 0.0 })
    }

    /// Canonical dual window `γ_A = δ_A⁻¹ S_A⁻¹ δ_A g` with truncation-level
    /// frame-bound estimates. Raises the frame diagnostic when the system is
    /// not a frame at this truncation (stagnating solves or a degenerate
    /// bound ratio).
    pub fn dual_window(&self) -> Result<DualWindow> {
        let upper = self.upper_bound();
        let lower = match self.lower_bound() {
            Ok(l) => l,
            Err((iterations, residual)) => {
                return Err(Error::NotAFrame {
                    iterations,
                    residual,
                    lower: 0.0,
                    upper,
                });
            }
        };
        if lower <= FRAME_RATIO_FLOOR * upper {
            return Err(Error::NotAFrame {
                iterations: 0,
                residual: 0.0,
                lower,
                upper,
            });
        }
        let (x, iterations, residual) =
            match self.cg_solve(&self.deformed.samples, CG_TOL, CG_MAX_ITERS) {
                Ok(v) => v,
                Err((iterations, residual)) => {
                    return Err(Error::NotAFrame {
                        iterations,
                        residual,
                        lower,
                        upper,
                    });
                }
            };
        let solved = SampledSignal::new(x, self.dx)?;
        let gamma = deformed_window_inverse(&self.projection, &solved)?;
        Ok(DualWindow {
            gamma,
            lower,
            upper,
            iterations,
            residual,
        })
    }

    /// Synthesis `Σ_λ coeffs(λ) π_A(λ)γ` with an arbitrary synthesis window.
    pub fn reconstruct(
        &self,
        coeffs: &[Complex64],
        gamma: &SampledSignal,
    ) -> Result<SampledSignal> {
        if coeffs.len() != self.lattice.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for {} lattice points",
                coeffs.len(),
                self.lattice.len()
            )));
        }
        let h_gamma = deformed_window(&self.projection, gamma)?;
        let gamma_atoms: Vec<Vec<Complex64>> = self
            .lattice
            .points
            .par_iter()
            .map(|&w| self.shape.build_atom_deformed(&h_gamma.samples, self.dx, w))
            .collect();
        let n = self.n;
        let samples: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map(|k| {
                let mut acc = Complex64::ZERO;
                for (c, atom) in coeffs.iter().zip(&gamma_atoms) {
                    acc += c * atom[k];
                }
                acc
            })
            .collect();
        SampledSignal::new(samples, self.dx)
    }
}

/// Riemann-sum inversion `f = (1/⟨γ, g⟩) ∫ W_A(f, g)(z) π_A(z)γ dz` over the
/// full grid; the distribution is evaluated through the fast path so its
/// convention constant cancels against the atoms'.
pub fn inversion_integral(
    a: &BlockSymplectic,
    g: &SampledSignal,
    gamma: &SampledSignal,
    f: &SampledSignal,
) -> Result<SampledSignal> {
    let pairing = gamma.inner(g);
    if pairing.norm() <= 1e-8 {
        return Err(Error::NearOrthogonal(pairing.norm()));
    }
    let shape = AtomShape::new(a)?;
    let w = wigner_a_fast(a, f, g)?;
    let h_gamma = deformed_window(a, gamma)?;
    let n = f.n();
    let half = n as f64 / 2.0;
    let dx = f.dx;
    let weight = dx * dx; // Δx·Δξ on the self-dual grid
    let samples = (0..n * n)
        .into_par_iter()
        .fold(
            || vec![Complex64::ZERO; n],
            |mut acc, idx| {
                let ix = idx / n;
                let iy = idx % n;
                let wv = w.values[idx];
                if wv.norm_sqr() > 1e-30 {
                    let z = ((ix as f64 - half) * dx, (iy as f64 - half) * dx);
                    let wpt = shape.warp(z);
                    let coeff = wv * shape.prefactor(wpt) * weight;
                    for (k, out) in acc.iter_mut().enumerate() {
                        let t = (k as f64 - half) * dx;
                        let u = (t - wpt.0) / dx + half;
                        let shifted = interp_fractional(&h_gamma.samples, u, DEFAULT_INTERP_ORDER);
                        *out += coeff
                            * shifted
                            * Complex64::from_polar(1.0, std::f64::consts::TAU * wpt.1 * t);
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![Complex64::ZERO; n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                a
            },
        );
    let samples: Vec<Complex64> = samples.into_iter().map(|v| v / pairing).collect();
    SampledSignal::new(samples, dx)
}

/// Per-z consistency of atoms with the general-path distribution: fits the
/// ratio `W_A(f, g)(z) / ⟨f, π_A(z)g⟩` over a block of central grid points
/// and returns the variance of the fitted unit constants.
pub fn atom_consistency_variance(
    a: &BlockSymplectic,
    f: &SampledSignal,
    g: &SampledSignal,
) -> Result<f64> {
    let w = wigner_a_general(a, f, g)?;
    let shape = AtomShape::new(a)?;
    let h = deformed_window(a, g)?;
    let n = f.n();
    let half = n as f64 / 2.0;
    let dx = f.dx;
    let norm = w.values.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
    let mut ratios = Vec::new();
    for ix in (n / 2 - 16..n / 2 + 16).step_by(4) {
        for iy in (n / 2 - 16..n / 2 + 16).step_by(4) {
            let wv = w.value(ix, iy);
            if wv.norm() < 0.05 * norm {
                continue;
            }
            let z = ((ix as f64 - half) * dx, (iy as f64 - half) * dx);
            let atom = shape.build_atom(&h.samples, dx, z);
            let ip = f
                .samples
                .iter()
                .zip(&atom)
                .map(|(a, b)| a * b.conj())
                .sum::<Complex64>()
                * dx;
            if ip.norm() > 1e-12 {
                let ratio = wv / ip;
                ratios.push(ratio / ratio.norm());
            }
        }
    }
    if ratios.len() < 4 {
        return Err(Error::ZeroInput("atom consistency sample set"));
    }
    let mean = ratios.iter().sum::<Complex64>() / ratios.len() as f64;
    Ok(ratios.iter().map(|r| (r - mean).norm_sqr()).sum::<f64>() / ratios.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::relative_l2_error;
    use crate::symplectic::{stft_projection, tau_projection};

    const N: usize = 256;
    const DX: f64 = 1.0 / 16.0;

    fn g0() -> SampledSignal {
        SampledSignal::gaussian_g0(N, DX)
    }

    fn wide_gaussian() -> SampledSignal {
        let mut s = SampledSignal::from_fn(N, DX, |x| {
            Complex64::new((-std::f64::consts::PI * (x / 2.5) * (x / 2.5)).exp(), 0.0)
        })
        .unwrap();
        let nrm = s.l2_norm();
        for v in s.samples.iter_mut() {
            *v /= nrm;
        }
        s
    }

    #[test]
    fn test_lattice_construction_and_errors() {
        let lat = Lattice::new(0.5, 0.5, N, DX).unwrap();
        assert_eq!(lat.len(), 32 * 32);
        assert!(matches!(
            Lattice::new(0.3 * DX, 0.5, N, DX),
            Err(Error::BadLatticeStep { .. })
        ));
        assert!(matches!(
            Lattice::new(-0.5, 0.5, N, DX),
            Err(Error::BadLatticeStep { .. })
        ));
    }

    #[test]
    fn test_atom_at_origin_is_deformed_window() {
        let a = stft_projection(1);
        let g = g0();
        let at = atom(&a, &g, (0.0, 0.0)).unwrap();
        let err = relative_l2_error(&at.samples, &g.samples);
        assert!(err < 1e-10, "origin atom error {err:.3e}");
    }

    #[test]
    fn test_atom_norm_scales_with_det_e() {
        let g = g0();
        for a in [stft_projection(1), tau_projection(0.5, 1).unwrap()] {
            let det_e = derived_blocks(&a).unwrap().e.determinant().abs();
            let at = atom(&a, &g, (0.5, -0.25)).unwrap();
            let expected = g.l2_norm() * det_e.powf(-0.5);
            assert!(
                (at.l2_norm() - expected).abs() < 1e-6,
                "atom norm {} vs expected {}",
                at.l2_norm(),
                expected
            );
        }
    }

    #[test]
    fn test_atom_rejects_off_grid_points() {
        let a = stft_projection(1);
        assert!(matches!(
            atom(&a, &g0(), (0.51 * DX, 0.0)),
            Err(Error::OffGrid { .. })
        ));
    }

    #[test]
    fn test_frame_operator_self_adjoint_and_positive() {
        use rand::rngs::StdRng;
        use rand::SeedableRng;
        let mut rng = StdRng::seed_from_u64(3);
        let a = stft_projection(1);
        let lat = Lattice::new(0.5, 0.5, N, DX).unwrap();
        let sys = FrameSystem::new(&a, &g0(), lat).unwrap();
        let f1 = crate::random::random_gaussian_signal(N, DX, &mut rng);
        let f2 = crate::random::random_gaussian_signal(N, DX, &mut rng);
        let sf1 = sys.frame_operator(&f1).unwrap();
        let sf2 = sys.frame_operator(&f2).unwrap();
        let lhs = sf1.inner(&f2);
        let rhs = f1.inner(&sf2);
        assert!(
            (lhs - rhs).norm() < 1e-8 * lhs.norm().max(1.0),
            "self-adjointness residual {:.3e}",
            (lhs - rhs).norm()
        );
        assert!(sf1.inner(&f1).re > 0.0);
        let zero = SampledSignal::from_fn(N, DX, |_| Complex64::ZERO).unwrap();
        assert!(sys.frame_operator(&zero).unwrap().l2_norm() == 0.0);
    }

    #[test]
    fn test_dual_window_reconstruction_stft_projection() {
        let a = stft_projection(1);
        let lat = Lattice::new(0.5, 0.5, N, DX).unwrap();
        let sys = FrameSystem::new(&a, &g0(), lat).unwrap();
        let dual = sys.dual_window().unwrap();
        assert!(dual.lower > 0.0 && dual.lower <= dual.upper);
        let f = wide_gaussian();
        let coeffs = sys.analysis(&f).unwrap();
        let rec = sys.reconstruct(&coeffs, &dual.gamma).unwrap();
        let err = relative_l2_error(&rec.samples, &f.samples);
        assert!(err < 1e-8, "reconstruction error {err:.3e}");
    }

    #[test]
    fn test_dual_window_reconstruction_wigner_projection() {
        let a = tau_projection(0.5, 1).unwrap();
        let lat = Lattice::new(0.5, 0.5, N, DX).unwrap();
        let sys = FrameSystem::new(&a, &g0(), lat).unwrap();
        let dual = sys.dual_window().unwrap();
        let f = wide_gaussian();
        let coeffs = sys.analysis(&f).unwrap();
        let rec = sys.reconstruct(&coeffs, &dual.gamma).unwrap();
        let err = relative_l2_error(&rec.samples, &f.samples);
        assert!(err < 1e-6, "reconstruction error {err:.3e}");
    }

    #[test]
    fn test_critical_density_raises_frame_diagnostic() {
        let a = stft_projection(1);
        let lat = Lattice::new(1.0, 1.0, N, DX).unwrap();
        let sys = FrameSystem::new(&a, &g0(), lat).unwrap();
        assert!(matches!(sys.dual_window(), Err(Error::NotAFrame { .. })));
    }

    #[test]
    fn test_reconstruction_improves_with_radius() {
        let a = stft_projection(1);
        let f = wide_gaussian();
        let g = g0();
        let full = FrameSystem::new(&a, &g, Lattice::new(0.5, 0.5, N, DX).unwrap()).unwrap();
        let dual = full.dual_window().unwrap();
        let mut errors = Vec::new();
        for radius in [3.0, 5.0, 8.0] {
            let lat = Lattice::with_radius(0.5, 0.5, N, DX, radius).unwrap();
            let sys = FrameSystem::new(&a, &g, lat).unwrap();
            let coeffs = sys.analysis(&f).unwrap();
            let rec = sys.reconstruct(&coeffs, &dual.gamma).unwrap();
            errors.push(relative_l2_error(&rec.samples, &f.samples));
        }
        assert!(
            errors[0] > errors[1] && errors[1] > errors[2],
            "errors not monotone: {errors:?}"
        );
    }

    #[test]
    fn test_deformation_window_validation_agrees() {
        let g = g0();
        for a in [
            stft_projection(1),
            tau_projection(0.5, 1).unwrap(),
            tau_projection(0.3, 1).unwrap(),
        ] {
            let h = deformation_window(&a, &g).unwrap();
            assert!((h.l2_norm() - g.l2_norm()).abs() < 1e-6);
        }
    }

    #[test]
    fn test_deformed_window_unitary() {
        let g = g0();
        let a = tau_projection(0.3, 1).unwrap();
        let h = deformed_window(&a, &g).unwrap();
        assert!(
            (h.l2_norm() - g.l2_norm()).abs() < 1e-6,
            "norm drift {:.3e}",
            (h.l2_norm() - g.l2_norm()).abs()
        );
    }

    #[test]
    fn test_inversion_integral_stft_projection() {
        let a = stft_projection(1);
        let g = g0();
        let rec = inversion_integral(&a, &g, &g, &g).unwrap();
        let err = relative_l2_error(&rec.samples, &g.samples);
        assert!(err < 1e-3, "inversion integral error {err:.3e}");
    }

    #[test]
    fn test_inversion_integral_wigner_projection() {
        let a = tau_projection(0.5, 1).unwrap();
        let g = g0();
        let f = SampledSignal::from_fn(N, DX, |x| {
            Complex64::from_polar(
                2.0_f64.powf(0.25) * (-std::f64::consts::PI * x * x).exp(),
                std::f64::consts::TAU * 0.5 * x,
            )
        })
        .unwrap();
        let rec = inversion_integral(&a, &g, &g, &f).unwrap();
        let err = relative_l2_error(&rec.samples, &f.samples);
        assert!(err < 1e-3, "inversion integral error {err:.3e}");
    }

    #[test]
    fn test_inversion_rejects_orthogonal_windows() {
        let a = stft_projection(1);
        let g = g0();
        let odd = SampledSignal::from_fn(N, DX, |x| {
            Complex64::new(x * (-std::f64::consts::PI * x * x).exp(), 0.0)
        })
        .unwrap();
        assert!(matches!(
            inversion_integral(&a, &g, &odd, &g),
            Err(Error::NearOrthogonal(_))
        ));
    }

    #[test]
    fn test_atom_consistency_constant_is_global() {
        let var = atom_consistency_variance(&tau_projection(0.5, 1).unwrap(), &g0(), &g0()).unwrap();
        assert!(var < 1e-6, "per-z constant variance {var:.3e}");
    }
}
