//! Time-frequency distribution grids.
//!
//! Each named distribution has a direct evaluator (windowed products plus
//! centered DFTs, or explicit quadratic phases) and a symplectic projection
//! under [`kind_projection`]. The general path [`wigner_a_general`] evaluates
//! `W_A(f, g) = Â(f ⊗ conj(g))` for *any* level-2 projection by pushing the
//! tensor grid through the generator word of `A`; the fast path
//! [`wigner_a_fast`] uses the rescaled-window identity
//!
//! ```text
//! W_A(f, g)(z) = c_A |det E_A|^{-1/2} Φ_{M_A}(E_A⁻¹z) V_{δ_A g} f(E_A⁻¹z)
//! ```
//!
//! available when the shift block `E_A` is invertible, with the deformed
//! window `δ_A g = F(conj(Ĝ_A(conj g)))` computed through the generator word
//! of `G_A`. The constant `c_A` has unit modulus and is never pinned down:
//! every cross-path comparison either fits a single global phase or compares
//! moduli.
//!
//! All evaluators require self-dual grids (`N·Δx² = 1`) so that time and
//! frequency axes coincide and every Fourier step maps the grid to itself.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::engine::{
    apply_1d, apply_1d_inverse, apply_2d, centered_dft, centered_dft_2d, centered_idft, dft_rows,
    factorize, interp2_fractional, interp_fractional, phase_blind_compare, Factorization, Grid2,
    SampledSignal, DEFAULT_INTERP_ORDER,
};
use crate::error::{Error, Result};
use crate::symplectic::{
    ambiguity_projection, derived_blocks, hbar_projection, is_invertible, stft_projection,
    tau_projection, BlockSymplectic,
};

/// The named distributions exposed by the command surface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DistributionKind {
    /// Short-time Fourier transform `V_g f`.
    Stft,
    /// `|V_g f|²`.
    Spectrogram,
    /// Wigner distribution (the `τ = 1/2` member).
    Wigner,
    /// `τ`-Wigner family `∫ f(x+τt) conj(g(x-(1-τ)t)) e^{-2πitξ} dt`.
    Tau(f64),
    /// Rihaczek distribution `f(x) conj(ĝ(ξ)) e^{-2πixξ}` (the `τ = 0` member).
    Rihaczek,
    /// Cross-ambiguity `∫ f(t+x/2) conj(g(t-x/2)) e^{-2πitξ} dt`.
    Ambiguity,
    /// Semiclassical Wigner transform with parameter `ħ > 0`.
    Hbar(f64),
    /// Two-window spectrogram `V_φ f · conj(V_ψ g)`.
    GenSpectrogram,
    /// Composite distribution `(id ⊗ Ŝ) T_{M_{1/2}} (Ŝ₁f ⊗ conj(Ŝ₂g))`.
    Composite,
}

/// The projection matrix a named distribution corresponds to. `Spectrogram`
/// and `GenSpectrogram` return the STFT projection their factors are built
/// from; `Composite` needs the three operator matrices and is handled by
/// [`crate::symplectic::composite_projection`] directly.
pub fn kind_projection(kind: DistributionKind, d: usize) -> Result<BlockSymplectic> {
    match kind {
        DistributionKind::Stft
        | DistributionKind::Spectrogram
        | DistributionKind::GenSpectrogram => Ok(stft_projection(d)),
        DistributionKind::Wigner => tau_projection(0.5, d),
        DistributionKind::Tau(tau) => tau_projection(tau, d),
        DistributionKind::Rihaczek => tau_projection(0.0, d),
        DistributionKind::Ambiguity => Ok(ambiguity_projection(d)),
        DistributionKind::Hbar(hbar) => hbar_projection(hbar, d),
        DistributionKind::Composite => Err(Error::Domain(
            "composite projections are built from their three operator matrices".into(),
        )),
    }
}

/// Evaluates a named distribution through its dedicated formula.
/// `GenSpectrogram` and `Composite` carry extra data (a second window pair,
/// factor matrices) and have their own entry points.
pub fn distribution_grid(
    kind: DistributionKind,
    f: &SampledSignal,
    g: &SampledSignal,
) -> Result<Grid2> {
    match kind {
        DistributionKind::Stft => stft_grid(f, g),
        DistributionKind::Spectrogram => spectrogram_grid(f, g),
        DistributionKind::Wigner => tau_grid(f, g, 0.5),
        DistributionKind::Tau(tau) => tau_grid(f, g, tau),
        DistributionKind::Rihaczek => rihaczek_grid(f, g),
        DistributionKind::Ambiguity => ambiguity_grid(f, g),
        DistributionKind::Hbar(hbar) => hbar_grid(f, g, hbar),
        DistributionKind::GenSpectrogram => Err(Error::Domain(
            "the two-window spectrogram needs its analysis windows; call genspec_grid".into(),
        )),
        DistributionKind::Composite => Err(Error::Domain(
            "the composite distribution needs its operator matrices; call composite_grid".into(),
        )),
    }
}

fn check_pair(f: &SampledSignal, g: &SampledSignal) -> Result<usize> {
    if f.n() != g.n() || (f.dx - g.dx).abs() > 1e-12 * f.dx {
        return Err(Error::DimensionMismatch(
            "signal pair must share N and Δx".into(),
        ));
    }
    if !f.is_self_dual() {
        return Err(Error::NotSelfDual(f.n() as f64 * f.dx * f.dx));
    }
    Ok(f.n())
}

/// Short-time Fourier transform `V_g f(x, ξ) = ∫ f(t) conj(g(t-x)) e^{-2πiξt} dt`
/// on the self-dual grid; rows are time positions, columns frequencies.
pub fn stft_grid(f: &SampledSignal, g: &SampledSignal) -> Result<Grid2> {
    let n = check_pair(f, g)?;
    let mut values = vec![Complex64::ZERO; n * n];
    values.par_chunks_mut(n).enumerate().for_each(|(ix, row)| {
        let shift = ix as isize - (n / 2) as isize;
        for (k, out) in row.iter_mut().enumerate() {
            let gi = k as isize - shift;
            *out = if (0..n as isize).contains(&gi) {
                f.samples[k] * g.samples[gi as usize].conj()
            } else {
                Complex64::ZERO
            };
        }
    });
    dft_rows(&mut values, n, f.dx, true);
    let mut grid = Grid2::new(n, f.dx, values)?;
    grid.spill = f.spill + g.spill;
    Ok(grid)
}

/// `τ`-Wigner distribution
/// `W_τ(f, g)(x, ξ) = ∫ f(x+τt) conj(g(x-(1-τ)t)) e^{-2πitξ} dt`.
pub fn tau_grid(f: &SampledSignal, g: &SampledSignal, tau: f64) -> Result<Grid2> {
    if !tau.is_finite() {
        return Err(Error::Domain(format!("tau must be finite, got {tau}")));
    }
    let n = check_pair(f, g)?;
    let dx = f.dx;
    let half = n as f64 / 2.0;
    let mut values = vec![Complex64::ZERO; n * n];
    values.par_chunks_mut(n).enumerate().for_each(|(ix, row)| {
        let x = (ix as f64 - half) * dx;
        for (k, out) in row.iter_mut().enumerate() {
            let t = (k as f64 - half) * dx;
            let uf = (x + tau * t) / dx + half;
            let ug = (x - (1.0 - tau) * t) / dx + half;
            let fv = interp_fractional(&f.samples, uf, DEFAULT_INTERP_ORDER);
            let gv = interp_fractional(&g.samples, ug, DEFAULT_INTERP_ORDER);
            *out = fv * gv.conj();
        }
    });
    dft_rows(&mut values, n, dx, true);
    let mut grid = Grid2::new(n, dx, values)?;
    grid.spill = f.spill + g.spill;
    Ok(grid)
}

/// Rihaczek distribution `f(x) conj(ĝ(ξ)) e^{-2πixξ}`, the `τ = 0` member in
/// product form.
pub fn rihaczek_grid(f: &SampledSignal, g: &SampledSignal) -> Result<Grid2> {
    let n = check_pair(f, g)?;
    let dx = f.dx;
    let half = n as f64 / 2.0;
    let ghat = centered_dft(g);
    let mut values = vec![Complex64::ZERO; n * n];
    values.par_chunks_mut(n).enumerate().for_each(|(ix, row)| {
        let x = (ix as f64 - half) * dx;
        let fv = f.samples[ix];
        for (j, out) in row.iter_mut().enumerate() {
            let xi = (j as f64 - half) * dx;
            let phase = Complex64::from_polar(1.0, -std::f64::consts::TAU * x * xi);
            *out = fv * ghat.samples[j].conj() * phase;
        }
    });
    let mut grid = Grid2::new(n, dx, values)?;
    grid.spill = f.spill + g.spill;
    Ok(grid)
}

/// Cross-ambiguity `A(f, g)(x, ξ) = ∫ f(t+x/2) conj(g(t-x/2)) e^{-2πitξ} dt`.
pub fn ambiguity_grid(f: &SampledSignal, g: &SampledSignal) -> Result<Grid2> {
    let n = check_pair(f, g)?;
    let dx = f.dx;
    let half = n as f64 / 2.0;
    let mut values = vec![Complex64::ZERO; n * n];
    values.par_chunks_mut(n).enumerate().for_each(|(ix, row)| {
        let x = (ix as f64 - half) * dx;
        for (k, out) in row.iter_mut().enumerate() {
            let t = (k as f64 - half) * dx;
            let uf = (t + x / 2.0) / dx + half;
            let ug = (t - x / 2.0) / dx + half;
            let fv = interp_fractional(&f.samples, uf, DEFAULT_INTERP_ORDER);
            let gv = interp_fractional(&g.samples, ug, DEFAULT_INTERP_ORDER);
            *out = fv * gv.conj();
        }
    });
    dft_rows(&mut values, n, dx, true);
    let mut grid = Grid2::new(n, dx, values)?;
    grid.spill = f.spill + g.spill;
    Ok(grid)
}

/// Spectrogram `|V_g f|²`.
pub fn spectrogram_grid(f: &SampledSignal, g: &SampledSignal) -> Result<Grid2> {
    let mut grid = stft_grid(f, g)?;
    for v in grid.values.iter_mut() {
        *v = Complex64::new(v.norm_sqr(), 0.0);
    }
    Ok(grid)
}

/// Two-window spectrogram `V_φ f · conj(V_ψ g)`.
pub fn genspec_grid(
    f: &SampledSignal,
    g: &SampledSignal,
    phi: &SampledSignal,
    psi: &SampledSignal,
) -> Result<Grid2> {
    let a = stft_grid(f, phi)?;
    let b = stft_grid(g, psi)?;
    let mut grid = a;
    for (v, w) in grid.values.iter_mut().zip(&b.values) {
        *v *= w.conj();
    }
    grid.spill += b.spill;
    Ok(grid)
}

/// Semiclassical Wigner transform
/// `(2πħ)^{-1/2} ∫ f(u+x/2) conj(g(u-x/2)) e^{-iuξ/ħ} du`, evaluated by a
/// direct discrete sum at the exact frequencies `ξ_j/ħ` (no FFT padding
/// tricks, so any `ħ > 0` is exact up to sampling error).
pub fn hbar_grid(f: &SampledSignal, g: &SampledSignal, hbar: f64) -> Result<Grid2> {
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::Domain(format!("hbar must be positive, got {hbar}")));
    }
    let n = check_pair(f, g)?;
    let dx = f.dx;
    let half = n as f64 / 2.0;
    // kernel[j*n + k] = e^{-i u_k ξ_j / ħ}
    let kernel: Vec<Complex64> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let j = idx / n;
            let k = idx % n;
            let u = (k as f64 - half) * dx;
            let xi = (j as f64 - half) * dx;
            Complex64::from_polar(1.0, -u * xi / hbar)
        })
        .collect();
    let scale = dx / (std::f64::consts::TAU * hbar).sqrt();
    let mut values = vec![Complex64::ZERO; n * n];
    values.par_chunks_mut(n).enumerate().for_each(|(ix, row)| {
        let x = (ix as f64 - half) * dx;
        let mut h = vec![Complex64::ZERO; n];
        for (k, hv) in h.iter_mut().enumerate() {
            let u = (k as f64 - half) * dx;
            let uf = (u + x / 2.0) / dx + half;
            let ug = (u - x / 2.0) / dx + half;
            *hv = interp_fractional(&f.samples, uf, DEFAULT_INTERP_ORDER)
                * interp_fractional(&g.samples, ug, DEFAULT_INTERP_ORDER).conj();
        }
        for (j, out) in row.iter_mut().enumerate() {
            let krow = &kernel[j * n..(j + 1) * n];
            let mut acc = Complex64::ZERO;
            for (hv, kv) in h.iter().zip(krow) {
                acc += hv * kv;
            }
            *out = acc * scale;
        }
    });
    let mut grid = Grid2::new(n, dx, values)?;
    grid.spill = f.spill + g.spill;
    Ok(grid)
}

/// Applies a 1-dimensional generator word along the second axis of a grid
/// (each row treated as a signal).
fn apply_word_second_axis(grid: &mut Grid2, word: &Factorization) -> Result<()> {
    if word.dim != 1 {
        return Err(Error::DimensionMismatch(
            "second-axis application needs a 1-dimensional word".into(),
        ));
    }
    let n = grid.n;
    let dx = grid.step;
    let rows: Result<Vec<Vec<Complex64>>> = grid
        .values
        .par_chunks(n)
        .map(|row| {
            let sig = SampledSignal::new(row.to_vec(), dx)?;
            Ok(apply_1d(word, &sig)?.samples)
        })
        .collect();
    let rows = rows?;
    for (ix, row) in rows.into_iter().enumerate() {
        grid.values[ix * n..(ix + 1) * n].copy_from_slice(&row);
    }
    Ok(())
}

/// Composite distribution `(id ⊗ Ŝ) T_{M_{1/2}} (Ŝ₁f ⊗ conj(Ŝ₂g))` with
/// `M_{1/2}(x, t) = (x + t/2, x - t/2)`; `s`, `s1`, `s2` are level-1
/// projections acting on 1-dimensional signals.
pub fn composite_grid(
    f: &SampledSignal,
    g: &SampledSignal,
    s: &BlockSymplectic,
    s1: &BlockSymplectic,
    s2: &BlockSymplectic,
) -> Result<Grid2> {
    let n = check_pair(f, g)?;
    for (name, m) in [("S", s), ("S1", s1), ("S2", s2)] {
        if m.level() != 1 || m.d() != 1 {
            return Err(Error::DimensionMismatch(format!(
                "{name} must be a 2x2 operator matrix"
            )));
        }
    }
    let uf = apply_1d(&factorize(s1)?, f)?;
    let vg = apply_1d(&factorize(s2)?, g)?;
    let tensor = Grid2::tensor(&uf, &vg, true)?;
    let dx = tensor.step;
    let half = n as f64 / 2.0;
    let mut values = vec![Complex64::ZERO; n * n];
    values.par_chunks_mut(n).enumerate().for_each(|(ix, row)| {
        let x = (ix as f64 - half) * dx;
        for (k, out) in row.iter_mut().enumerate() {
            let t = (k as f64 - half) * dx;
            let ux = (x + t / 2.0) / dx + half;
            let uy = (x - t / 2.0) / dx + half;
            *out = interp2_fractional(&tensor.values, n, ux, uy, DEFAULT_INTERP_ORDER);
        }
    });
    let mut grid = Grid2::new(n, dx, values)?;
    grid.spill = tensor.spill;
    apply_word_second_axis(&mut grid, &factorize(s)?)?;
    Ok(grid)
}

/// General path: `W_A(f, g) = Â(f ⊗ conj(g))` through the generator word of
/// `A`, for any level-2 projection with `d = 1`.
pub fn wigner_a_general(
    a: &BlockSymplectic,
    f: &SampledSignal,
    g: &SampledSignal,
) -> Result<Grid2> {
    if a.level() != 2 || a.d() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "grid path needs a 4x4 projection, got size {}",
            a.size()
        )));
    }
    check_pair(f, g)?;
    let word = factorize(a)?;
    let tensor = Grid2::tensor(f, g, true)?;
    apply_2d(&word, &tensor)
}

/// The deformed window `δ_A g = F(conj(Ĝ_A(conj g)))` of the fast path;
/// requires the shift block `E_A` to be invertible.
pub fn deformed_window(a: &BlockSymplectic, g: &SampledSignal) -> Result<SampledSignal> {
    let db = derived_blocks(a)?;
    let g_mat = db.g.ok_or(Error::NotShiftInvertible)?;
    let gs = BlockSymplectic::with_tol(g_mat, 1, 1e-7)?;
    let word = factorize(&gs)?;
    let conj_g = SampledSignal {
        samples: g.samples.iter().map(|v| v.conj()).collect(),
        dx: g.dx,
        spill: g.spill,
    };
    let mapped = apply_1d(&word, &conj_g)?;
    let reconj = SampledSignal {
        samples: mapped.samples.iter().map(|v| v.conj()).collect(),
        dx: mapped.dx,
        spill: mapped.spill,
    };
    Ok(centered_dft(&reconj))
}

/// Exact inverse of [`deformed_window`] (`conj ∘ Ĝ_A⁻¹ ∘ conj ∘ F⁻¹`).
pub fn deformed_window_inverse(a: &BlockSymplectic, h: &SampledSignal) -> Result<SampledSignal> {
    let db = derived_blocks(a)?;
    let g_mat = db.g.ok_or(Error::NotShiftInvertible)?;
    let gs = BlockSymplectic::with_tol(g_mat, 1, 1e-7)?;
    let word = factorize(&gs)?;
    let unhat = centered_idft(h);
    let conj_h = SampledSignal {
        samples: unhat.samples.iter().map(|v| v.conj()).collect(),
        dx: unhat.dx,
        spill: unhat.spill,
    };
    let mapped = apply_1d_inverse(&word, &conj_h)?;
    Ok(SampledSignal {
        samples: mapped.samples.iter().map(|v| v.conj()).collect(),
        dx: mapped.dx,
        spill: mapped.spill,
    })
}

/// Fast path through the rescaled-window identity, with the convention
/// constant set to 1: `|det E|^{-1/2} Φ_M(E⁻¹z) V_{δ_A g} f(E⁻¹z)`.
pub fn wigner_a_fast(a: &BlockSymplectic, f: &SampledSignal, g: &SampledSignal) -> Result<Grid2> {
    if a.level() != 2 || a.d() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "fast path needs a 4x4 projection, got size {}",
            a.size()
        )));
    }
    let n = check_pair(f, g)?;
    let db = derived_blocks(a)?;
    if !is_invertible(&db.e) {
        return Err(Error::NotShiftInvertible);
    }
    let e_inv = db.e.clone().try_inverse().ok_or(Error::NotShiftInvertible)?;
    let det_e = db.e.determinant();
    let scale = det_e.abs().powf(-0.5);
    let h = deformed_window(a, g)?;
    let v = stft_grid(f, &h)?;
    let m = &db.m;
    let (m00, m01, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
    let (e00, e01, e10, e11) = (e_inv[(0, 0)], e_inv[(0, 1)], e_inv[(1, 0)], e_inv[(1, 1)]);
    let dx = f.dx;
    let half = n as f64 / 2.0;
    let mut values = vec![Complex64::ZERO; n * n];
    values.par_chunks_mut(n).enumerate().for_each(|(ix, row)| {
        let x = (ix as f64 - half) * dx;
        for (iy, out) in row.iter_mut().enumerate() {
            let xi = (iy as f64 - half) * dx;
            let wx = e00 * x + e01 * xi;
            let wxi = e10 * x + e11 * xi;
            let phase = std::f64::consts::PI
                * (m00 * wx * wx + 2.0 * m01 * wx * wxi + m11 * wxi * wxi);
            let vv = interp2_fractional(
                &v.values,
                n,
                wx / dx + half,
                wxi / dx + half,
                DEFAULT_INTERP_ORDER,
            );
            *out = vv * Complex64::from_polar(scale, phase);
        }
    });
    let mut grid = Grid2::new(n, dx, values)?;
    grid.spill = v.spill;
    Ok(grid)
}

/// Fast path when the shift block is invertible and well conditioned, general
/// path otherwise.
pub fn wigner_a_auto(a: &BlockSymplectic, f: &SampledSignal, g: &SampledSignal) -> Result<Grid2> {
    let db = derived_blocks(a)?;
    let sv = db.e.clone().svd(false, false).singular_values;
    let largest = sv.iter().cloned().fold(0.0_f64, f64::max);
    let smallest = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smallest > 1e-3 * largest && largest > 1e-6 {
        wigner_a_fast(a, f, g)
    } else {
        wigner_a_general(a, f, g)
    }
}

// ---------------------------------------------------------------------------
// Time-frequency shifts and structural checks
// ---------------------------------------------------------------------------

fn grid_offset(value: f64, spacing: f64) -> Result<isize> {
    let steps = value / spacing;
    let rounded = steps.round();
    if (steps - rounded).abs() > 1e-9 {
        Err(Error::OffGrid {
            x: value,
            xi: f64::NAN,
            dx: spacing,
            dxi: spacing,
        })
    } else {
        Ok(rounded as isize)
    }
}

/// Time-frequency shift `π(z)f(t) = e^{2πiξ₀t} f(t - x₀)` for an on-grid
/// point `z = (x₀, ξ₀)` (both coordinates integer multiples of the spacing).
pub fn tf_shift(f: &SampledSignal, x0: f64, xi0: f64) -> Result<SampledSignal> {
    if !f.is_self_dual() {
        return Err(Error::NotSelfDual(f.n() as f64 * f.dx * f.dx));
    }
    let sx = grid_offset(x0, f.dx).map_err(|_| Error::OffGrid {
        x: x0,
        xi: xi0,
        dx: f.dx,
        dxi: f.dx,
    })?;
    grid_offset(xi0, f.dx).map_err(|_| Error::OffGrid {
        x: x0,
        xi: xi0,
        dx: f.dx,
        dxi: f.dx,
    })?;
    let n = f.n() as isize;
    let half = f.n() as f64 / 2.0;
    let samples: Vec<Complex64> = (0..f.n())
        .map(|k| {
            let src = k as isize - sx;
            if (0..n).contains(&src) {
                let t = (k as f64 - half) * f.dx;
                f.samples[src as usize]
                    * Complex64::from_polar(1.0, std::f64::consts::TAU * xi0 * t)
            } else {
                Complex64::ZERO
            }
        })
        .collect();
    let mut out = SampledSignal::new(samples, f.dx)?;
    out.spill = f.spill;
    Ok(out)
}

/// Shift of a grid by an on-grid vector: `(T_z W)(z') = W(z' - z)`,
/// zero-filled at the boundary.
pub fn shift_grid(w: &Grid2, x0: f64, xi0: f64) -> Result<Grid2> {
    let sx = grid_offset(x0, w.step)?;
    let sy = grid_offset(xi0, w.step)?;
    let n = w.n as isize;
    let mut values = vec![Complex64::ZERO; w.n * w.n];
    for ix in 0..n {
        let src_x = ix - sx;
        if !(0..n).contains(&src_x) {
            continue;
        }
        for iy in 0..n {
            let src_y = iy - sy;
            if (0..n).contains(&src_y) {
                values[(ix * n + iy) as usize] = w.values[(src_x * n + src_y) as usize];
            }
        }
    }
    let mut out = Grid2::new(w.n, w.step, values)?;
    out.spill = w.spill;
    Ok(out)
}

/// Covariance residual `‖W_A(π(z)f, π(z)g) - T_z W_A(f, g)‖ / ‖W_A(f, g)‖`
/// through the general path (the same generator word on both sides, so the
/// comparison is exact, not phase-blind).
pub fn covariance_check(
    a: &BlockSymplectic,
    f: &SampledSignal,
    g: &SampledSignal,
    x0: f64,
    xi0: f64,
) -> Result<f64> {
    let word = factorize(a)?;
    let base = apply_2d(&word, &Grid2::tensor(f, g, true)?)?;
    let shifted_inputs = apply_2d(
        &word,
        &Grid2::tensor(&tf_shift(f, x0, xi0)?, &tf_shift(g, x0, xi0)?, true)?,
    )?;
    let target = shift_grid(&base, x0, xi0)?;
    let norm = base.l2_norm();
    if norm == 0.0 {
        return Err(Error::ZeroInput("covariance check"));
    }
    let diff: f64 = shifted_inputs
        .values
        .iter()
        .zip(&target.values)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        * shifted_inputs.step
        * shifted_inputs.step;
    Ok(diff.sqrt() / norm)
}

/// Modulus-level residual `‖|W_A(π(z)f, π(z)g)| - |W_A(f, g)|‖ / ‖W_A(f, g)‖`.
/// Shifting both arguments multiplies a non-covariant projection like the
/// STFT one by a linear phase without moving it, so the modulus field is
/// invariant even though exact covariance fails.
pub fn covariance_check_modulus(
    a: &BlockSymplectic,
    f: &SampledSignal,
    g: &SampledSignal,
    x0: f64,
    xi0: f64,
) -> Result<f64> {
    let word = factorize(a)?;
    let base = apply_2d(&word, &Grid2::tensor(f, g, true)?)?;
    let shifted_inputs = apply_2d(
        &word,
        &Grid2::tensor(&tf_shift(f, x0, xi0)?, &tf_shift(g, x0, xi0)?, true)?,
    )?;
    let norm = base.l2_norm();
    if norm == 0.0 {
        return Err(Error::ZeroInput("covariance check"));
    }
    let diff: f64 = shifted_inputs
        .values
        .iter()
        .zip(&base.values)
        .map(|(a, b)| {
            let d = a.norm() - b.norm();
            d * d
        })
        .sum::<f64>()
        * shifted_inputs.step
        * shifted_inputs.step;
    Ok(diff.sqrt() / norm)
}

/// The Cohen-class multiplier matrix `B_A` of a covariant projection:
/// `W_A = W ∗ F⁻¹Φ_{-B_A}` with `Φ_M(ζ) = e^{iπ Mζ·ζ}`.
pub fn cohen_multiplier(a: &BlockSymplectic) -> Result<DMatrix<f64>> {
    let db = derived_blocks(a)?;
    db.b.ok_or(Error::Domain(
        "Cohen multiplier needs a covariant projection".into(),
    ))
}

/// Verifies the Cohen-class identity in the Fourier domain: compares
/// `F(W_A(f,g))` against `Φ_{-B_A}·F(W(f,g))` phase-blind and returns the
/// residual.
pub fn cohen_multiplier_check(
    a: &BlockSymplectic,
    f: &SampledSignal,
    g: &SampledSignal,
) -> Result<f64> {
    let b = cohen_multiplier(a)?;
    let wa_hat = centered_dft_2d(&wigner_a_general(a, f, g)?, true);
    let w_hat = centered_dft_2d(&tau_grid(f, g, 0.5)?, true);
    let n = w_hat.n;
    let half = n as f64 / 2.0;
    let (b00, b01, b11) = (b[(0, 0)], b[(0, 1)], b[(1, 1)]);
    let mut predicted = w_hat.values.clone();
    predicted.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let zx = (i as f64 - half) * w_hat.step;
        for (j, v) in row.iter_mut().enumerate() {
            let zy = (j as f64 - half) * w_hat.step;
            let phase = -std::f64::consts::PI
                * (b00 * zx * zx + 2.0 * b01 * zx * zy + b11 * zy * zy);
            *v *= Complex64::from_polar(1.0, phase);
        }
    });
    Ok(phase_blind_compare(&wa_hat.values, &predicted)?.residual)
}
