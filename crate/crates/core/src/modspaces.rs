//! Mixed-norm and modulation-norm computation, the shift-invertibility
//! norm-equivalence experiment, and the Rihaczek divergence sweep.
//!
//! The mixed norm `L^{p,q}_{v_s}` of a time-frequency grid takes an inner
//! `ℓ^p` over the time axis for each frequency row and an outer `ℓ^q` over
//! frequency, Riemann-weighted, against the polynomial weight
//! `v_s(z) = (1+|z|²)^{s/2}`; modulation norms are mixed norms of an STFT
//! grid. Shift-invertible distributions compute equivalent norms (tested as
//! empirical ratio envelopes over a versioned signal family); the Rihaczek
//! distribution computes `‖f‖_p‖ĝ‖_q` instead, which detaches from the
//! modulation norm — the sweep exhibits the divergence.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{rihaczek_grid, stft_grid, wigner_a_fast};
use crate::engine::{centered_dft, Grid2, SampledSignal};
use crate::error::{Error, Result};
use crate::symplectic::{derived_blocks, is_shift_invertible, BlockSymplectic};

/// An `ℓ^p` exponent: finite positive order or max-convention infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            Ok(Self::Infinity)
        } else if p.is_finite() && p > 0.0 {
            Ok(Self::Finite(p))
        } else {
            Err(Error::Domain(format!("exponent must be positive or inf, got {p}")))
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Self::Finite(p) => *p,
            Self::Infinity => f64::INFINITY,
        }
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Finite(p) => write!(f, "{p}"),
            Self::Infinity => write!(f, "inf"),
        }
    }
}

/// Parameters of `L^{p,q}_{v_s}` / `M^{p,q}_{v_s}`.
#[derive(Clone, Copy, Debug)]
pub struct MixedNormSpec {
    pub p: Exponent,
    pub q: Exponent,
    pub s: f64,
}

impl MixedNormSpec {
    pub fn new(p: f64, q: f64, s: f64) -> Result<Self> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::Domain(format!("weight exponent must be ≥ 0, got {s}")));
        }
        Ok(Self {
            p: Exponent::new(p)?,
            q: Exponent::new(q)?,
            s,
        })
    }

    pub fn unweighted(p: f64, q: f64) -> Result<Self> {
        Self::new(p, q, 0.0)
    }
}

fn accumulate(norm_p: &Exponent, acc: &mut f64, value: f64) {
    match norm_p {
        Exponent::Finite(p) => *acc += value.powf(*p),
        Exponent::Infinity => *acc = acc.max(value),
    }
}

fn finish(norm_p: &Exponent, acc: f64, step: f64) -> f64 {
    match norm_p {
        Exponent::Finite(p) => (acc * step).powf(1.0 / p),
        Exponent::Infinity => acc,
    }
}

/// Discrete `L^p` norm of a sampled signal with `Δx` Riemann weight.
pub fn lp_norm(f: &SampledSignal, p: &Exponent) -> f64 {
    let mut acc = 0.0;
    for v in &f.samples {
        accumulate(p, &mut acc, v.norm());
    }
    finish(p, acc, f.dx)
}

/// Riemann-sum mixed norm `‖grid‖_{L^{p,q}_{v_s}}`: inner `ℓ^p` over the time
/// axis per frequency row, outer `ℓ^q` over frequency.
pub fn mixed_norm(grid: &Grid2, spec: &MixedNormSpec) -> f64 {
    let n = grid.n;
    let inner: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|iy| {
            let xi = grid.coord(iy);
            let mut acc = 0.0;
            for ix in 0..n {
                let mut value = grid.values[ix * n + iy].norm();
                if spec.s != 0.0 {
                    let x = grid.coord(ix);
                    value *= (1.0 + x * x + xi * xi).powf(spec.s / 2.0);
                }
                accumulate(&spec.p, &mut acc, value);
            }
            finish(&spec.p, acc, grid.step)
        })
        .collect();
    let mut acc = 0.0;
    for v in inner {
        accumulate(&spec.q, &mut acc, v);
    }
    finish(&spec.q, acc, grid.step)
}

/// Modulation norm `‖f‖_{M^{p,q}_{v_s}} = ‖V_g f‖_{L^{p,q}_{v_s}}`.
pub fn mod_norm(f: &SampledSignal, g: &SampledSignal, spec: &MixedNormSpec) -> Result<f64> {
    if g.l2_norm() == 0.0 {
        return Err(Error::ZeroInput("modulation-norm window"));
    }
    Ok(mixed_norm(&stft_grid(f, g)?, spec))
}

/// Relative residual of `‖W₀(f,g)‖_{L^{p,q}} = ‖f‖_p · ‖ĝ‖_q` (unweighted
/// spec required; the Rihaczek modulus is separable, so the identity is exact
/// at grid level).
pub fn rihaczek_identity_check(
    f: &SampledSignal,
    g: &SampledSignal,
    spec: &MixedNormSpec,
) -> Result<f64> {
    if spec.s != 0.0 {
        return Err(Error::Domain(format!(
            "Rihaczek norm identity is unweighted; got s = {}",
            spec.s
        )));
    }
    let lhs = mixed_norm(&rihaczek_grid(f, g)?, spec);
    let rhs = lp_norm(f, &spec.p) * lp_norm(&centered_dft(g), &spec.q);
    if rhs == 0.0 {
        return Err(Error::ZeroInput("Rihaczek identity operands"));
    }
    Ok((lhs - rhs).abs() / rhs)
}

/// A normalized chirped Gaussian `∝ e^{iπ·rate·x²} e^{-π(x/width)²}`.
pub fn chirped_gaussian(n: usize, dx: f64, rate: f64, width: f64) -> Result<SampledSignal> {
    let mut f = SampledSignal::from_fn(n, dx, |x| {
        Complex64::from_polar(
            (-std::f64::consts::PI * (x / width) * (x / width)).exp(),
            std::f64::consts::PI * rate * x * x,
        )
    })?;
    let nrm = f.l2_norm();
    if nrm == 0.0 {
        return Err(Error::ZeroInput("chirped Gaussian under-resolved"));
    }
    for v in f.samples.iter_mut() {
        *v /= nrm;
    }
    Ok(f)
}

/// One point of the divergence sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub rate: f64,
    pub width: f64,
    pub identity_residual: f64,
    pub ratio: f64,
}

/// Chirp sweep against the Rihaczek norm at `(p, q) = (1, ∞)`: chirps of
/// increasing rate with slope-matched shrinking envelopes. At every member
/// the Rihaczek identity stays exact while the ratio
/// `‖f‖_{M^{1,∞}} / (‖f‖₁‖f̂‖_∞)` grows like `width^{-1/2}` — the two
/// quantities measure different spaces. A rate sweep at fixed envelope leaves
/// the ratio constant (both sides transform the same way under chirp
/// multiplication, which is metaplectic), so the envelope narrows with the
/// rate to expose the divergence.
pub fn negative_theorem_sweep(n: usize, dx: f64) -> Result<Vec<SweepPoint>> {
    let spec = MixedNormSpec::unweighted(1.0, f64::INFINITY)?;
    let g0 = SampledSignal::gaussian_g0(n, dx);
    let mut points = Vec::new();
    for k in 0..6 {
        let rate = k as f64;
        let width = 8.0 * 0.5_f64.powi(k);
        let f = chirped_gaussian(n, dx, rate, width)?;
        let identity_residual = rihaczek_identity_check(&f, &f, &spec)?;
        let m_norm = mod_norm(&f, &g0, &spec)?;
        let rihaczek_norm =
            lp_norm(&f, &Exponent::Finite(1.0)) * lp_norm(&centered_dft(&f), &Exponent::Infinity);
        points.push(SweepPoint {
            rate,
            width,
            identity_residual,
            ratio: m_norm / rihaczek_norm,
        });
    }
    Ok(points)
}

/// A named, versioned family of test signals for ratio experiments.
pub struct TestFamily {
    pub name: &'static str,
    pub signals: Vec<(String, SampledSignal)>,
}

/// Version 1: unit and wide Gaussians, a two-bump signal, and the chirped
/// Gaussians of the divergence sweep.
pub fn test_family_v1(n: usize, dx: f64) -> Result<TestFamily> {
    let mut signals = Vec::new();
    signals.push(("gauss-unit".to_string(), SampledSignal::gaussian_g0(n, dx)));
    signals.push(("gauss-wide".to_string(), chirped_gaussian(n, dx, 0.0, 2.0)?));
    let mut two_bump = SampledSignal::from_fn(n, dx, |x| {
        let bump = |c: f64| (-std::f64::consts::PI * (x - c) * (x - c)).exp();
        Complex64::new(bump(-2.0) + bump(2.0), 0.0)
    })?;
    let nrm = two_bump.l2_norm();
    for v in two_bump.samples.iter_mut() {
        *v /= nrm;
    }
    signals.push(("two-bump".to_string(), two_bump));
    for k in 0..4 {
        let rate = k as f64;
        let width = 4.0 * 0.5_f64.powi(k);
        signals.push((
            format!("chirp-{k}"),
            chirped_gaussian(n, dx, rate, width)?,
        ));
    }
    Ok(TestFamily {
        name: "family-v1",
        signals,
    })
}

/// Per-signal ratio experiment report.
#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub family: &'static str,
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub per_signal: Vec<(String, f64)>,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// Ratios `‖W_A(f,g)‖_{L^{p,q}_{v_s}} / ‖f‖_{M^{p,q}_{v_s}}` over a test
/// family. Preconditions: `A` shift-invertible; the weight must be compatible
/// with the rescaling (`v_s ∘ E_A ≍ v_s` within a decade on the grid); for
/// `p ≠ q` the lower-left block of `E_A` must vanish.
pub fn equivalence_ratio(
    a: &BlockSymplectic,
    g: &SampledSignal,
    spec: &MixedNormSpec,
    family: &TestFamily,
) -> Result<EquivalenceReport> {
    if !is_shift_invertible(a)? {
        return Err(Error::NotShiftInvertible);
    }
    let db = derived_blocks(a)?;
    let d = a.d();
    if spec.p != spec.q {
        let lower_left = db.e.view((d, 0), (d, d)).amax();
        if lower_left > 1e-10 {
            return Err(Error::Domain(format!(
                "p ≠ q needs an upper block triangular rescaling; lower-left block has magnitude {lower_left:.3e}"
            )));
        }
    }
    if spec.s != 0.0 {
        let n = g.n();
        let half = n as f64 / 2.0;
        let mut lo = f64::INFINITY;
        let mut hi = 0.0_f64;
        for ix in (0..n).step_by(n / 16) {
            for iy in (0..n).step_by(n / 16) {
                let z = [(ix as f64 - half) * g.dx, (iy as f64 - half) * g.dx];
                let ez = [
                    db.e[(0, 0)] * z[0] + db.e[(0, 1)] * z[1],
                    db.e[(1, 0)] * z[0] + db.e[(1, 1)] * z[1],
                ];
                let vs = |w: &[f64; 2]| (1.0 + w[0] * w[0] + w[1] * w[1]).powf(spec.s / 2.0);
                let ratio = vs(&ez) / vs(&z);
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
        }
        if lo < 0.1 || hi > 10.0 {
            return Err(Error::Domain(format!(
                "weight incompatible with rescaling: v_s∘E/v_s ranges over [{lo:.3e}, {hi:.3e}]"
            )));
        }
    }
    let per_signal: Vec<(String, f64)> = family
        .signals
        .iter()
        .map(|(name, f)| -> Result<(String, f64)> {
            let num = mixed_norm(&wigner_a_fast(a, f, g)?, spec);
            let den = mod_norm(f, g, spec)?;
            if den == 0.0 {
                return Err(Error::ZeroInput("modulation norm in ratio experiment"));
            }
            Ok((name.clone(), num / den))
        })
        .collect::<Result<_>>()?;
    let min_ratio = per_signal.iter().map(|(_, r)| *r).fold(f64::INFINITY, f64::min);
    let max_ratio = per_signal.iter().map(|(_, r)| *r).fold(0.0, f64::max);
    Ok(EquivalenceReport {
        family: family.name,
        n: g.n(),
        p: spec.p.as_f64(),
        q: spec.q.as_f64(),
        s: spec.s,
        per_signal,
        min_ratio,
        max_ratio,
    })
}
