//! Energy ↔ photon transforms.
//!
//! Each of the eight kinds acts on a component `e^{−iνωt}` as a multiplier of
//! modulus `(ħω)^{∓1/2}` and phase `ν·φ`:
//!
//! | kind | φ | | kind | φ |
//! |------|---|-|------|---|
//! | T+ | π/4 | | inv T+ | −π/4 |
//! | T− | −π/4 | | inv T− | π/4 |
//! | Tx | 0 | | inv Tx | 0 |
//! | Ty | π/2 | | inv Ty | −π/2 |
//!
//! The time-domain forms are half-order integrals. With `W` the window,
//!
//! ```text
//! T+ F(t)     = 1/√(πħ) ∫₀^W F(t−τ) τ^{−1/2} dτ
//! T− F(t)     = 1/√(πħ) ∫₀^W F(t+τ) τ^{−1/2} dτ
//! inv T+ F(t) = −√ħ/(2√π) FP∫₀^W F(t−τ) τ^{−3/2} dτ
//! inv T− F(t) = −√ħ/(2√π) FP∫₀^W F(t+τ) τ^{−3/2} dτ
//! ```
//!
//! and `Tx = (T+ + T−)/√2`, `Ty = (T+ − T−)/√2` (likewise for the inverses).
//! `FP` is the Hadamard finite part. The integrals are evaluated by product
//! integration: the signal is interpolated linearly on each sample cell and
//! the kernel moments over the cell are taken exactly.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use crate::kspace::{Helicity, HelicityBasis, KGrid};
use crate::synthesis::{forward_components, FieldKind, FieldSnapshot, HelicitySpectrum, Part};
use crate::vec3::hdot;
use crate::{Error, Fft3, Result, Units, C64};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformKind {
    TPlus,
    TMinus,
    Tx,
    Ty,
    InvTPlus,
    InvTMinus,
    InvTx,
    InvTy,
}

impl TransformKind {
    pub const ALL: [TransformKind; 8] = [
        TransformKind::TPlus,
        TransformKind::TMinus,
        TransformKind::Tx,
        TransformKind::Ty,
        TransformKind::InvTPlus,
        TransformKind::InvTMinus,
        TransformKind::InvTx,
        TransformKind::InvTy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransformKind::TPlus => "T+",
            TransformKind::TMinus => "T-",
            TransformKind::Tx => "Tx",
            TransformKind::Ty => "Ty",
            TransformKind::InvTPlus => "invT+",
            TransformKind::InvTMinus => "invT-",
            TransformKind::InvTx => "invTx",
            TransformKind::InvTy => "invTy",
        }
    }

    /// Parses a kind name. Accepts `T+`, `T-`, `Tx`, `Ty` and their inverses
    /// spelled `invT+` or `inv T+`; `−` is accepted for `-`.
    pub fn parse(s: &str) -> Option<TransformKind> {
        let s = s.trim().replace('−', "-");
        let (inv, body) = match s.strip_prefix("inv") {
            Some(rest) => (true, rest.trim_start()),
            None => (false, s.as_str()),
        };
        let base = match body {
            "T+" => TransformKind::TPlus,
            "T-" => TransformKind::TMinus,
            "Tx" => TransformKind::Tx,
            "Ty" => TransformKind::Ty,
            _ => return None,
        };
        Some(if inv { base.inverse() } else { base })
    }

    pub fn is_inverse(self) -> bool {
        matches!(
            self,
            TransformKind::InvTPlus | TransformKind::InvTMinus | TransformKind::InvTx | TransformKind::InvTy
        )
    }

    pub fn inverse(self) -> TransformKind {
        use TransformKind::*;
        match self {
            TPlus => InvTPlus,
            TMinus => InvTMinus,
            Tx => InvTx,
            Ty => InvTy,
            InvTPlus => TPlus,
            InvTMinus => TMinus,
            InvTx => Tx,
            InvTy => Ty,
        }
    }

    /// Phase added to a positive-frequency component.
    pub fn phase(self) -> f64 {
        use TransformKind::*;
        match self {
            TPlus => FRAC_PI_4,
            TMinus => -FRAC_PI_4,
            Tx | InvTx => 0.0,
            Ty => FRAC_PI_2,
            InvTPlus => -FRAC_PI_4,
            InvTMinus => FRAC_PI_4,
            InvTy => -FRAC_PI_2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    EnergyToPhoton,
    PhotonToEnergy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TransformSpec {
    kind: TransformKind,
    direction: Direction,
}

impl TransformSpec {
    pub fn new(kind: TransformKind) -> Self {
        let direction = if kind.is_inverse() {
            Direction::PhotonToEnergy
        } else {
            Direction::EnergyToPhoton
        };
        TransformSpec { kind, direction }
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn inverse(&self) -> TransformSpec {
        TransformSpec::new(self.kind.inverse())
    }

    /// Human-readable description of the time-domain kernel.
    pub fn kernel_description(&self) -> &'static str {
        use TransformKind::*;
        match self.kind {
            TPlus => "causal, tau^(-1/2) over past samples",
            TMinus => "anti-causal, tau^(-1/2) over future samples",
            Tx => "(T+ + T-)/sqrt2, |tau|^(-1/2)",
            Ty => "(T+ - T-)/sqrt2, sign(tau)|tau|^(-1/2)",
            InvTPlus => "causal, finite-part tau^(-3/2) over past samples",
            InvTMinus => "anti-causal, finite-part tau^(-3/2) over future samples",
            InvTx => "(invT+ + invT-)/sqrt2, finite-part |tau|^(-3/2)",
            InvTy => "(invT+ - invT-)/sqrt2, finite-part sign(tau)|tau|^(-3/2)",
        }
    }
}

impl From<TransformKind> for TransformSpec {
    fn from(kind: TransformKind) -> Self {
        TransformSpec::new(kind)
    }
}

/// Exact multiplier on a component `e^{∓iωt}`; `sign` picks the part.
pub fn spectral_multiplier(spec: TransformSpec, omega: f64, sign: Part, units: &Units) -> Result<C64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::invalid(format!(
            "omega must be positive and finite, got {omega}"
        )));
    }
    let nu = match sign {
        Part::Plus => 1.0,
        Part::Minus => -1.0,
        Part::Both => return Err(Error::invalid("the multiplier acts on a single frequency part")),
    };
    let hw = units.hbar * omega;
    let modulus = if spec.kind.is_inverse() {
        hw.sqrt()
    } else {
        1.0 / hw.sqrt()
    };
    Ok(C64::from_polar(modulus, nu * spec.kind.phase()))
}

/// Multiplies every mode of `spectrum` by its multiplier.
///
/// A nonzero coefficient at `k = 0` has no frequency to act on and is
/// reported as [`Error::SingularMode`].
pub fn apply_spectral(spec: TransformSpec, spectrum: &HelicitySpectrum, units: &Units) -> Result<HelicitySpectrum> {
    let grid = *spectrum.grid();
    let mut coeffs = spectrum.coeffs().to_vec();
    for (i, c) in coeffs.iter_mut().enumerate() {
        if c[0] == C64::new(0.0, 0.0) && c[1] == C64::new(0.0, 0.0) {
            continue;
        }
        if i == 0 {
            return Err(Error::SingularMode { index: 0 });
        }
        let omega = units.c * grid.wavenumber(i);
        for h in Helicity::BOTH {
            let part = if spectrum.temporal_sign(h) > 0.0 {
                Part::Plus
            } else {
                Part::Minus
            };
            c[h.index()] *= spectral_multiplier(spec, omega, part, units)?;
        }
    }
    Ok(HelicitySpectrum::new(&grid, spectrum.part(), spectrum.time(), coeffs))
}

/// Helicity decomposition of a real-space snapshot of one frequency part.
///
/// Only the transverse content on retained modes survives.
pub fn decompose(snapshot: &FieldSnapshot, grid: &KGrid, part: Part, fft: &impl Fft3) -> Result<HelicitySpectrum> {
    if snapshot.n != grid.n() || snapshot.box_length != grid.box_length() {
        return Err(Error::Mismatch("snapshot and grid differ in shape".into()));
    }
    if part == Part::Both {
        return Err(Error::invalid("decomposition needs a single frequency part"));
    }
    let comps = forward_components(snapshot, fft);
    let scale = 1.0 / grid.len() as f64;
    let mut coeffs = vec![[C64::new(0.0, 0.0); 2]; grid.len()];
    for i in grid.retained() {
        let t = HelicityBasis::triad_at(grid.integers(i));
        let v = [comps[0][i] * scale, comps[1][i] * scale, comps[2][i] * scale];
        coeffs[i] = [hdot(v, t.u[0]), hdot(v, t.u[1])];
    }
    Ok(HelicitySpectrum::new(grid, part, snapshot.time, coeffs))
}

/// Transforms a real-space snapshot of one frequency part and resynthesizes it.
pub fn apply_to_snapshot(
    spec: TransformSpec,
    snapshot: &FieldSnapshot,
    grid: &KGrid,
    part: Part,
    units: &Units,
    fft: &impl Fft3,
) -> Result<FieldSnapshot> {
    let spectrum = decompose(snapshot, grid, part, fft)?;
    let kind = match (spec.kind, part) {
        (TransformKind::TPlus, Part::Plus) => FieldKind::PhiPlus,
        (TransformKind::TPlus, Part::Minus) => FieldKind::PhiMinus,
        (TransformKind::InvTPlus, Part::Plus) => FieldKind::PsiPlus,
        (TransformKind::InvTPlus, Part::Minus) => FieldKind::PsiMinus,
        _ => FieldKind::Derived,
    };
    Ok(apply_spectral(spec, &spectrum, units)?.synthesize(kind, fft))
}

/// Uniformly sampled scalar signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    t0: f64,
    dt: f64,
    samples: Vec<C64>,
}

impl TimeSeries {
    pub fn new(t0: f64, dt: f64, samples: Vec<C64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid(format!("time step must be positive, got {dt}")));
        }
        if !t0.is_finite() || samples.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(Error::invalid("time series holds non-finite values"));
        }
        Ok(TimeSeries { t0, dt, samples })
    }

    /// Samples `f(t0 + j·dt)` for `j < len`.
    pub fn sample(t0: f64, dt: f64, len: usize, f: impl Fn(f64) -> C64) -> Result<Self> {
        TimeSeries::new(t0, dt, (0..len).map(|j| f(t0 + j as f64 * dt)).collect())
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }
}

/// Product-integration weights of `τ^{−1/2}` on `[0, m·dt]`: the integral of
/// the kernel against the piecewise-linear interpolant of `G_0..G_m` equals
/// `Σ_j w_j G_j`.
pub fn half_order_weights(dt: f64, m: usize) -> Vec<f64> {
    let mut w = vec![0.0; m + 1];
    let mut s = 0.0f64;
    for j in 0..m {
        let u = (((j + 1) as f64) * dt).sqrt();
        let d = dt / (u + s);
        let m0 = 2.0 * d;
        let m1 = 2.0 / 3.0 * d * d * (u + 2.0 * s);
        w[j] += m0 - m1 / dt;
        w[j + 1] += m1 / dt;
        s = u;
    }
    w
}

/// Finite-part weights of `τ^{−3/2}` on `[0, m·dt]`, same interpolant.
pub fn finite_part_weights(dt: f64, m: usize) -> Vec<f64> {
    let mut w = vec![0.0; m + 1];
    if m == 0 {
        return w;
    }
    let r = dt.sqrt();
    // FP∫₀^dt τ^{−3/2} = −2/√dt; ∫₀^dt τ^{−1/2} = 2√dt.
    w[0] += -2.0 / r - 2.0 * r / dt;
    w[1] += 2.0 * r / dt;
    let mut s = r;
    for j in 1..m {
        let u = (((j + 1) as f64) * dt).sqrt();
        let d = dt / (u + s);
        let m0 = 2.0 * d / (s * u);
        let m1 = 2.0 * d * d / u;
        w[j] += m0 - m1 / dt;
        w[j + 1] += m1 / dt;
        s = u;
    }
    w
}

fn convolve(samples: &[C64], weights: &[f64], j: usize, causal: bool) -> C64 {
    weights
        .iter()
        .enumerate()
        .map(|(m, &w)| {
            let idx = if causal { j - m } else { j + m };
            samples[idx] * w
        })
        .sum()
}

/// Applies `spec` to a sampled signal with kernels truncated at `window`.
///
/// Causal kinds produce outputs from the first sample with a full window of
/// history, anti-causal ones up to the last with a full window of future, and
/// the quadrature kinds need both. The output starts at the first such time.
pub fn apply_timedomain(spec: TransformSpec, series: &TimeSeries, window: f64, units: &Units) -> Result<TimeSeries> {
    if !(window > 0.0) || !window.is_finite() {
        return Err(Error::invalid(format!("window must be positive, got {window}")));
    }
    let dt = series.dt;
    let m = (window / dt).round() as usize;
    if m == 0 {
        return Err(Error::invalid("window is shorter than one sample step"));
    }
    use TransformKind::*;
    let (need_past, need_future) = match spec.kind {
        TPlus | InvTPlus => (true, false),
        TMinus | InvTMinus => (false, true),
        _ => (true, true),
    };
    let lo = if need_past { m } else { 0 };
    let hi = if need_future {
        series.len().saturating_sub(m)
    } else {
        series.len()
    };
    if hi <= lo {
        return Err(Error::invalid(format!(
            "series of {} samples is too short for a window of {m} samples",
            series.len()
        )));
    }
    let (weights, scale) = if spec.kind.is_inverse() {
        (finite_part_weights(dt, m), -units.hbar.sqrt() / (2.0 * PI.sqrt()))
    } else {
        (half_order_weights(dt, m), 1.0 / (PI * units.hbar).sqrt())
    };
    let s = &series.samples;
    let out = (lo..hi)
        .map(|j| {
            let past = || convolve(s, &weights, j, true);
            let future = || convolve(s, &weights, j, false);
            let v = match spec.kind {
                TPlus | InvTPlus => past(),
                TMinus | InvTMinus => future(),
                Tx | InvTx => (past() + future()) * FRAC_1_SQRT_2,
                Ty | InvTy => (past() - future()) * FRAC_1_SQRT_2,
            };
            v * scale
        })
        .collect();
    TimeSeries::new(series.time(lo), dt, out)
}

/// Leading-order relative error of [`apply_timedomain`] on a tone of
/// frequency `omega` caused by cutting the kernel tail at `window`.
///
/// Forward kinds: `1/√(πωW)` per half-sided kernel. Inverse kinds:
/// `1/(2√π (ωW)^{3/2})`. Quadrature kinds combine two halves and get an
/// extra factor √2.
pub fn truncation_tolerance(kind: TransformKind, omega: f64, window: f64) -> f64 {
    let x = omega * window;
    let base = if kind.is_inverse() {
        1.0 / (2.0 * PI.sqrt() * x.powf(1.5))
    } else {
        1.0 / (PI * x).sqrt()
    };
    match kind {
        TransformKind::TPlus | TransformKind::TMinus | TransformKind::InvTPlus | TransformKind::InvTMinus => base,
        _ => base * core::f64::consts::SQRT_2,
    }
}

/// Leading-order relative error from linear interpolation of a tone of
/// frequency `omega` sampled at `dt`: `(ωdt)²` for the forward kernels and
/// `(ωdt)^{3/2}` for the finite-part kernels, whose first cell dominates.
pub fn discretization_tolerance(kind: TransformKind, omega: f64, dt: f64) -> f64 {
    let x = omega * dt;
    if kind.is_inverse() {
        x.powf(1.5)
    } else {
        x * x
    }
}
