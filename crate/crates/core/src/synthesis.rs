//! Real-space snapshots of the fields carried by a [`ModeSet`].
//!
//! Every field here is a helicity-basis spectral sum
//!
//! ```text
//! F(r, t) = Σ_k Σ_σ c_σ(k) ũ_σ(k) exp(i(k·r − ν ω t)),   ω = c|k|,
//! ```
//!
//! where the temporal sign `ν = p·σ` is fixed by the frequency part `p` of the
//! sum. In `Ψ⁺` (p = +1) the positive-helicity modes rotate as `e^{-iωt}` and
//! the negative-helicity modes as `e^{+iωt}`; that is what makes `Ψ⁺` obey
//! `iħ∂tΨ = c L·p̂ Ψ` and coincide with `D/√(2ε0) + iB/√(2μ0)`.
//!
//! Coefficients for the standard fields, with `w = Δk³/(2π)^{3/2}`:
//!
//! | field | p | `c_σ(k)` at t = 0 |
//! |-------|---|-------------------|
//! | Ψ⁺ | + | `i w √(ħc|k|) A_σ` |
//! | Ψ⁻ | − | `−i w √(ħc|k|) A_σ*` |
//! | Φ⁺ | + | `i w e^{iσπ/4} A_σ` |
//! | Φ⁻ | − | `−i w e^{−iσπ/4} A_σ*` |
//! | 𝒜⁺ | + | `σ w √(ħZ0/(2|k|)) A_σ` |
//!
//! The vector potential is `𝒜 = 𝒜⁺ + 𝒜⁻` with `𝒜⁻` the conjugate field of
//! `𝒜⁺`, so `𝒜`, `D = −ε0 ∂t𝒜` and `B = ∇×𝒜` are real.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_4;

use crate::kspace::{Helicity, HelicityBasis, KGrid, ModeSet};
use crate::vec3::{cadd, cconj, cnorm_sqr, cscale, csub, CVec3, Vec3, CZERO3};
use crate::{Error, Fft3, Result, Units, C64};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Potential,
    Displacement,
    Magnetic,
    PsiPlus,
    PsiMinus,
    Psi,
    PhiPlus,
    PhiMinus,
    Phi,
    /// Anything else: a transformed field, a curl, a leapfrog state.
    Derived,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Potential => "potential",
            FieldKind::Displacement => "displacement",
            FieldKind::Magnetic => "magnetic",
            FieldKind::PsiPlus => "psi_plus",
            FieldKind::PsiMinus => "psi_minus",
            FieldKind::Psi => "psi",
            FieldKind::PhiPlus => "phi_plus",
            FieldKind::PhiMinus => "phi_minus",
            FieldKind::Phi => "phi",
            FieldKind::Derived => "derived",
        }
    }
}

/// Frequency part selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    Plus,
    Minus,
    Both,
}

impl Part {
    fn sign(self) -> f64 {
        match self {
            Part::Plus => 1.0,
            Part::Minus => -1.0,
            Part::Both => panic!("Part::Both has no single frequency sign"),
        }
    }
}

/// A complex 3-vector field sampled on the `n³` periodic grid at one time.
///
/// Sample `m` sits at `r = m·L/n`; layout as in [`crate::fft`].
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub n: usize,
    pub box_length: f64,
    pub time: f64,
    pub kind: FieldKind,
    pub values: Vec<CVec3>,
}

impl FieldSnapshot {
    pub fn zeros(n: usize, box_length: f64, time: f64, kind: FieldKind) -> Self {
        FieldSnapshot {
            n,
            box_length,
            time,
            kind,
            values: vec![CZERO3; n * n * n],
        }
    }

    pub fn cell_volume(&self) -> f64 {
        (self.box_length / self.n as f64).powi(3)
    }

    pub fn same_grid(&self, other: &FieldSnapshot) -> bool {
        self.n == other.n && self.box_length == other.box_length
    }

    /// `ΔV · Σ_r ‖F(r)‖²`.
    pub fn integral_norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| cnorm_sqr(*v)).sum::<f64>() * self.cell_volume()
    }

    /// `√(Σ_r ‖F(r)‖²)` without the volume factor.
    pub fn l2(&self) -> f64 {
        self.values.iter().map(|v| cnorm_sqr(*v)).sum::<f64>().sqrt()
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| cnorm_sqr(*v).sqrt()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter().map(|c| c.im.abs()))
            .fold(0.0, f64::max)
    }

    /// Largest pointwise vector distance to `other`.
    pub fn max_abs_diff(&self, other: &FieldSnapshot) -> f64 {
        assert!(self.same_grid(other), "snapshots live on different grids");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| cnorm_sqr(csub(*a, *b)).sqrt())
            .fold(0.0, f64::max)
    }

    /// `√(Σ_r ‖F − G‖²)`.
    pub fn l2_diff(&self, other: &FieldSnapshot) -> f64 {
        assert!(self.same_grid(other), "snapshots live on different grids");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| cnorm_sqr(csub(*a, *b)))
            .sum::<f64>()
            .sqrt()
    }

    pub fn map(&self, kind: FieldKind, f: impl Fn(CVec3) -> CVec3) -> FieldSnapshot {
        FieldSnapshot {
            n: self.n,
            box_length: self.box_length,
            time: self.time,
            kind,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &FieldSnapshot, kind: FieldKind, f: impl Fn(CVec3, CVec3) -> CVec3) -> FieldSnapshot {
        assert!(self.same_grid(other), "snapshots live on different grids");
        FieldSnapshot {
            n: self.n,
            box_length: self.box_length,
            time: self.time,
            kind,
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
        }
    }
}

/// Helicity-basis coefficients of one frequency part of a field.
#[derive(Debug, Clone, PartialEq)]
pub struct HelicitySpectrum {
    grid: KGrid,
    part: Part,
    time: f64,
    coeffs: Vec<[C64; 2]>,
}

impl HelicitySpectrum {
    /// Spectrum with the given coefficients at `time`. `part` must be
    /// `Plus` or `Minus`; coefficients on masked modes are kept as given.
    pub fn new(grid: &KGrid, part: Part, time: f64, coeffs: Vec<[C64; 2]>) -> Self {
        assert!(part != Part::Both, "a spectrum carries a single frequency part");
        assert_eq!(coeffs.len(), grid.len());
        HelicitySpectrum {
            grid: *grid,
            part,
            time,
            coeffs,
        }
    }

    fn from_modes(modes: &ModeSet, part: Part, time: f64, coeff: impl Fn(f64, Helicity, C64) -> C64) -> Self {
        let grid = *modes.grid();
        let mut coeffs = vec![[C64::new(0.0, 0.0); 2]; grid.len()];
        for i in grid.retained() {
            let k = grid.wavenumber(i);
            for h in Helicity::BOTH {
                coeffs[i][h.index()] = coeff(k, h, modes.amp(i, h));
            }
        }
        HelicitySpectrum {
            grid,
            part,
            time,
            coeffs,
        }
    }

    pub fn grid(&self) -> &KGrid {
        &self.grid
    }

    pub fn part(&self) -> Part {
        self.part
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn coeffs(&self) -> &[[C64; 2]] {
        &self.coeffs
    }

    pub fn coeff(&self, flat: usize, h: Helicity) -> C64 {
        self.coeffs[flat][h.index()]
    }

    /// Sign `ν` of the temporal frequency of mode `(k, h)`: the mode rotates
    /// as `exp(−iνωt)`.
    pub fn temporal_sign(&self, h: Helicity) -> f64 {
        self.part.sign() * h.sign()
    }

    pub fn map(&self, f: impl Fn(usize, Helicity, C64) -> C64) -> HelicitySpectrum {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            for h in Helicity::BOTH {
                c[h.index()] = f(i, h, c[h.index()]);
            }
        }
        out
    }

    /// The same field at time `t`.
    pub fn at_time(&self, t: f64, units: &Units) -> HelicitySpectrum {
        let dt = t - self.time;
        let mut out = self.map(|i, h, c| {
            let omega = units.c * self.grid.wavenumber(i);
            c * C64::from_polar(1.0, -self.temporal_sign(h) * omega * dt)
        });
        out.time = t;
        out
    }

    /// `∂F/∂t`.
    pub fn time_derivative(&self, units: &Units) -> HelicitySpectrum {
        self.map(|i, h, c| {
            let omega = units.c * self.grid.wavenumber(i);
            c * C64::new(0.0, -self.temporal_sign(h) * omega)
        })
    }

    /// `∇×F`; on the helicity basis `ik×ũ_σ = σ|k|ũ_σ`.
    pub fn curl(&self) -> HelicitySpectrum {
        self.map(|i, h, c| c * (h.sign() * self.grid.wavenumber(i)))
    }

    pub fn scaled(&self, s: C64) -> HelicitySpectrum {
        self.map(|_, _, c| c * s)
    }

    /// Spectrum of the complex-conjugate field, which lives in the other
    /// frequency part: `c'_σ(k) = c_σ(−k)*`.
    pub fn conjugate_field(&self) -> HelicitySpectrum {
        let mut coeffs = vec![[C64::new(0.0, 0.0); 2]; self.grid.len()];
        for (i, c) in coeffs.iter_mut().enumerate() {
            let src = self.coeffs[self.grid.negate(i)];
            *c = [src[0].conj(), src[1].conj()];
        }
        HelicitySpectrum {
            grid: self.grid,
            part: if self.part == Part::Plus {
                Part::Minus
            } else {
                Part::Plus
            },
            time: self.time,
            coeffs,
        }
    }

    /// Vector Fourier coefficient `Σ_σ c_σ(k) ũ_σ(k)` at every lattice point.
    fn vector_coefficients(&self) -> Vec<CVec3> {
        let mut out = vec![CZERO3; self.grid.len()];
        for i in self.grid.retained() {
            let t = HelicityBasis::triad_at(self.grid.integers(i));
            let c = self.coeffs[i];
            out[i] = cadd(cscale(t.u[0], c[0]), cscale(t.u[1], c[1]));
        }
        out
    }

    /// Real-space samples at `self.time()` via three inverse FFTs.
    pub fn synthesize(&self, kind: FieldKind, fft: &impl Fft3) -> FieldSnapshot {
        let n = self.grid.n();
        let vc = self.vector_coefficients();
        let mut snap = FieldSnapshot::zeros(n, self.grid.box_length(), self.time, kind);
        let mut buf = vec![C64::new(0.0, 0.0); vc.len()];
        for w in 0..3 {
            for (b, v) in buf.iter_mut().zip(&vc) {
                *b = v[w];
            }
            fft.inverse(n, &mut buf);
            for (s, b) in snap.values.iter_mut().zip(&buf) {
                s[w] = *b;
            }
        }
        snap
    }

    /// Real-space samples at `self.time()` by the literal double sum over
    /// modes and sample points, with `exp(ik·r)` evaluated from positions.
    /// O(n⁶); intended as an oracle for [`HelicitySpectrum::synthesize`].
    pub fn synthesize_direct(&self, kind: FieldKind) -> FieldSnapshot {
        let vc = self.vector_coefficients();
        let modes: Vec<(Vec3, CVec3)> = self
            .grid
            .retained()
            .filter(|&i| cnorm_sqr(vc[i]) > 0.0)
            .map(|i| (self.grid.wavevector(i), vc[i]))
            .collect();
        let mut snap = FieldSnapshot::zeros(self.grid.n(), self.grid.box_length(), self.time, kind);
        for (m, s) in snap.values.iter_mut().enumerate() {
            let r = self.grid.position(m);
            let mut acc = CZERO3;
            for (k, v) in &modes {
                let phase = C64::from_polar(1.0, k[0] * r[0] + k[1] * r[1] + k[2] * r[2]);
                acc = cadd(acc, cscale(*v, phase));
            }
            *s = acc;
        }
        snap
    }
}

/// Spectrum of `Ψ⁽⁺⁾` or `Ψ⁽⁻⁾` at time `t`.
pub fn psi_spectrum(modes: &ModeSet, t: f64, part: Part, units: &Units) -> HelicitySpectrum {
    let w = modes.grid().synthesis_weight();
    let spectrum = match part {
        Part::Plus => HelicitySpectrum::from_modes(modes, Part::Plus, 0.0, |k, _, a| {
            C64::new(0.0, w * (units.hbar * units.c * k).sqrt()) * a
        }),
        Part::Minus => HelicitySpectrum::from_modes(modes, Part::Minus, 0.0, |k, _, a| {
            C64::new(0.0, -w * (units.hbar * units.c * k).sqrt()) * a.conj()
        }),
        Part::Both => panic!("psi_spectrum takes a single frequency part"),
    };
    spectrum.at_time(t, units)
}

/// Spectrum of `Φ⁽⁺⁾` or `Φ⁽⁻⁾` at time `t`.
pub fn phi_spectrum(modes: &ModeSet, t: f64, part: Part, units: &Units) -> HelicitySpectrum {
    let w = modes.grid().synthesis_weight();
    let spectrum = match part {
        Part::Plus => HelicitySpectrum::from_modes(modes, Part::Plus, 0.0, |_, h, a| {
            C64::new(0.0, w) * C64::from_polar(1.0, h.sign() * FRAC_PI_4) * a
        }),
        Part::Minus => HelicitySpectrum::from_modes(modes, Part::Minus, 0.0, |_, h, a| {
            C64::new(0.0, -w) * C64::from_polar(1.0, -h.sign() * FRAC_PI_4) * a.conj()
        }),
        Part::Both => panic!("phi_spectrum takes a single frequency part"),
    };
    spectrum.at_time(t, units)
}

/// Spectrum of the positive-frequency potential `𝒜⁺` at time `t`.
pub fn potential_spectrum(modes: &ModeSet, t: f64, units: &Units) -> HelicitySpectrum {
    let w = modes.grid().synthesis_weight();
    HelicitySpectrum::from_modes(modes, Part::Plus, 0.0, |k, h, a| {
        a * (h.sign() * w * (units.hbar * units.z0 / (2.0 * k)).sqrt())
    })
    .at_time(t, units)
}

fn synthesize_parts(
    plus: impl FnOnce() -> HelicitySpectrum,
    minus: impl FnOnce() -> HelicitySpectrum,
    part: Part,
    kinds: [FieldKind; 3],
    fft: &impl Fft3,
) -> FieldSnapshot {
    match part {
        Part::Plus => plus().synthesize(kinds[0], fft),
        Part::Minus => minus().synthesize(kinds[1], fft),
        Part::Both => {
            let a = plus().synthesize(kinds[0], fft);
            let b = minus().synthesize(kinds[1], fft);
            a.zip_map(&b, kinds[2], cadd)
        }
    }
}

/// Energy-density wavefunction `Ψ⁽±⁾` (or their sum) at time `t`.
pub fn synthesize_psi(modes: &ModeSet, t: f64, part: Part, units: &Units, fft: &impl Fft3) -> FieldSnapshot {
    synthesize_parts(
        || psi_spectrum(modes, t, Part::Plus, units),
        || psi_spectrum(modes, t, Part::Minus, units),
        part,
        [FieldKind::PsiPlus, FieldKind::PsiMinus, FieldKind::Psi],
        fft,
    )
}

/// Photon-density wavefunction `Φ⁽±⁾` (or their sum) at time `t`.
pub fn synthesize_phi(modes: &ModeSet, t: f64, part: Part, units: &Units, fft: &impl Fft3) -> FieldSnapshot {
    synthesize_parts(
        || phi_spectrum(modes, t, Part::Plus, units),
        || phi_spectrum(modes, t, Part::Minus, units),
        part,
        [FieldKind::PhiPlus, FieldKind::PhiMinus, FieldKind::Phi],
        fft,
    )
}

fn real_field(plus: &HelicitySpectrum, kind: FieldKind, fft: &impl Fft3) -> FieldSnapshot {
    let a = plus.synthesize(kind, fft);
    let b = plus.conjugate_field().synthesize(kind, fft);
    a.zip_map(&b, kind, cadd)
}

/// Coulomb-gauge vector potential `𝒜 = 𝒜⁺ + 𝒜⁻` at time `t`.
pub fn synthesize_potential(modes: &ModeSet, t: f64, units: &Units, fft: &impl Fft3) -> FieldSnapshot {
    real_field(&potential_spectrum(modes, t, units), FieldKind::Potential, fft)
}

/// `D = −ε0 ∂t𝒜` and `B = ∇×𝒜`, both differentiated spectrally.
pub fn fields_from_potential(
    modes: &ModeSet,
    t: f64,
    units: &Units,
    fft: &impl Fft3,
) -> (FieldSnapshot, FieldSnapshot) {
    let a = potential_spectrum(modes, t, units);
    let d = a.time_derivative(units).scaled(C64::new(-units.eps0, 0.0));
    let b = a.curl();
    (
        real_field(&d, FieldKind::Displacement, fft),
        real_field(&b, FieldKind::Magnetic, fft),
    )
}

/// Riemann–Silberstein combination `Ψ = D/√(2ε0) + iB/√(2μ0)`.
pub fn rs_from_db(d: &FieldSnapshot, b: &FieldSnapshot, units: &Units) -> Result<FieldSnapshot> {
    if !d.same_grid(b) {
        return Err(Error::Mismatch("D and B live on different grids".to_string()));
    }
    if d.time != b.time {
        return Err(Error::Mismatch("D and B are sampled at different times".to_string()));
    }
    let sd = C64::new(1.0 / (2.0 * units.eps0).sqrt(), 0.0);
    let sb = C64::new(0.0, 1.0 / (2.0 * units.mu0).sqrt());
    Ok(d.zip_map(b, FieldKind::Psi, |dv, bv| cadd(cscale(dv, sd), cscale(bv, sb))))
}

/// Splits an RS snapshot back into `(D, B)`.
pub fn db_from_rs(psi: &FieldSnapshot, units: &Units) -> (FieldSnapshot, FieldSnapshot) {
    let sd = (2.0 * units.eps0).sqrt();
    let sb = (2.0 * units.mu0).sqrt();
    let d = psi.map(FieldKind::Displacement, |v| {
        [0, 1, 2].map(|w| C64::new(sd * v[w].re, 0.0))
    });
    let b = psi.map(FieldKind::Magnetic, |v| [0, 1, 2].map(|w| C64::new(sb * v[w].im, 0.0)));
    (d, b)
}

/// Derivative wavevector of lattice index `flat` on an `n³` grid, with the
/// Nyquist component set to zero.
pub(crate) fn derivative_wavevector(n: usize, box_length: f64, flat: usize) -> Vec3 {
    let dk = core::f64::consts::TAU / box_length;
    let idx = [flat / (n * n), (flat / n) % n, flat % n];
    idx.map(|j| {
        if n.is_multiple_of(2) && j == n / 2 {
            0.0
        } else if j < n.div_ceil(2) {
            j as f64 * dk
        } else {
            (j as f64 - n as f64) * dk
        }
    })
}

/// Forward transforms of the three components of a snapshot.
pub(crate) fn forward_components(snap: &FieldSnapshot, fft: &impl Fft3) -> [Vec<C64>; 3] {
    [0, 1, 2].map(|w| {
        let mut buf: Vec<C64> = snap.values.iter().map(|v| v[w]).collect();
        fft.forward(snap.n, &mut buf);
        buf
    })
}

/// Assembles a snapshot from three spectra (forward-transform normalization).
pub(crate) fn inverse_components(
    spectra: [Vec<C64>; 3],
    like: &FieldSnapshot,
    kind: FieldKind,
    fft: &impl Fft3,
) -> FieldSnapshot {
    let scale = 1.0 / (like.n * like.n * like.n) as f64;
    let mut out = FieldSnapshot::zeros(like.n, like.box_length, like.time, kind);
    for (w, mut buf) in spectra.into_iter().enumerate() {
        fft.inverse(like.n, &mut buf);
        for (o, b) in out.values.iter_mut().zip(&buf) {
            o[w] = b * scale;
        }
    }
    out
}

/// Spectral curl `∇×F` of a periodic snapshot.
pub fn curl(field: &FieldSnapshot, fft: &impl Fft3) -> FieldSnapshot {
    let [fx, fy, fz] = forward_components(field, fft);
    let len = fx.len();
    let mut out = [
        vec![C64::new(0.0, 0.0); len],
        vec![C64::new(0.0, 0.0); len],
        vec![C64::new(0.0, 0.0); len],
    ];
    let i = C64::new(0.0, 1.0);
    for j in 0..len {
        let k = derivative_wavevector(field.n, field.box_length, j);
        out[0][j] = i * (fz[j] * k[1] - fy[j] * k[2]);
        out[1][j] = i * (fx[j] * k[2] - fz[j] * k[0]);
        out[2][j] = i * (fy[j] * k[0] - fx[j] * k[1]);
    }
    inverse_components(out, field, FieldKind::Derived, fft)
}

/// Largest modulus of the spectral divergence `∇·F` over the grid.
pub fn max_divergence(field: &FieldSnapshot, fft: &impl Fft3) -> f64 {
    let [fx, fy, fz] = forward_components(field, fft);
    let n = field.n;
    let mut div: Vec<C64> = (0..fx.len())
        .map(|j| {
            let k = derivative_wavevector(n, field.box_length, j);
            C64::new(0.0, 1.0) * (fx[j] * k[0] + fy[j] * k[1] + fz[j] * k[2])
        })
        .collect();
    fft.inverse(n, &mut div);
    let scale = 1.0 / (n * n * n) as f64;
    div.iter().map(|c| c.norm() * scale).fold(0.0, f64::max)
}

/// Pointwise complex conjugate of a snapshot.
pub fn conjugate(field: &FieldSnapshot) -> FieldSnapshot {
    field.map(field.kind, cconj)
}
