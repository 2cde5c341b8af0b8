use alloc::vec;
use alloc::vec::Vec;

use super::{helicity_basis, Helicity, HelicityBasis, KGrid};
use crate::vec3::{norm, sub, Vec3};
use crate::{Error, Result, C64};
#[allow(unused_imports)]
use num_traits::Float;

/// Positive-frequency helicity amplitudes `A_σ(k)` on every lattice point.
///
/// Masked lattice points always hold zero. The negative-frequency amplitudes
/// are never stored; they are the complex conjugates of these.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    grid: KGrid,
    basis: HelicityBasis,
    amp: Vec<[C64; 2]>,
    physical: bool,
}

impl ModeSet {
    pub fn zeros(grid: &KGrid) -> Self {
        ModeSet {
            grid: *grid,
            basis: helicity_basis(grid).expect("a built KGrid is never empty"),
            amp: vec![[C64::new(0.0, 0.0); 2]; grid.len()],
            physical: true,
        }
    }

    /// Fills every retained mode from `f(flat_index, helicity)`.
    pub fn from_fn(grid: &KGrid, mut f: impl FnMut(usize, Helicity) -> C64) -> Self {
        let mut m = ModeSet::zeros(grid);
        for i in grid.retained() {
            m.amp[i] = [f(i, Helicity::Plus), f(i, Helicity::Minus)];
        }
        m.physical = false;
        m
    }

    pub fn grid(&self) -> &KGrid {
        &self.grid
    }

    pub fn basis(&self) -> &HelicityBasis {
        &self.basis
    }

    /// Whether the amplitudes were produced by [`symmetrize`] (or an
    /// operation that preserves its output).
    pub fn is_physical(&self) -> bool {
        self.physical
    }

    pub fn amp(&self, flat: usize, h: Helicity) -> C64 {
        self.amp[flat][h.index()]
    }

    pub fn amps(&self) -> &[[C64; 2]] {
        &self.amp
    }

    /// Sets one amplitude. Writing to a masked mode is ignored; any write
    /// clears the physical flag.
    pub fn set(&mut self, flat: usize, h: Helicity, value: C64) {
        if self.grid.is_retained(flat) {
            self.amp[flat][h.index()] = value;
            self.physical = false;
        }
    }

    pub(crate) fn map_amps(&self, physical: bool, mut f: impl FnMut(usize, [C64; 2]) -> [C64; 2]) -> ModeSet {
        let mut out = ModeSet::zeros(&self.grid);
        for i in self.grid.retained() {
            out.amp[i] = f(i, self.amp[i]);
        }
        out.physical = physical;
        out
    }

    /// Largest violation of `A_σ(-k) = A_{-σ}(k)*`.
    pub fn symmetry_defect(&self) -> f64 {
        self.grid
            .retained()
            .map(|i| {
                let j = self.grid.negate(i);
                let a = self.amp[i];
                let b = self.amp[j];
                (b[0] - a[1].conj()).norm().max((b[1] - a[0].conj()).norm())
            })
            .fold(0.0, f64::max)
    }

    /// `Σ_k Δk³ Σ_σ |A_σ(k)|²`.
    pub fn norm_sqr(&self) -> f64 {
        let sum: f64 = self.amp.iter().map(|a| a[0].norm_sqr() + a[1].norm_sqr()).sum();
        sum * self.grid.mode_measure()
    }

    /// Largest elementwise difference to another mode set on the same grid.
    pub fn max_abs_diff(&self, other: &ModeSet) -> f64 {
        assert_eq!(self.grid, other.grid, "mode sets live on different grids");
        self.amp
            .iter()
            .zip(&other.amp)
            .map(|(a, b)| (a[0] - b[0]).norm().max((a[1] - b[1]).norm()))
            .fold(0.0, f64::max)
    }

    pub(crate) fn scaled(mut self, s: f64) -> ModeSet {
        for a in &mut self.amp {
            a[0] *= s;
            a[1] *= s;
        }
        self
    }

    pub(crate) fn mark_physical(mut self, physical: bool) -> ModeSet {
        self.physical = physical;
        self
    }
}

/// Projects onto amplitudes obeying `A_σ(-k) = A_{-σ}(k)*`:
/// `A'_σ(k) = [A_σ(k) + A_{-σ}(-k)*] / 2`.
pub fn symmetrize(modes: &ModeSet) -> ModeSet {
    let grid = modes.grid;
    modes.map_amps(true, |i, a| {
        let b = modes.amp[grid.negate(i)];
        [(a[0] + b[1].conj()) * 0.5, (a[1] + b[0].conj()) * 0.5]
    })
}

/// Gaussian packet `A_σ(k) ∝ exp(-|k - k0|² / (4σ_k²))` in one helicity,
/// symmetrized and normalized so that `Σ Δk³ Σ_σ |A_σ|² = |amplitude|²`.
pub fn gaussian_wavepacket(
    grid: &KGrid,
    k0: Vec3,
    sigma_k: f64,
    helicity: Helicity,
    amplitude: C64,
) -> Result<ModeSet> {
    if !(sigma_k > 0.0) || !sigma_k.is_finite() {
        return Err(Error::invalid("sigma_k must be positive"));
    }
    let k0_norm = norm(k0);
    if !(k0_norm > grid.kappa()) {
        return Err(Error::invalid("|k0| must exceed kappa"));
    }
    let band = grid.axis_band();
    if k0.iter().any(|c| !c.is_finite() || c.abs() > band) {
        return Err(Error::invalid("k0 lies outside the lattice band"));
    }
    if amplitude == C64::new(0.0, 0.0) {
        return Ok(ModeSet::zeros(grid));
    }
    let inv = 1.0 / (4.0 * sigma_k * sigma_k);
    let raw = ModeSet::from_fn(grid, |i, h| {
        if h == helicity {
            let d = sub(grid.wavevector(i), k0);
            amplitude * (-(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) * inv).exp()
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let sym = symmetrize(&raw);
    let total = sym.norm_sqr();
    if !(total > 0.0) {
        return Err(Error::invalid("wavepacket has no weight on the retained lattice"));
    }
    Ok(sym.scaled(amplitude.norm() / total.sqrt()).mark_physical(true))
}
