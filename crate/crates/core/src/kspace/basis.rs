use core::f64::consts::FRAC_1_SQRT_2;

use super::KGrid;
use crate::vec3::{cross, norm, scale, CVec3, Vec3};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Helicity {
    Plus,
    Minus,
}

impl Helicity {
    pub const BOTH: [Helicity; 2] = [Helicity::Plus, Helicity::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Helicity::Plus => 1.0,
            Helicity::Minus => -1.0,
        }
    }

    /// Storage slot: 0 for `+`, 1 for `-`.
    pub fn index(self) -> usize {
        match self {
            Helicity::Plus => 0,
            Helicity::Minus => 1,
        }
    }

    pub fn flip(self) -> Helicity {
        match self {
            Helicity::Plus => Helicity::Minus,
            Helicity::Minus => Helicity::Plus,
        }
    }
}

/// Orthonormal frame `(k̂, ũ₊, ũ₋)` at one lattice vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triad {
    pub khat: Vec3,
    /// `u[0] = ũ₊`, `u[1] = ũ₋`.
    pub u: [CVec3; 2],
}

impl Triad {
    pub fn u(&self, h: Helicity) -> CVec3 {
        self.u[h.index()]
    }
}

/// Circular-polarization basis over a [`KGrid`].
///
/// Triads are computed on demand from the lattice integers, so the basis
/// costs nothing to hold and every call returns bit-identical vectors.
///
/// Construction for `k` in the positive half-space (first non-zero lattice
/// integer positive): `ũ₁ = ẑ×k̂/|ẑ×k̂|` (or `x̂` when `k̂ ∥ ẑ`),
/// `ũ₂ = k̂×ũ₁`, `ũ₊ = (ũ₁ + iũ₂)/√2`, `ũ₋ = ũ₊*`. For the other half the
/// frame is copied from `-k` with the helicities exchanged, which fixes the
/// phase so that `ũ_σ(-k) = ũ_{-σ}(k)` holds exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelicityBasis {
    grid: KGrid,
}

pub fn helicity_basis(grid: &KGrid) -> Result<HelicityBasis> {
    if grid.n_retained() == 0 {
        return Err(Error::EmptyGrid { kappa: grid.kappa() });
    }
    Ok(HelicityBasis { grid: *grid })
}

fn positive_half(m: [i64; 3]) -> bool {
    m.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

/// Right-handed frame for a direction in the positive half-space.
fn raw_triad(m: [i64; 3]) -> Triad {
    let v = [m[0] as f64, m[1] as f64, m[2] as f64];
    let khat = scale(v, 1.0 / norm(v));
    let zk = cross([0.0, 0.0, 1.0], khat);
    let zk_norm = norm(zk);
    let u1 = if zk_norm > 1e-9 {
        scale(zk, 1.0 / zk_norm)
    } else {
        [1.0, 0.0, 0.0]
    };
    let u2 = cross(khat, u1);
    let mut plus = [C64::new(0.0, 0.0); 3];
    let mut minus = [C64::new(0.0, 0.0); 3];
    for w in 0..3 {
        plus[w] = C64::new(u1[w], u2[w]) * FRAC_1_SQRT_2;
        minus[w] = plus[w].conj();
    }
    Triad { khat, u: [plus, minus] }
}

impl HelicityBasis {
    pub fn grid(&self) -> &KGrid {
        &self.grid
    }

    /// Triad at lattice integers `m ≠ 0`.
    pub fn triad_at(m: [i64; 3]) -> Triad {
        assert!(m != [0, 0, 0], "helicity basis is undefined at k = 0");
        if positive_half(m) {
            raw_triad(m)
        } else {
            let t = raw_triad([-m[0], -m[1], -m[2]]);
            Triad {
                khat: scale(t.khat, -1.0),
                u: [t.u[1], t.u[0]],
            }
        }
    }

    /// Triad at a retained flat lattice index.
    pub fn triad(&self, flat: usize) -> Triad {
        debug_assert!(self.grid.is_retained(flat));
        Self::triad_at(self.grid.integers(flat))
    }
}
