use core::f64::consts::{PI, TAU};

use crate::vec3::Vec3;
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Cubic lattice of wavevectors `k = 2π m / L` dual to an `n³` periodic box.
///
/// Axis index `j ∈ [0, n)` maps to the signed integer `m = j` for
/// `j < ⌈n/2⌉` and `m = j - n` otherwise. A mode is retained when
/// `|k| ≥ max(κ, Δk/2)` and none of its axis indices sits on the Nyquist
/// plane `j = n/2` (even `n`), where `k` and `-k` alias to one slot. The
/// retained set is therefore closed under `k → -k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KGrid {
    n: usize,
    box_length: f64,
    kappa: f64,
    n_retained: usize,
}

pub fn build_grid(n_per_axis: usize, box_length: f64, kappa: f64) -> Result<KGrid> {
    if n_per_axis < 2 {
        return Err(Error::invalid("n_per_axis must be at least 2"));
    }
    if !(box_length > 0.0) || !box_length.is_finite() {
        return Err(Error::invalid("box_length must be positive and finite"));
    }
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::invalid("kappa must be non-negative and finite"));
    }
    let mut grid = KGrid {
        n: n_per_axis,
        box_length,
        kappa,
        n_retained: 0,
    };
    grid.n_retained = (0..grid.len()).filter(|&i| grid.is_retained(i)).count();
    if grid.n_retained == 0 {
        return Err(Error::EmptyGrid { kappa });
    }
    Ok(grid)
}

impl KGrid {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Number of lattice points, `n³`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Always false: a built grid has `n ≥ 1`.
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn n_retained(&self) -> usize {
        self.n_retained
    }

    /// Lattice spacing `Δk = 2π/L`.
    pub fn dk(&self) -> f64 {
        TAU / self.box_length
    }

    /// Real-space sample spacing `L/n`.
    pub fn spacing(&self) -> f64 {
        self.box_length / self.n as f64
    }

    /// Real-space sample volume `ΔV = (L/n)³`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    /// Weight of each mode in a synthesis sum, `Δk³ / (2π)^{3/2}`.
    pub fn synthesis_weight(&self) -> f64 {
        self.dk().powi(3) / (2.0 * PI).powf(1.5)
    }

    /// Weight of each mode in the energy and number quadratic forms, `Δk³`.
    ///
    /// Equals `L³ · w²` with `w` the synthesis weight, which makes the
    /// discrete Parseval identities exact.
    pub fn mode_measure(&self) -> f64 {
        self.dk().powi(3)
    }

    fn axis_integer(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j < (n + 1) / 2 {
            j
        } else {
            j - n
        }
    }

    fn is_nyquist(&self, j: usize) -> bool {
        self.n.is_multiple_of(2) && j == self.n / 2
    }

    pub fn axis_indices(&self, flat: usize) -> [usize; 3] {
        let n = self.n;
        [flat / (n * n), (flat / n) % n, flat % n]
    }

    pub fn flat(&self, idx: [usize; 3]) -> usize {
        (idx[0] * self.n + idx[1]) * self.n + idx[2]
    }

    /// Signed lattice integers `m` with `k = Δk · m`.
    pub fn integers(&self, flat: usize) -> [i64; 3] {
        let [a, b, c] = self.axis_indices(flat);
        [self.axis_integer(a), self.axis_integer(b), self.axis_integer(c)]
    }

    /// Flat index of the lattice point with integers `m`, if representable.
    pub fn index_of(&self, m: [i64; 3]) -> Option<usize> {
        let n = self.n as i64;
        let mut idx = [0usize; 3];
        for w in 0..3 {
            let j = m[w].rem_euclid(n) as usize;
            if self.axis_integer(j) != m[w] {
                return None;
            }
            idx[w] = j;
        }
        Some(self.flat(idx))
    }

    pub fn wavevector(&self, flat: usize) -> Vec3 {
        let m = self.integers(flat);
        let dk = self.dk();
        [m[0] as f64 * dk, m[1] as f64 * dk, m[2] as f64 * dk]
    }

    pub fn wavenumber(&self, flat: usize) -> f64 {
        let m = self.integers(flat);
        ((m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64).sqrt() * self.dk()
    }

    /// Flat index of `-k`.
    pub fn negate(&self, flat: usize) -> usize {
        let n = self.n;
        let [a, b, c] = self.axis_indices(flat);
        self.flat([(n - a) % n, (n - b) % n, (n - c) % n])
    }

    pub fn is_retained(&self, flat: usize) -> bool {
        let idx = self.axis_indices(flat);
        if idx.iter().any(|&j| self.is_nyquist(j)) {
            return false;
        }
        let threshold = self.kappa.max(0.5 * self.dk());
        self.wavenumber(flat) >= threshold
    }

    pub fn retained(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.is_retained(i))
    }

    /// Largest retained `|k|`.
    pub fn k_max(&self) -> f64 {
        self.retained().map(|i| self.wavenumber(i)).fold(0.0, f64::max)
    }

    /// Largest `|k_w|` along one axis that is not masked as Nyquist.
    pub fn axis_band(&self) -> f64 {
        ((self.n as i64 + 1) / 2 - 1) as f64 * self.dk()
    }

    /// Real-space sample position of flat index `flat`.
    pub fn position(&self, flat: usize) -> Vec3 {
        let h = self.spacing();
        let [a, b, c] = self.axis_indices(flat);
        [a as f64 * h, b as f64 * h, c as f64 * h]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_lattice_is_fully_masked() {
        // 8 lattice points, integers {0, -1} per axis; k = 0 is masked and
        // every other point lies on a Nyquist plane.
        let err = build_grid(2, TAU, 0.0).unwrap_err();
        assert_eq!(err, Error::EmptyGrid { kappa: 0.0 });
        let g = KGrid {
            n: 2,
            box_length: TAU,
            kappa: 0.0,
            n_retained: 0,
        };
        assert_eq!(g.len(), 8);
        assert_eq!(g.integers(7), [-1, -1, -1]);
        assert!(!g.is_retained(0));
    }

    #[test]
    fn kappa_ball_masking() {
        let g = build_grid(8, TAU, 1.5).unwrap();
        let at = |m| g.index_of(m).unwrap();
        assert!(!g.is_retained(at([1, 0, 0])));
        assert!(!g.is_retained(at([1, 1, 0])));
        assert!(g.is_retained(at([2, 0, 0])));
        assert!(g.is_retained(at([1, 1, 1])));
        assert!(!g.is_retained(at([0, 0, 0])));
    }

    #[test]
    fn kappa_beyond_band_is_empty() {
        assert_eq!(build_grid(8, TAU, 100.0), Err(Error::EmptyGrid { kappa: 100.0 }));
    }

    #[test]
    fn zero_kappa_masks_only_origin_and_nyquist() {
        let g = build_grid(5, TAU, 0.0).unwrap();
        assert_eq!(g.n_retained(), 124);
        let g = build_grid(6, TAU, 0.0).unwrap();
        assert_eq!(g.n_retained(), 124);
    }

    #[test]
    fn invalid_dimensions() {
        assert!(matches!(build_grid(1, 1.0, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_grid(4, 0.0, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_grid(4, -1.0, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_grid(4, 1.0, -0.1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn parity_closure_is_exhaustive() {
        for n in [3, 4, 7, 8] {
            for kappa in [0.0, 1.2, 2.5] {
                let Ok(g) = build_grid(n, TAU, kappa) else {
                    continue;
                };
                for i in g.retained() {
                    let j = g.negate(i);
                    assert!(g.is_retained(j));
                    let (mi, mj) = (g.integers(i), g.integers(j));
                    assert_eq!([mi[0] + mj[0], mi[1] + mj[1], mi[2] + mj[2]], [0, 0, 0]);
                }
            }
        }
    }

    #[test]
    fn weights() {
        let g = build_grid(4, 2.0, 0.0).unwrap();
        let dk = PI;
        assert!((g.synthesis_weight() - dk.powi(3) / (TAU).powf(1.5)).abs() < 1e-15);
        let l3w2 = g.box_length().powi(3) * g.synthesis_weight().powi(2);
        assert!((l3w2 - g.mode_measure()).abs() < 1e-12 * g.mode_measure());
    }
}
