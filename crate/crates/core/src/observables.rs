//! Energy and photon-number observables, total and per volume, and the
//! plane-wave overlap diagnostic behind photon localization.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use crate::kspace::ModeSet;
use crate::synthesis::{phi_spectrum, psi_spectrum, FieldKind, FieldSnapshot, Part};
use crate::vec3::{cnorm_sqr, Vec3};
use crate::{Error, Fft3, Result, Units, C64};
#[allow(unused_imports)]
use num_traits::Float;

/// `Σ_k Δk³ ħc|k| Σ_σ |A_σ(k)|²`.
pub fn energy_total(modes: &ModeSet, units: &Units) -> f64 {
    let grid = modes.grid();
    let sum: f64 = grid
        .retained()
        .map(|i| {
            let a = modes.amps()[i];
            grid.wavenumber(i) * (a[0].norm_sqr() + a[1].norm_sqr())
        })
        .sum();
    sum * grid.mode_measure() * units.hbar * units.c
}

/// `Σ_k Δk³ Σ_σ |A_σ(k)|²`.
pub fn number_total(modes: &ModeSet) -> f64 {
    modes.norm_sqr()
}

/// Returns `(H/(ħω₀N), H/(ħN))`, where `ω₀ = c|k|` of the mode carrying the
/// largest single amplitude.
pub fn narrowband_ratio(modes: &ModeSet, units: &Units) -> Result<(f64, f64)> {
    let number = number_total(modes);
    if !(number > 0.0) {
        return Err(Error::UndefinedRatio);
    }
    let grid = modes.grid();
    let mut best = (0.0, 0usize);
    for i in grid.retained() {
        let a = modes.amps()[i];
        let w = a[0].norm_sqr().max(a[1].norm_sqr());
        if w > best.0 {
            best = (w, i);
        }
    }
    let energy = energy_total(modes, units);
    let omega0 = units.c * grid.wavenumber(best.1);
    let omega_bar = energy / (units.hbar * number);
    Ok((omega_bar / omega0, omega_bar))
}

/// Axis-aligned box `[lower, upper)` inside the periodic cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeBox {
    lower: Vec3,
    upper: Vec3,
}

impl VolumeBox {
    pub fn new(lower: Vec3, upper: Vec3) -> Result<Self> {
        for w in 0..3 {
            if !lower[w].is_finite() || !upper[w].is_finite() || !(lower[w] < upper[w]) {
                return Err(Error::invalid(format!(
                    "volume bounds on axis {w} must satisfy lower < upper, got [{}, {})",
                    lower[w], upper[w]
                )));
            }
        }
        Ok(VolumeBox { lower, upper })
    }

    /// The whole periodic cell `[0, L)³`.
    pub fn full(box_length: f64) -> Self {
        VolumeBox {
            lower: [0.0; 3],
            upper: [box_length; 3],
        }
    }

    pub fn lower(&self) -> Vec3 {
        self.lower
    }

    pub fn upper(&self) -> Vec3 {
        self.upper
    }

    pub fn dims(&self) -> Vec3 {
        [0, 1, 2].map(|w| self.upper[w] - self.lower[w])
    }

    pub fn center(&self) -> Vec3 {
        [0, 1, 2].map(|w| 0.5 * (self.upper[w] + self.lower[w]))
    }

    pub fn volume(&self) -> f64 {
        let d = self.dims();
        d[0] * d[1] * d[2]
    }

    pub fn contains(&self, r: Vec3) -> bool {
        (0..3).all(|w| self.lower[w] <= r[w] && r[w] < self.upper[w])
    }

    pub fn overlaps(&self, other: &VolumeBox) -> bool {
        (0..3).all(|w| self.lower[w] < other.upper[w] && other.lower[w] < self.upper[w])
    }

    pub fn fits_in(&self, box_length: f64) -> bool {
        (0..3).all(|w| self.lower[w] >= 0.0 && self.upper[w] <= box_length)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeReport {
    pub volume: VolumeBox,
    pub h_local: f64,
    pub n_local: f64,
    /// Signed `dH_local/dt`.
    pub e_dot: f64,
    /// Signed `dN_local/dt`.
    pub n_dot: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableReport {
    pub h_total: f64,
    pub n_total: f64,
    pub per_volume: Vec<VolumeReport>,
    pub kappa: f64,
    pub time: f64,
    /// Volumes not larger than `2π/κ` in every dimension.
    pub warnings: Vec<String>,
}

impl ObservableReport {
    pub fn sum_h_local(&self) -> f64 {
        self.per_volume.iter().map(|v| v.h_local).sum()
    }

    pub fn sum_n_local(&self) -> f64 {
        self.per_volume.iter().map(|v| v.n_local).sum()
    }
}

/// `ΔV Σ_{r ∈ V} ‖F(r)‖²` for each volume; a sample counts iff its position
/// lies in the half-open box.
pub fn volume_integrals(field: &FieldSnapshot, volumes: &[VolumeBox]) -> Vec<f64> {
    let n = field.n;
    let h = field.box_length / n as f64;
    let mut out = alloc::vec![0.0; volumes.len()];
    for (m, v) in field.values.iter().enumerate() {
        let r = [(m / (n * n)) as f64 * h, ((m / n) % n) as f64 * h, (m % n) as f64 * h];
        let e = cnorm_sqr(*v);
        for (o, b) in out.iter_mut().zip(volumes) {
            if b.contains(r) {
                *o += e;
            }
        }
    }
    let dv = field.cell_volume();
    out.iter_mut().for_each(|o| *o *= dv);
    out
}

/// Central-difference step used for the local rates: `0.01/(c k_max)`.
pub fn rate_step(modes: &ModeSet, units: &Units) -> f64 {
    0.01 / (units.c * modes.grid().k_max())
}

/// Local energy and photon content of `Ψ⁺` and `Φ⁺` at time `t`, with
/// signed rates from central differences.
pub fn local_observables(
    modes: &ModeSet,
    volumes: &[VolumeBox],
    t: f64,
    units: &Units,
    fft: &impl Fft3,
) -> Result<ObservableReport> {
    let grid = modes.grid();
    for (i, a) in volumes.iter().enumerate() {
        if !a.fits_in(grid.box_length()) {
            return Err(Error::invalid(format!("volume {i} extends outside the periodic box")));
        }
        for (j, b) in volumes.iter().enumerate().skip(i + 1) {
            if a.overlaps(b) {
                return Err(Error::invalid(format!("volumes {i} and {j} overlap")));
            }
        }
    }
    let min_dim = TAU / grid.kappa();
    let warnings = volumes
        .iter()
        .enumerate()
        .filter(|(_, v)| v.dims().iter().any(|&d| !(d > min_dim)))
        .map(|(i, v)| {
            let d = v.dims();
            format!(
                "volume {i} has dimensions ({}, {}, {}) not all larger than 2pi/kappa = {min_dim}",
                d[0], d[1], d[2]
            )
        })
        .collect();

    let content = |tt: f64| {
        let psi = psi_spectrum(modes, tt, Part::Plus, units).synthesize(FieldKind::PsiPlus, fft);
        let phi = phi_spectrum(modes, tt, Part::Plus, units).synthesize(FieldKind::PhiPlus, fft);
        (volume_integrals(&psi, volumes), volume_integrals(&phi, volumes))
    };
    let h = rate_step(modes, units);
    let (h_now, n_now) = content(t);
    let (h_next, n_next) = content(t + h);
    let (h_prev, n_prev) = content(t - h);
    let per_volume = volumes
        .iter()
        .enumerate()
        .map(|(i, v)| VolumeReport {
            volume: *v,
            h_local: h_now[i],
            n_local: n_now[i],
            e_dot: (h_next[i] - h_prev[i]) / (2.0 * h),
            n_dot: (n_next[i] - n_prev[i]) / (2.0 * h),
        })
        .collect();
    Ok(ObservableReport {
        h_total: energy_total(modes, units),
        n_total: number_total(modes),
        per_volume,
        kappa: grid.kappa(),
        time: t,
        warnings,
    })
}

/// `sin(x)/x` with exact zeros at nonzero multiples of π.
fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let q = x / PI;
    if q.round() == q || ((q - q.round()).abs() < 1e-12 * q.abs().max(1.0) && q.round() != 0.0) {
        return 0.0;
    }
    x.sin() / x
}

/// `∫_V exp(i(k′−k)·r) d³r = e^{i(k′−k)·c} V Π_w sinc((k′_w − k_w) L_w/2)`
/// with `c` the box center.
pub fn sinc_overlap(volume: &VolumeBox, k: Vec3, kp: Vec3) -> C64 {
    let d = [kp[0] - k[0], kp[1] - k[1], kp[2] - k[2]];
    let dims = volume.dims();
    let c = volume.center();
    let mag: f64 = (0..3).map(|w| dims[w] * sinc(0.5 * d[w] * dims[w])).product();
    if mag == 0.0 {
        return C64::new(0.0, 0.0);
    }
    C64::from_polar(mag, d[0] * c[0] + d[1] * c[1] + d[2] * c[2])
}

/// Normalized overlaps `|sinc_overlap(V, k_i, k_j)|/V` over a band.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationTable {
    pub band: Vec<Vec3>,
    /// Row-major `band.len()²` table.
    pub overlaps: Vec<f64>,
    pub max_off_diagonal: f64,
}

impl LocalizationTable {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.overlaps[i * self.band.len() + j]
    }
}

pub fn localization_study(volume: &VolumeBox, band: &[Vec3]) -> Result<LocalizationTable> {
    if band.is_empty() {
        return Err(Error::invalid("localization band is empty"));
    }
    let v = volume.volume();
    let m = band.len();
    let mut overlaps = Vec::with_capacity(m * m);
    let mut max_off = 0.0f64;
    for (i, k) in band.iter().enumerate() {
        for (j, kp) in band.iter().enumerate() {
            let o = sinc_overlap(volume, *k, *kp).norm() / v;
            if i != j {
                max_off = max_off.max(o);
            }
            overlaps.push(o);
        }
    }
    Ok(LocalizationTable {
        band: band.to_vec(),
        overlaps,
        max_off_diagonal: max_off,
    })
}

/// Lattice wavevectors `2π m_w/L_w` of the box itself, `|m_w| ≤ m_max`.
pub fn commensurate_band(volume: &VolumeBox, m_max: i64) -> Vec<Vec3> {
    let d = volume.dims();
    let mut out = Vec::new();
    for a in -m_max..=m_max {
        for b in -m_max..=m_max {
            for c in -m_max..=m_max {
                out.push([TAU * a as f64 / d[0], TAU * b as f64 / d[1], TAU * c as f64 / d[2]]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve_spectral;
    use crate::kspace::{build_grid, gaussian_wavepacket, symmetrize, Helicity};
    use crate::synthesis::{synthesize_phi, synthesize_psi};
    use crate::DirectDft;

    fn random_modes(n: usize, l: f64, seed: u64) -> ModeSet {
        let grid = build_grid(n, l, 0.0).unwrap();
        let mut s = seed;
        let mut rnd = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        symmetrize(&ModeSet::from_fn(&grid, |_, _| C64::new(rnd(), rnd())))
    }

    #[test]
    fn single_unit_mode_totals() {
        let grid = build_grid(5, TAU, 0.0).unwrap();
        let i = grid.index_of([2, 1, 0]).unwrap();
        let mut m = ModeSet::zeros(&grid);
        m.set(i, Helicity::Minus, C64::new(0.0, 1.0 / grid.mode_measure().sqrt()));
        let u = Units::new(2.0, 0.5, 0.5);
        let omega = u.c * grid.wavenumber(i);
        assert!((energy_total(&m, &u) - u.hbar * omega).abs() < 1e-14);
        assert!((number_total(&m) - 1.0).abs() < 1e-15);
        let (ratio, wbar) = narrowband_ratio(&m, &u).unwrap();
        assert_eq!(ratio, 1.0);
        assert!((wbar - omega).abs() < 1e-14);

        let z = ModeSet::zeros(&grid);
        assert_eq!(energy_total(&z, &u), 0.0);
        assert_eq!(number_total(&z), 0.0);
        assert_eq!(narrowband_ratio(&z, &u), Err(Error::UndefinedRatio));
    }

    #[test]
    fn parseval_pair_and_invariance() {
        let m = random_modes(5, 3.0, 4);
        let u = Units::new(0.9, 1.1, 0.8);
        let h = energy_total(&m, &u);
        let n = number_total(&m);
        for t in [0.0, 0.7, 5.3] {
            let psi = synthesize_psi(&m, t, Part::Plus, &u, &DirectDft);
            let phi = synthesize_phi(&m, t, Part::Plus, &u, &DirectDft);
            assert!((psi.integral_norm_sqr() - h).abs() < 1e-10 * h.max(1.0));
            assert!((phi.integral_norm_sqr() - n).abs() < 1e-10 * n.max(1.0));
            let later = evolve_spectral(&m, t, &u);
            assert!((energy_total(&later, &u) - h).abs() < 1e-12 * h);
            assert!((number_total(&later) - n).abs() < 1e-12 * n);
        }
    }

    #[test]
    fn wideband_packet_breaks_proportionality() {
        let grid = build_grid(32, 32.0, 0.0).unwrap();
        let dk = grid.dk();
        let k0 = [6.0 * dk, 6.0 * dk, 6.0 * dk];
        let k0n = 6.0 * dk * 3f64.sqrt();
        let m = gaussian_wavepacket(&grid, k0, 0.3 * k0n, Helicity::Plus, C64::new(1.0, 0.0)).unwrap();
        let (ratio, _) = narrowband_ratio(&m, &Units::natural()).unwrap();
        assert!((ratio - 1.0).abs() > 0.01);
    }

    #[test]
    fn partition_is_additive_and_closed() {
        let m = random_modes(6, 5.0, 12);
        let u = Units::natural();
        let l = 5.0;
        let halves = [
            VolumeBox::new([0.0; 3], [l / 2.0, l, l]).unwrap(),
            VolumeBox::new([l / 2.0, 0.0, 0.0], [l, l, l]).unwrap(),
        ];
        let r = local_observables(&m, &halves, 0.4, &u, &DirectDft).unwrap();
        assert!((r.sum_h_local() - r.h_total).abs() < 1e-10 * r.h_total);
        assert!((r.sum_n_local() - r.n_total).abs() < 1e-10 * r.n_total);
        assert!(r.per_volume.iter().all(|v| v.h_local >= 0.0 && v.n_local >= 0.0));

        let full = local_observables(&m, &[VolumeBox::full(l)], 0.4, &u, &DirectDft).unwrap();
        let v = &full.per_volume[0];
        assert!((v.h_local - full.h_total).abs() < 1e-10 * full.h_total);
        assert!(v.e_dot.abs() < 1e-8 && v.n_dot.abs() < 1e-8);
        // κ = 0 makes 2π/κ infinite, so the condition cannot hold.
        assert_eq!(full.warnings.len(), 1);
    }

    #[test]
    fn overlapping_volumes_are_rejected() {
        let m = random_modes(4, 2.0, 1);
        let a = VolumeBox::new([0.0; 3], [1.0; 3]).unwrap();
        let b = VolumeBox::new([0.5; 3], [1.5; 3]).unwrap();
        let r = local_observables(&m, &[a, b], 0.0, &Units::natural(), &DirectDft);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
        let outside = VolumeBox::new([1.0; 3], [2.5; 3]).unwrap();
        assert!(local_observables(&m, &[outside], 0.0, &Units::natural(), &DirectDft).is_err());
        assert!(VolumeBox::new([0.0; 3], [1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn kappa_condition_warns() {
        let grid = build_grid(6, 12.0, 1.2).unwrap();
        let m = symmetrize(&ModeSet::from_fn(&grid, |i, _| C64::new(1.0 / (1.0 + i as f64), 0.0)));
        let big = VolumeBox::new([0.0; 3], [6.0; 3]).unwrap();
        let small = VolumeBox::new([6.0; 3], [10.0, 12.0, 12.0]).unwrap();
        let r = local_observables(&m, &[big, small], 0.0, &Units::natural(), &DirectDft).unwrap();
        assert_eq!(r.warnings.len(), 1);
        assert!(r.warnings[0].starts_with("volume 1"));
    }

    #[test]
    fn sinc_overlap_examples() {
        let v = VolumeBox::new([0.0, 1.0, -2.0], [2.0, 4.0, 3.0]).unwrap();
        let vol = v.volume();
        let k = [0.3, -1.0, 2.0];
        assert!((sinc_overlap(&v, k, k) - C64::new(vol, 0.0)).norm() < 1e-14);
        let kp = [k[0] + TAU / 2.0, k[1], k[2]];
        assert_eq!(sinc_overlap(&v, k, kp), C64::new(0.0, 0.0));
        let d = v.dims();
        let kq = [k[0] + PI / d[0], k[1] + PI / d[1], k[2] + PI / d[2]];
        let want = vol * (2.0 / PI).powi(3);
        assert!((sinc_overlap(&v, k, kq).norm() - want).abs() < 1e-13 * vol);
    }

    #[test]
    fn commensurate_band_table_is_diagonal() {
        let v = VolumeBox::new([0.5, 0.0, 1.0], [3.5, 2.0, 5.0]).unwrap();
        let t = localization_study(&v, &commensurate_band(&v, 2)).unwrap();
        assert_eq!(t.max_off_diagonal, 0.0);
        for i in 0..t.band.len() {
            assert!((t.get(i, i) - 1.0).abs() < 1e-15);
        }
        assert!(localization_study(&v, &[]).is_err());
    }

    #[test]
    fn off_diagonal_overlap_respects_envelope() {
        let l = 2.0 * (10.0 * PI + PI / 2.0);
        let v = VolumeBox::new([0.0; 3], [l; 3]).unwrap();
        let band = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [1.0, 1.0, 1.0]];
        let t = localization_study(&v, &band).unwrap();
        assert!(t.max_off_diagonal <= 1.0 / (10.0 * PI + PI / 2.0) + 1e-15);
        assert!(t.max_off_diagonal > 0.0);
    }

    #[test]
    fn local_rates_match_difference_oracle() {
        let grid = build_grid(6, 6.0, 0.0).unwrap();
        let dk = grid.dk();
        let m = gaussian_wavepacket(&grid, [dk, 0.0, 0.0], dk, Helicity::Plus, C64::new(1.0, 0.0)).unwrap();
        let u = Units::natural();
        let slab = VolumeBox::new([1.0, 0.0, 0.0], [3.0, 6.0, 6.0]).unwrap();
        let t = 0.8;
        let r = local_observables(&m, &[slab], t, &u, &DirectDft).unwrap();
        let h = 1e-4;
        let n_at = |tt| volume_integrals(&synthesize_phi(&m, tt, Part::Plus, &u, &DirectDft), &[slab])[0];
        let oracle = (n_at(t + h) - n_at(t - h)) / (2.0 * h);
        // The report's step is 0.01/(c k_max), so it differs from the
        // fine-step oracle by O((0.01)²).
        assert!((r.per_volume[0].n_dot - oracle).abs() < 1e-4 * oracle.abs());
        assert!(oracle.abs() > 1e-3);
    }
}
