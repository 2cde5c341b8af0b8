//! Time evolution: exact helicity phases in k-space, and staggered leapfrog
//! stepping of the Maxwell curl pair in real space.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::kspace::{Helicity, ModeSet};
use crate::synthesis::{
    self, curl, derivative_wavevector, forward_components, inverse_components, phi_spectrum, psi_spectrum, FieldKind,
    FieldSnapshot, Part,
};
use crate::vec3::{cadd, cnorm_sqr, cscale, csub, CVec3};
use crate::{Error, Fft3, Result, Units, C64};
#[allow(unused_imports)]
use num_traits::Float;

/// The three spin-1 matrices `(L_w)_{jk} = −i ε_{wjk}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spin1Generators {
    pub l: [[[C64; 3]; 3]; 3],
}

impl Spin1Generators {
    pub fn lx(&self) -> &[[C64; 3]; 3] {
        &self.l[0]
    }

    pub fn ly(&self) -> &[[C64; 3]; 3] {
        &self.l[1]
    }

    pub fn lz(&self) -> &[[C64; 3]; 3] {
        &self.l[2]
    }

    /// `L_w v`.
    pub fn apply(&self, w: usize, v: CVec3) -> CVec3 {
        let m = &self.l[w];
        [0, 1, 2].map(|j| m[j][0] * v[0] + m[j][1] * v[1] + m[j][2] * v[2])
    }
}

pub fn spin1_generators() -> Spin1Generators {
    let z = C64::new(0.0, 0.0);
    let i = C64::new(0.0, 1.0);
    Spin1Generators {
        l: [
            [[z, z, z], [z, z, -i], [z, i, z]],
            [[z, z, i], [z, z, z], [-i, z, z]],
            [[z, -i, z], [i, z, z], [z, z, z]],
        ],
    }
}

/// `−i (L·∇) F` with the gradient taken spectrally.
pub fn l_dot_grad(field: &FieldSnapshot, fft: &impl Fft3) -> FieldSnapshot {
    let gens = spin1_generators();
    let spectra = forward_components(field, fft);
    let len = spectra[0].len();
    let mut out = [
        vec![C64::new(0.0, 0.0); len],
        vec![C64::new(0.0, 0.0); len],
        vec![C64::new(0.0, 0.0); len],
    ];
    for j in 0..len {
        let k = derivative_wavevector(field.n, field.box_length, j);
        let f = [spectra[0][j], spectra[1][j], spectra[2][j]];
        let mut acc = [C64::new(0.0, 0.0); 3];
        for (w, kw) in k.iter().enumerate() {
            // ∂_w → i k_w, so −i L_w ∂_w → k_w L_w.
            acc = cadd(acc, cscale(gens.apply(w, f), C64::new(*kw, 0.0)));
        }
        for c in 0..3 {
            out[c][j] = acc[c];
        }
    }
    inverse_components(out, field, FieldKind::Derived, fft)
}

/// Largest pointwise distance between `∇×F` and `−i(L·∇)F`.
pub fn curl_vs_l_check(field: &FieldSnapshot, fft: &impl Fft3) -> f64 {
    curl(field, fft).max_abs_diff(&l_dot_grad(field, fft))
}

/// Exact evolution of the amplitudes: `A_σ(k) → A_σ(k) e^{−iσ|k|ct}`.
///
/// Synthesizing the result at time 0 gives the fields of `modes` at `t`.
/// The phases differ between `(k, σ)` and `(−k, −σ)`, so for `t ≠ 0` the
/// output is no longer in the symmetric subspace and is not flagged physical.
pub fn evolve_spectral(modes: &ModeSet, t: f64, units: &Units) -> ModeSet {
    if t == 0.0 {
        return modes.clone();
    }
    let grid = *modes.grid();
    modes.map_amps(false, |i, a| {
        let omega = units.c * grid.wavenumber(i);
        let mut out = a;
        for h in Helicity::BOTH {
            out[h.index()] *= C64::from_polar(1.0, -h.sign() * omega * t);
        }
        out
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Spectral,
    Leapfrog,
}

/// Time-ordered field snapshots on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    scheme: Scheme,
    times: Vec<f64>,
    states: Vec<FieldSnapshot>,
}

impl Trajectory {
    pub fn new(scheme: Scheme, times: Vec<f64>, states: Vec<FieldSnapshot>) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::Mismatch(format!(
                "{} times for {} states",
                times.len(),
                states.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("trajectory times must be strictly increasing"));
        }
        if let Some(first) = states.first() {
            if states.iter().any(|s| !s.same_grid(first)) {
                return Err(Error::Mismatch("trajectory states live on different grids".into()));
            }
        }
        Ok(Trajectory { scheme, times, states })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[FieldSnapshot] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> Option<&FieldSnapshot> {
        self.states.last()
    }
}

/// Which wavefunction a spectral trajectory samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wavefunction {
    Psi,
    Phi,
}

/// Positive-frequency `Ψ` or `Φ` of `modes` at each of `times`.
pub fn spectral_trajectory(
    modes: &ModeSet,
    which: Wavefunction,
    times: &[f64],
    units: &Units,
    fft: &impl Fft3,
) -> Result<Trajectory> {
    let states = times
        .iter()
        .map(|&t| match which {
            Wavefunction::Psi => psi_spectrum(modes, t, Part::Plus, units).synthesize(FieldKind::PsiPlus, fft),
            Wavefunction::Phi => phi_spectrum(modes, t, Part::Plus, units).synthesize(FieldKind::PhiPlus, fft),
        })
        .collect();
    Trajectory::new(Scheme::Spectral, times.to_vec(), states)
}

/// Largest stable leapfrog step for an `n³` grid of side `box_length`:
/// `0.9 · 2/(c k_max)` with `k_max` the largest resolved derivative wavevector.
pub fn stability_bound(n: usize, box_length: f64, units: &Units) -> f64 {
    let dk = core::f64::consts::TAU / box_length;
    let kmax = 3f64.sqrt() * (n.div_ceil(2) - 1) as f64 * dk;
    if kmax == 0.0 {
        f64::INFINITY
    } else {
        0.9 * 2.0 / (units.c * kmax)
    }
}

/// Leapfrog evolution of real `(D0, B0)`, recording every step.
pub fn evolve_leapfrog(
    d0: &FieldSnapshot,
    b0: &FieldSnapshot,
    dt: f64,
    steps: usize,
    units: &Units,
    fft: &impl Fft3,
) -> Result<Trajectory> {
    evolve_leapfrog_strided(d0, b0, dt, steps, 1, units, fft)
}

/// Leapfrog evolution recording every `stride`-th step (and the last one).
///
/// `D` lives on integer steps and `B` on half steps; each recorded state is
/// the RS combination of `D^n` and `(B^{n−½} + B^{n+½})/2`.
pub fn evolve_leapfrog_strided(
    d0: &FieldSnapshot,
    b0: &FieldSnapshot,
    dt: f64,
    steps: usize,
    stride: usize,
    units: &Units,
    fft: &impl Fft3,
) -> Result<Trajectory> {
    if !d0.same_grid(b0) {
        return Err(Error::Mismatch("D0 and B0 live on different grids".into()));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    if stride == 0 {
        return Err(Error::invalid("stride must be at least 1"));
    }
    let bound = stability_bound(d0.n, d0.box_length, units);
    if dt > bound {
        return Err(Error::Unstable { dt, bound });
    }
    let scale = d0.max_norm().max(b0.max_norm());
    if d0.max_imag() > 1e-9 * scale || b0.max_imag() > 1e-9 * scale {
        return Err(Error::invalid("leapfrog initial fields must be real"));
    }

    let axpy = |x: &FieldSnapshot, a: f64, y: &FieldSnapshot| {
        x.zip_map(y, x.kind, |u, v| cadd(u, cscale(v, C64::new(a, 0.0))))
    };
    let t0 = d0.time;
    let mut d = d0.clone();
    let mut b_half = axpy(b0, -dt / (2.0 * units.eps0), &curl(d0, fft));

    let mut times = vec![t0];
    let mut states = vec![synthesis::rs_from_db(d0, b0, units)?];
    for step in 1..=steps {
        d = axpy(&d, dt / units.mu0, &curl(&b_half, fft));
        let b_next = axpy(&b_half, -dt / units.eps0, &curl(&d, fft));
        if step % stride == 0 || step == steps {
            let t = t0 + step as f64 * dt;
            let mut dn = d.clone();
            dn.time = t;
            let mut bn = b_half.zip_map(&b_next, FieldKind::Magnetic, |u, v| {
                cscale(cadd(u, v), C64::new(0.5, 0.0))
            });
            bn.time = t;
            times.push(t);
            states.push(synthesis::rs_from_db(&dn, &bn, units)?);
        }
        b_half = b_next;
    }
    Trajectory::new(Scheme::Leapfrog, times, states)
}

/// Largest relative residual of `i∂tΨ = c∇×Ψ` over interior samples, with
/// `∂t` taken by central differences.
pub fn schrodinger_residual(traj: &Trajectory, units: &Units, fft: &impl Fft3) -> Result<f64> {
    let n = traj.len();
    if n < 3 {
        return Err(Error::invalid(format!("residual needs at least 3 states, got {n}")));
    }
    let t = traj.times();
    let dt = t[1] - t[0];
    if t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt) {
        return Err(Error::invalid("residual needs uniformly spaced states"));
    }
    let s = traj.states();
    let mut worst = 0.0f64;
    for j in 1..n - 1 {
        let rhs = curl(&s[j], fft);
        let (mut num, mut den) = (0.0, 0.0);
        for ((p, m), r) in s[j + 1].values.iter().zip(&s[j - 1].values).zip(&rhs.values) {
            let lhs = cscale(csub(*p, *m), C64::new(0.0, 1.0 / (2.0 * dt)));
            let r = cscale(*r, C64::new(units.c, 0.0));
            num += cnorm_sqr(csub(lhs, r));
            den += cnorm_sqr(r);
        }
        let rel = if den > 0.0 {
            (num / den).sqrt()
        } else if num > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        worst = worst.max(rel);
    }
    Ok(worst)
}
