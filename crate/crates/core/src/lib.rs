//! Spectral toolkit for the energy-density (Riemann–Silberstein) and
//! photon-density wavefunctions of the free electromagnetic field.
//!
//! The crate is `no_std` (it needs `alloc`). Everything that touches a
//! real-space grid goes through the [`Fft3`] trait; [`DirectDft`] is a
//! brute-force implementation used as a correctness oracle, while the `photonwf`
//! crate supplies a fast backend.
//!
//! Module map:
//!
//! - [`kspace`]: lattice, helicity basis, mode amplitudes.
//! - [`synthesis`]: real-space snapshots of Ψ, Φ, the potential, D and B.
//! - [`transforms`]: the eight energy↔photon transforms, spectral and sampled.
//! - [`dynamics`]: spectral Schrödinger propagation and leapfrog Maxwell stepping.
//! - [`observables`]: energy, photon number, local rates and localization.
#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dynamics;
mod error;
pub mod fft;
pub mod kspace;
pub mod observables;
pub mod synthesis;
pub mod transforms;
mod units;
pub mod vec3;

pub use error::{Error, Result};
pub use fft::{DirectDft, Fft3};
pub use num_complex::Complex64 as C64;
pub use units::Units;
