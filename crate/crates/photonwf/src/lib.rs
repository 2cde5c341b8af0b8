//! Std companion to `photonwf-core`: a rustfft backend, scenario files and
//! the scenario runner behind the `photonwf` binary.
//!
//! ```
//! use photonwf::core::kspace::{build_grid, gaussian_wavepacket, Helicity};
//! use photonwf::core::observables::number_total;
//! use photonwf::core::synthesis::{synthesize_phi, Part};
//! use photonwf::core::{Units, C64};
//! use photonwf::RustFft3;
//!
//! let grid = build_grid(32, 32.0, 0.0)?;
//! let dk = grid.dk();
//! let packet = gaussian_wavepacket(&grid, [6.0 * dk, 0.0, 0.0], 1.5 * dk, Helicity::Plus, C64::new(1.0, 0.0))?;
//! let phi = synthesize_phi(&packet, 2.0, Part::Plus, &Units::natural(), &RustFft3::new());
//! assert!((phi.integral_norm_sqr() - number_total(&packet)).abs() < 1e-10);
//! # Ok::<(), photonwf::core::Error>(())
//! ```

pub mod fft;
pub mod run;
pub mod scenario;

pub use fft::RustFft3;
pub use photonwf_core as core;
pub use run::{run, RunSummary};
pub use scenario::{parse_scenario, Scenario, ScenarioError};
