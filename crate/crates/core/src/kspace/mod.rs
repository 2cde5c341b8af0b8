//! Discretized k-space: the periodic lattice, the helicity basis attached to
//! every lattice vector, and the helicity-mode amplitudes of a field.

mod basis;
mod grid;
mod modes;

pub use basis::{helicity_basis, Helicity, HelicityBasis, Triad};
pub use grid::{build_grid, KGrid};
pub use modes::{gaussian_wavepacket, symmetrize, ModeSet};
