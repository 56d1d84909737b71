//! Dressed-state spectroscopy of a doubly driven V system probed from a
//! fourth level (N configuration).
//!
//! * [`dressed`]: V-system Hamiltonian, closed-form dressed energies, vectors
//!   and probe weights, plus a Jacobi eigen-oracle.
//! * [`spectrum`]: weak-probe spectrum synthesis, peak finding and peak
//!   trajectories.
//! * [`zeeman`]: Clebsch–Gordan couplings among hyperfine Zeeman sublevels and
//!   their reduction to independent N subsystems.
//! * [`fitting`]: least-squares fits of the splitting and central-peak height
//!   against coupling power, with confidence bands.
//! * [`obe`]: steady-state optical Bloch equations for the four-level N system.
//!
//! Frequencies are in MHz throughout, powers in mW.

pub mod dressed;
pub mod fitting;
pub mod obe;
pub mod spectrum;
pub mod zeeman;

pub use dressed::{DressedError, DressedSolution, DriveConfig};
