//! Simulation toolkit for a frustrated spin-1/2 ring with Dzyaloshinskii-Moriya
//! (DM) exchange: magnon spectra, exact sector Hamiltonians, time-dependent
//! entropic-uncertainty ("quantum memory") curves, out-of-time-ordered
//! correlators (OTOC), two-magnon Bethe states, four-qubit entanglement
//! diagnostics, and a small dense neural network trained to predict the
//! computed curves from chain parameters.
//!
//! The chain Hamiltonian is
//!
//!   H = J1 Σ_i S_i·S_{i+1} + J2 Σ_i S_i·S_{i+2} + D Σ_i (S_i × S_{i+1})_z
//!
//! with spin-1/2 operators S = σ/2 and periodic boundaries. Total S^z is
//! conserved, so everything here works in the one- and two-flip sectors.
//!
//! Conventions used throughout (see module docs for details):
//! - computational basis |0⟩ = spin up, |1⟩ = flipped spin, σ^z = diag(1, -1);
//! - sites are 1-based, matching the Hamiltonian sums;
//! - all entropies are base-2 (bits);
//! - `Branch::Plus` selects the dispersion J1 cos k + J2 cos 2k + D sin k for
//!   the plane-wave modes (1/√L) Σ_j e^{-i 2π n j / L} |j⟩, `Branch::Minus`
//!   the sign-flipped DM term (left/right propagating magnons).

pub mod bethe;
pub mod chain;
pub mod dynamics;
pub mod entangle;
pub mod error;
pub mod memory;
pub mod nn;
pub mod otoc;
pub mod pipeline;

pub use chain::{Branch, ChainParams, MagnonMode, SectorHamiltonian, TransformedParams};
pub use dynamics::{DensityMatrix, TimeGrid, TwoExcitationL4Solution};
pub use error::{Error, Result};

/// Convenience alias used across all modules.
pub type C64 = num_complex::Complex<f64>;
