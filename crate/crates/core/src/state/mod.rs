//! Single-photon states over a register of polarized optical modes.
//!
//! The Hilbert space is the one-photon sector `span{|p⟩_m}`: one basis label
//! per (mode, polarization) pair, ordered mode-major with H before V. A mode
//! holding the vacuum simply carries zero amplitude on both of its labels.

mod density;
mod pure;
mod register;

pub use density::{DensityOperator, Occupation};
pub use pure::PureState;
pub use register::{ModeId, ModeRegister, Polarization, Side};

use crate::error::Result;

/// Tolerance for algebraic identities.
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Tolerance after chains of operations.
pub const CHAIN_TOL: f64 = 1e-10;
/// Tolerance for diagnostic preconditions (e.g. photon occupancy).
pub const PRECONDITION_TOL: f64 = 1e-9;

/// Passive linear-optical elements, available on pure and mixed states alike.
///
/// Both operations return a new state and leave `self` untouched.
pub trait OpticalState: Sized {
    fn register(&self) -> &ModeRegister;

    /// Swaps the H and V amplitudes of `mode`.
    fn apply_half_wave_plate(&self, mode: ModeId) -> Result<Self>;

    /// 50% beam splitter between `a` and `b`, polarization independent:
    /// `(α_a, α_b) → ((α_a + α_b)/√2, (α_a − α_b)/√2)`.
    fn apply_beam_splitter(&self, a: ModeId, b: ModeId) -> Result<Self>;
}
