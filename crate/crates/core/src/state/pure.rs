use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::{DensityOperator, ModeId, ModeRegister, OpticalState, Polarization, CHAIN_TOL};
use crate::error::{QpqError, Result};

/// A normalized one-photon state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    register: ModeRegister,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// The photon sits in `mode` with polarization `pol`.
    pub fn basis_state(register: &ModeRegister, mode: ModeId, pol: Polarization) -> Result<Self> {
        let slot = register.slot(mode, pol)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); register.dim()];
        amplitudes[slot] = Complex64::new(1.0, 0.0);
        Ok(Self { register: register.clone(), amplitudes })
    }

    /// Builds a state from amplitudes that must already be normalized
    /// (within `1e-10`).
    pub fn from_amplitudes(register: &ModeRegister, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != register.dim() {
            return Err(QpqError::InvalidParameter(format!(
                "expected {} amplitudes, got {}",
                register.dim(),
                amplitudes.len()
            )));
        }
        let state = Self { register: register.clone(), amplitudes };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > CHAIN_TOL {
            return Err(QpqError::InvalidParameter(format!("state has squared norm {norm}")));
        }
        Ok(state)
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(register: &ModeRegister, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(QpqError::InvalidParameter(format!("cannot normalize a vector of squared norm {norm}")));
        }
        let scale = 1.0 / libm::sqrt(norm);
        for a in &mut amplitudes {
            *a *= scale;
        }
        Self::from_amplitudes(register, amplitudes)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, mode: ModeId, pol: Polarization) -> Result<Complex64> {
        Ok(self.amplitudes[self.register.slot(mode, pol)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &PureState) -> Result<Complex64> {
        self.register.ensure_same(&other.register)?;
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|self⟩⟨self|`.
    pub fn to_density(&self) -> DensityOperator {
        DensityOperator::from_pure(self)
    }
}

impl OpticalState for PureState {
    fn register(&self) -> &ModeRegister {
        &self.register
    }

    fn apply_half_wave_plate(&self, mode: ModeId) -> Result<Self> {
        let h = self.register.slot(mode, Polarization::H)?;
        let mut out = self.clone();
        out.amplitudes.swap(h, h + 1);
        Ok(out)
    }

    fn apply_beam_splitter(&self, a: ModeId, b: ModeId) -> Result<Self> {
        if a == b {
            return Err(QpqError::SameMode(a));
        }
        let ia = self.register.slot(a, Polarization::H)?;
        let ib = self.register.slot(b, Polarization::H)?;
        let mut out = self.clone();
        for p in 0..2 {
            let (x, y) = (out.amplitudes[ia + p], out.amplitudes[ib + p]);
            out.amplitudes[ia + p] = (x + y) * FRAC_1_SQRT_2;
            out.amplitudes[ib + p] = (x - y) * FRAC_1_SQRT_2;
        }
        Ok(out)
    }
}
