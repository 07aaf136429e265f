use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{QpqError, Result};

/// Which laboratory a mode lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    /// Ancilla modes that never leave Alice's lab.
    AliceSide,
    /// Database modes crossing Bob's lab.
    BobSide,
}

/// A labeled optical mode. Database modes are `(j, BobSide)` for `j` in
/// `1..=N`; the ancilla paired with `j` is `(j, AliceSide)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeId {
    pub label: u32,
    pub side: Side,
}

impl ModeId {
    pub const fn bob(label: u32) -> Self {
        Self { label, side: Side::BobSide }
    }

    pub const fn alice(label: u32) -> Self {
        Self { label, side: Side::AliceSide }
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::BobSide => write!(f, "{}", self.label),
            Side::AliceSide => write!(f, "{}_a", self.label),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::H, Polarization::V];

    /// The polarization after a half-wave plate.
    pub fn flipped(self) -> Self {
        match self {
            Polarization::H => Polarization::V,
            Polarization::V => Polarization::H,
        }
    }

    pub(crate) fn offset(self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }
}

/// Ordered set of modes fixing the basis layout of every state built on it.
///
/// Cloning is cheap; clones compare equal and share storage.
#[derive(Debug, Clone)]
pub struct ModeRegister {
    modes: Arc<[ModeId]>,
}

impl ModeRegister {
    pub fn new(modes: impl IntoIterator<Item = ModeId>) -> Result<Self> {
        let modes: Vec<ModeId> = modes.into_iter().collect();
        if modes.is_empty() {
            return Err(QpqError::EmptyRegister);
        }
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].contains(m) {
                return Err(QpqError::DuplicateMode(*m));
            }
        }
        Ok(Self { modes: modes.into() })
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Dimension of the one-photon basis, `2 × modes`.
    pub fn dim(&self) -> usize {
        2 * self.modes.len()
    }

    pub fn contains(&self, mode: ModeId) -> bool {
        self.modes.contains(&mode)
    }

    pub fn index_of(&self, mode: ModeId) -> Result<usize> {
        self.modes.iter().position(|m| *m == mode).ok_or(QpqError::UnknownMode(mode))
    }

    /// Basis index of the label `(mode, pol)`.
    pub fn slot(&self, mode: ModeId, pol: Polarization) -> Result<usize> {
        Ok(2 * self.index_of(mode)? + pol.offset())
    }

    /// Modes on one side, in register order.
    pub fn side(&self, side: Side) -> impl Iterator<Item = ModeId> + '_ {
        self.modes.iter().copied().filter(move |m| m.side == side)
    }

    pub(crate) fn ensure_same(&self, other: &ModeRegister) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(QpqError::RegisterMismatch)
        }
    }
}

impl PartialEq for ModeRegister {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.modes, &other.modes) || self.modes == other.modes
    }
}

impl Eq for ModeRegister {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_layout_is_mode_major() {
        let reg = ModeRegister::new([ModeId::bob(1), ModeId::bob(2), ModeId::alice(1)]).unwrap();
        assert_eq!(reg.dim(), 6);
        assert_eq!(reg.slot(ModeId::bob(2), Polarization::H).unwrap(), 2);
        assert_eq!(reg.slot(ModeId::bob(2), Polarization::V).unwrap(), 3);
        assert_eq!(reg.slot(ModeId::alice(1), Polarization::V).unwrap(), 5);
        assert_eq!(reg.slot(ModeId::alice(2), Polarization::H), Err(QpqError::UnknownMode(ModeId::alice(2))));
    }

    #[test]
    fn rejects_duplicates_and_empty() {
        assert_eq!(
            ModeRegister::new([ModeId::bob(1), ModeId::bob(1)]).unwrap_err(),
            QpqError::DuplicateMode(ModeId::bob(1))
        );
        assert_eq!(ModeRegister::new([]).unwrap_err(), QpqError::EmptyRegister);
        // Same label on different sides is fine: that is j and j_a.
        assert!(ModeRegister::new([ModeId::bob(1), ModeId::alice(1)]).is_ok());
    }
}
