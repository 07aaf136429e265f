use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;

use super::{ModeId, ModeRegister, OpticalState, Polarization, PureState, CHAIN_TOL, PRECONDITION_TOL};
use crate::error::{QpqError, Result};
use crate::rng::sample_branch;

/// Outcome of a which-mode measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Occupation {
    Found(ModeId),
    /// The photon is outside the measured set of modes.
    Absent,
}

/// Dense density matrix over the one-photon basis of a register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    register: ModeRegister,
    dim: usize,
    // row-major, dim × dim
    data: Vec<Complex64>,
}

impl DensityOperator {
    pub fn from_pure(state: &PureState) -> Self {
        let amps = state.amplitudes();
        let dim = amps.len();
        let mut data = Vec::with_capacity(dim * dim);
        for a in amps {
            for b in amps {
                data.push(a * b.conj());
            }
        }
        Self { register: state.register().clone(), dim, data }
    }

    /// Wraps a row-major matrix, checking shape, Hermiticity and unit trace
    /// (within `1e-10`). Positivity is the caller's responsibility.
    pub fn from_matrix(register: &ModeRegister, data: Vec<Complex64>) -> Result<Self> {
        let dim = register.dim();
        if data.len() != dim * dim {
            return Err(QpqError::InvalidParameter(format!(
                "expected a {dim}x{dim} matrix, got {} entries",
                data.len()
            )));
        }
        let rho = Self { register: register.clone(), dim, data };
        if !rho.is_hermitian(CHAIN_TOL) {
            return Err(QpqError::InvalidParameter("matrix is not Hermitian".into()));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > CHAIN_TOL || tr.im.abs() > CHAIN_TOL {
            return Err(QpqError::InvalidParameter(format!("trace is {tr}, expected 1")));
        }
        Ok(rho)
    }

    /// Convex combination `Σ w_k ρ_k`; weights must be non-negative and sum to 1.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<Self> {
        let (_, first) = parts.first().ok_or_else(|| QpqError::InvalidParameter("empty mixture".into()))?;
        let mut data = vec![Complex64::new(0.0, 0.0); first.data.len()];
        let mut total = 0.0;
        for (w, rho) in parts {
            first.register.ensure_same(&rho.register)?;
            if w.is_nan() || *w < 0.0 {
                return Err(QpqError::InvalidParameter(format!("negative mixture weight {w}")));
            }
            total += w;
            for (d, x) in data.iter_mut().zip(&rho.data) {
                *d += x * w;
            }
        }
        if (total - 1.0).abs() > CHAIN_TOL {
            return Err(QpqError::InvalidParameter(format!("mixture weights sum to {total}")));
        }
        Ok(Self { register: first.register.clone(), dim: first.dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major matrix entries.
    pub fn matrix(&self) -> &[Complex64] {
        &self.data
    }

    pub fn element(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.element(i, i)).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| (i..self.dim).all(|k| (self.element(i, k) - self.element(k, i).conj()).norm() <= tol))
    }

    /// Population of the basis label `(mode, pol)`.
    pub fn population(&self, mode: ModeId, pol: Polarization) -> Result<f64> {
        let s = self.register.slot(mode, pol)?;
        Ok(self.element(s, s).re)
    }

    /// Probability that the photon is found in `mode` (either polarization).
    pub fn mode_population(&self, mode: ModeId) -> Result<f64> {
        Ok(self.population(mode, Polarization::H)? + self.population(mode, Polarization::V)?)
    }

    /// Multiplies every coherence between a label of `group_a` and a label of
    /// `group_b` by `gamma`. Populations and all other coherences are kept.
    pub fn dephase_between(&self, group_a: &[ModeId], group_b: &[ModeId], gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(QpqError::GammaOutOfRange(gamma));
        }
        if group_a.iter().any(|m| group_b.contains(m)) {
            return Err(QpqError::OverlappingGroups);
        }
        let to_slots = |group: &[ModeId]| -> Result<Vec<usize>> {
            group.iter().map(|m| self.register.slot(*m, Polarization::H)).collect()
        };
        let slots_a = to_slots(group_a)?;
        let slots_b = to_slots(group_b)?;
        let mut out = self.clone();
        for &a in &slots_a {
            for &b in &slots_b {
                for pa in 0..2 {
                    for pb in 0..2 {
                        let (i, k) = (a + pa, b + pb);
                        out.data[i * self.dim + k] *= gamma;
                        out.data[k * self.dim + i] *= gamma;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Born probabilities of a which-mode measurement over `modes`: one entry
    /// per mode, in order, followed by the probability of [`Occupation::Absent`].
    pub fn occupation_probabilities(&self, modes: &[ModeId]) -> Result<Vec<f64>> {
        let mut probs = Vec::with_capacity(modes.len() + 1);
        for m in modes {
            probs.push(self.mode_population(*m)?.max(0.0));
        }
        let found: f64 = probs.iter().sum();
        probs.push((self.trace().re - found).max(0.0));
        Ok(probs)
    }

    /// Projective which-mode measurement over `modes`.
    ///
    /// The post-measurement state is the renormalized projection. An empty
    /// mode set returns [`Occupation::Absent`] without consuming randomness.
    pub fn measure_mode_occupation<R: Rng + ?Sized>(
        &self,
        modes: &[ModeId],
        rng: &mut R,
    ) -> Result<(Occupation, Self)> {
        if modes.is_empty() {
            return Ok((Occupation::Absent, self.clone()));
        }
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].contains(m) {
                return Err(QpqError::DuplicateMode(*m));
            }
        }
        let probs = self.occupation_probabilities(modes)?;
        let branch =
            sample_branch(&probs, rng).ok_or_else(|| QpqError::Precondition("state carries no probability".into()))?;
        let mut keep = vec![false; self.dim];
        if branch < modes.len() {
            let s = self.register.slot(modes[branch], Polarization::H)?;
            keep[s] = true;
            keep[s + 1] = true;
        } else {
            keep.iter_mut().for_each(|k| *k = true);
            for m in modes {
                let s = self.register.slot(*m, Polarization::H)?;
                keep[s] = false;
                keep[s + 1] = false;
            }
        }
        let outcome = match modes.get(branch) {
            Some(m) => Occupation::Found(*m),
            None => Occupation::Absent,
        };
        Ok((outcome, self.project(&keep, probs[branch])))
    }

    /// H/V Born probabilities for a polarization analysis of `mode`.
    ///
    /// Fails with [`QpqError::Precondition`] unless the photon occupies
    /// `mode` with probability 1 (within `1e-9`).
    pub fn polarization_probabilities(&self, mode: ModeId) -> Result<[f64; 2]> {
        let occ = self.mode_population(mode)?;
        if (occ - 1.0).abs() > PRECONDITION_TOL {
            return Err(QpqError::Precondition(format!(
                "photon occupies mode {mode} with probability {occ}, expected 1"
            )));
        }
        Ok([self.population(mode, Polarization::H)?.max(0.0), self.population(mode, Polarization::V)?.max(0.0)])
    }

    pub fn measure_polarization<R: Rng + ?Sized>(&self, mode: ModeId, rng: &mut R) -> Result<(Polarization, Self)> {
        let probs = self.polarization_probabilities(mode)?;
        let branch =
            sample_branch(&probs, rng).ok_or_else(|| QpqError::Precondition("state carries no probability".into()))?;
        let pol = Polarization::BOTH[branch];
        let mut keep = vec![false; self.dim];
        keep[self.register.slot(mode, pol)?] = true;
        Ok((pol, self.project(&keep, probs[branch])))
    }

    /// `⟨target|ρ|target⟩`.
    pub fn projector_probability(&self, target: &PureState) -> Result<f64> {
        self.register.ensure_same(target.register())?;
        let t = target.amplitudes();
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, ti) in t.iter().enumerate() {
            if *ti == Complex64::new(0.0, 0.0) {
                continue;
            }
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            let r: Complex64 = row.iter().zip(t).map(|(x, tk)| x * tk).sum();
            acc += ti.conj() * r;
        }
        Ok(acc.re)
    }

    /// Principal block on the basis labels of `modes`, row-major.
    pub fn block(&self, modes: &[ModeId]) -> Result<Vec<Complex64>> {
        let mut slots = Vec::with_capacity(2 * modes.len());
        for m in modes {
            let s = self.register.slot(*m, Polarization::H)?;
            slots.extend([s, s + 1]);
        }
        Ok(slots.iter().flat_map(|&i| slots.iter().map(move |&k| (i, k))).map(|(i, k)| self.element(i, k)).collect())
    }

    fn project(&self, keep: &[bool], prob: f64) -> Self {
        let mut out = self.clone();
        let scale = 1.0 / prob;
        for i in 0..self.dim {
            for k in 0..self.dim {
                let e = &mut out.data[i * self.dim + k];
                if keep[i] && keep[k] {
                    *e *= scale;
                } else {
                    *e = Complex64::new(0.0, 0.0);
                }
            }
        }
        out
    }
}

impl OpticalState for DensityOperator {
    fn register(&self) -> &ModeRegister {
        &self.register
    }

    fn apply_half_wave_plate(&self, mode: ModeId) -> Result<Self> {
        let h = self.register.slot(mode, Polarization::H)?;
        let d = self.dim;
        let mut out = self.clone();
        for k in 0..d {
            out.data.swap(h * d + k, (h + 1) * d + k);
        }
        for i in 0..d {
            out.data.swap(i * d + h, i * d + h + 1);
        }
        Ok(out)
    }

    fn apply_beam_splitter(&self, a: ModeId, b: ModeId) -> Result<Self> {
        if a == b {
            return Err(QpqError::SameMode(a));
        }
        let ia = self.register.slot(a, Polarization::H)?;
        let ib = self.register.slot(b, Polarization::H)?;
        let d = self.dim;
        let mut out = self.clone();
        // U ρ U† with U real symmetric. Rows and columns are mixed unscaled and
        // the 1/√2 factors applied afterwards, so the doubly-mixed block gets
        // an exact 1/2.
        let mut mixed = vec![false; d];
        for p in 0..2 {
            let (ra, rb) = (ia + p, ib + p);
            mixed[ra] = true;
            mixed[rb] = true;
            for k in 0..d {
                let (x, y) = (out.data[ra * d + k], out.data[rb * d + k]);
                out.data[ra * d + k] = x + y;
                out.data[rb * d + k] = x - y;
            }
            for i in 0..d {
                let (x, y) = (out.data[i * d + ra], out.data[i * d + rb]);
                out.data[i * d + ra] = x + y;
                out.data[i * d + rb] = x - y;
            }
        }
        for i in 0..d {
            for k in 0..d {
                let scale = match (mixed[i], mixed[k]) {
                    (true, true) => 0.5,
                    (false, false) => continue,
                    _ => FRAC_1_SQRT_2,
                };
                out.data[i * d + k] *= scale;
            }
        }
        Ok(out)
    }
}
