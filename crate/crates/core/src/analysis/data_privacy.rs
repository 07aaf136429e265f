//! Bob's partition test against a multi-photon Alice.
//!
//! After Alice's first photon arrives, Bob splits the database into `X`
//! equal parts, Alice names the part holding her target, and Bob
//! photodetects every other part. Any photon found there is proof of a
//! cheat.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;
use core::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedMul, CheckedSub, One, ToPrimitive};
use rand::seq::SliceRandom;
use rand::Rng;

use super::estimate::{CatchEstimate, OracleValue};
use crate::adversary::{place_cheat_photons, AliceCheat, Placement};
use crate::error::{QpqError, Result};
use crate::rng::trial_rng;

/// How photons are assigned to partition parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PartitionModel {
    /// Each photon's part is uniform and independent (the `N ≫ t` limit).
    #[default]
    IidUniform,
    /// Bob draws an actual random partition of the `N` modes into equal
    /// parts; photons in distinct modes are then drawn without replacement.
    ExactFiniteN,
}

impl fmt::Display for PartitionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartitionModel::IidUniform => "iid",
            PartitionModel::ExactFiniteN => "finite",
        })
    }
}

impl FromStr for PartitionModel {
    type Err = QpqError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "iid" => Ok(PartitionModel::IidUniform),
            "finite" => Ok(PartitionModel::ExactFiniteN),
            other => Err(QpqError::Parse(format!("partition model {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionGameConfig {
    /// Database size.
    pub n: u32,
    /// Number of parts; must divide `n`.
    pub x: u32,
    /// Photons per signal.
    pub t: u32,
    pub trials: u64,
    pub seed: u64,
    pub placement: Placement,
    pub model: PartitionModel,
    /// Alice's intended entry.
    pub target: u32,
}

impl PartitionGameConfig {
    /// Game with uniform placement (target-only when `t = 1`), the i.i.d.
    /// part model, and target entry 1.
    pub fn new(n: u32, x: u32, t: u32, trials: u64, seed: u64) -> Self {
        let placement = if t == 1 { Placement::TargetOnly } else { Placement::UniformRandomModes };
        Self { n, x, t, trials, seed, placement, model: PartitionModel::IidUniform, target: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.x < 2 {
            return Err(QpqError::InvalidParameter(format!("need at least 2 parts, got {}", self.x)));
        }
        if !self.n.is_multiple_of(self.x) {
            return Err(QpqError::InvalidParameter(format!("{} parts do not divide {} entries", self.x, self.n)));
        }
        if self.trials == 0 {
            return Err(QpqError::InvalidParameter("need at least one trial".into()));
        }
        self.cheat()?;
        if self.t > self.n {
            return Err(QpqError::InvalidParameter(format!("{} photons do not fit in {} modes", self.t, self.n)));
        }
        if !(1..=self.n).contains(&self.target) {
            return Err(QpqError::IndexOutOfRange { index: self.target, n: self.n });
        }
        Ok(())
    }

    fn cheat(&self) -> Result<AliceCheat> {
        AliceCheat::new(self.t, self.placement)
    }
}

/// Probability that Bob catches an Alice sending `t` photons when the
/// database is split into `x` parts: `1 − (1/x)^(t−1)`.
pub fn data_privacy_formula(x: u32, t: u32) -> Result<f64> {
    Ok(formula_exact(x, t)?.to_f64().unwrap_or(f64::NAN))
}

fn formula_exact(x: u32, t: u32) -> Result<Ratio<i64>> {
    if x < 2 {
        return Err(QpqError::InvalidParameter(format!("need at least 2 parts, got {x}")));
    }
    if t == 0 {
        return Err(QpqError::InvalidParameter("photon count must be at least 1".into()));
    }
    let base = Ratio::new(1, i64::from(x));
    let mut stay = Ratio::one();
    for _ in 1..t {
        match stay.checked_mul(&base) {
            Some(s) => stay = s,
            None => return Err(QpqError::InvalidParameter(format!("x^(t-1) overflows for x = {x}, t = {t}"))),
        }
    }
    Ok(Ratio::one() - stay)
}

/// Exact catch probability under [`PartitionModel::ExactFiniteN`] for `t`
/// photons in distinct modes: `1 − Π_{i=1}^{t−1} (n/x − i)/(n − i)`.
pub fn finite_partition_catch(n: u32, x: u32, t: u32) -> Result<OracleValue> {
    if x < 2 || !n.is_multiple_of(x) || t == 0 || t > n {
        return Err(QpqError::InvalidParameter(format!("invalid partition n = {n}, x = {x}, t = {t}")));
    }
    let part = i64::from(n / x);
    let n = i64::from(n);
    let mut stay = Ratio::<i64>::one();
    let mut approx = 1.0f64;
    let mut exact = true;
    for i in 1..i64::from(t) {
        let factor = Ratio::new((part - i).max(0), n - i);
        approx *= factor.to_f64().unwrap_or(f64::NAN);
        match stay.checked_mul(&factor) {
            Some(s) if exact => stay = s,
            _ => exact = false,
        }
    }
    Ok(match (exact, Ratio::one().checked_sub(&stay)) {
        (true, Some(p)) => OracleValue::Exact(p),
        _ => OracleValue::Approximate(1.0 - approx),
    })
}

/// One seeded round of the partition game; `true` when Bob finds a photon
/// outside the part Alice named.
pub fn partition_trial(config: &PartitionGameConfig, index: u64) -> Result<bool> {
    let cheat = config.cheat()?;
    let mut rng = trial_rng(config.seed, index);
    let photons = place_cheat_photons(cheat, config.target, config.n, &mut rng)?;
    if photons.len() <= 1 {
        return Ok(false);
    }
    Ok(match config.model {
        PartitionModel::IidUniform => {
            let named = rng.gen_range(0..config.x);
            let mut caught = false;
            // Draw every photon's part even after a hit so the stream layout is fixed.
            for _ in &photons[1..] {
                caught |= rng.gen_range(0..config.x) != named;
            }
            caught
        }
        PartitionModel::ExactFiniteN => {
            let mut order: Vec<u32> = (1..=config.n).collect();
            order.shuffle(&mut rng);
            let part_size = (config.n / config.x) as usize;
            let part_of = |mode: u32| order.iter().position(|m| *m == mode).map(|p| p / part_size);
            let named = part_of(photons[0]);
            photons[1..].iter().any(|m| part_of(*m) != named)
        }
    })
}

/// Number of caught rounds among trial indices `range`.
pub fn count_partition_catches(config: &PartitionGameConfig, range: Range<u64>) -> Result<u64> {
    let mut hits = 0;
    for index in range {
        hits += u64::from(partition_trial(config, index)?);
    }
    Ok(hits)
}

/// Exact catch probability under the configured part model.
pub fn partition_catch_exact(config: &PartitionGameConfig) -> Result<OracleValue> {
    match config.model {
        PartitionModel::IidUniform => Ok(OracleValue::Exact(formula_exact(config.x, config.t)?)),
        PartitionModel::ExactFiniteN => finite_partition_catch(config.n, config.x, config.t),
    }
}

/// Monte Carlo estimate of Bob's catch probability, with the exact value
/// for the chosen part model attached.
pub fn simulate_data_privacy_game(config: &PartitionGameConfig) -> Result<CatchEstimate> {
    config.validate()?;
    let hits = count_partition_catches(config, 0..config.trials)?;
    Ok(CatchEstimate::from_counts(hits, config.trials)?.with_exact(partition_catch_exact(config)?))
}

/// Verdict of Bob's idealized joint photon-number measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NumberCheck {
    Accept,
    Reject,
}

/// Accepts zero or one photon across all modes, rejects anything more.
pub fn ideal_photon_number_check(occupied_modes: &[u32]) -> NumberCheck {
    if occupied_modes.len() <= 1 {
        NumberCheck::Accept
    } else {
        NumberCheck::Reject
    }
}
