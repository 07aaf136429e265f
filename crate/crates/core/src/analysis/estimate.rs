use core::fmt;
use core::ops::Range;

use num_rational::Ratio;
use num_traits::ToPrimitive;

use super::oracle::analytic_catch_oracle;
use crate::adversary::{BobAgent, BobStrategy};
use crate::error::{QpqError, Result};
use crate::protocol::{run_transaction, DatabaseConfig, Policy};
use crate::rng::trial_rng;

/// A reference probability: exact when every branch weight is rational,
/// otherwise a float flagged as approximate (accurate to ~1e-12).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleValue {
    Exact(Ratio<i64>),
    Approximate(f64),
}

impl OracleValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            OracleValue::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            OracleValue::Approximate(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<Ratio<i64>> {
        match self {
            OracleValue::Exact(r) => Some(*r),
            OracleValue::Approximate(_) => None,
        }
    }
}

impl fmt::Display for OracleValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleValue::Exact(r) => write!(f, "{r}"),
            OracleValue::Approximate(x) => write!(f, "~{x}"),
        }
    }
}

/// A binomial frequency with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatchEstimate {
    pub p_hat: f64,
    /// `sqrt(p_hat (1 − p_hat) / trials)`
    pub stderr: f64,
    pub trials: u64,
    pub hits: u64,
    pub exact: Option<OracleValue>,
}

impl CatchEstimate {
    pub fn from_counts(hits: u64, trials: u64) -> Result<Self> {
        if trials == 0 {
            return Err(QpqError::InvalidParameter("need at least one trial".into()));
        }
        if hits > trials {
            return Err(QpqError::InvalidParameter("more hits than trials".into()));
        }
        let n = trials as f64;
        let p_hat = hits as f64 / n;
        let stderr = libm::sqrt(p_hat * (1.0 - p_hat) / n);
        Ok(Self { p_hat, stderr, trials, hits, exact: None })
    }

    pub fn with_exact(self, exact: OracleValue) -> Self {
        Self { exact: Some(exact), ..self }
    }

    /// `|p_hat − p| ≤ k · stderr`.
    pub fn within_sigmas(&self, p: f64, k: f64) -> bool {
        (self.p_hat - p).abs() <= k * self.stderr
    }

    /// Agreement with the attached reference value at `k` standard errors;
    /// `None` when no reference is attached.
    pub fn agrees_with_exact(&self, k: f64) -> Option<bool> {
        self.exact.map(|e| self.within_sigmas(e.to_f64(), k))
    }
}

/// One seeded transaction; `true` when Alice's detector D1 fires.
pub fn user_privacy_trial(
    db: &DatabaseConfig,
    j: u32,
    strategy: BobStrategy,
    policy: Policy,
    seed: u64,
    index: u64,
) -> Result<bool> {
    let mut rng = trial_rng(seed, index);
    let mut bob = BobAgent::new(strategy)?;
    Ok(run_transaction(db, j, &mut bob, policy, &mut rng)?.cheat_detected())
}

/// Number of caught transactions among trial indices `range`. Summing over a
/// partition of `0..trials` gives the same count as one sequential pass.
pub fn count_user_privacy_catches(
    db: &DatabaseConfig,
    j: u32,
    strategy: BobStrategy,
    policy: Policy,
    seed: u64,
    range: Range<u64>,
) -> Result<u64> {
    let mut hits = 0;
    for index in range {
        hits += u64::from(user_privacy_trial(db, j, strategy, policy, seed, index)?);
    }
    Ok(hits)
}

/// Frequency with which Alice catches `strategy` over `trials` independent
/// transactions, with the oracle value attached.
pub fn estimate_user_privacy_catch(
    db: &DatabaseConfig,
    j: u32,
    strategy: BobStrategy,
    policy: Policy,
    trials: u64,
    seed: u64,
) -> Result<CatchEstimate> {
    if trials == 0 {
        return Err(QpqError::InvalidParameter("need at least one trial".into()));
    }
    let hits = count_user_privacy_catches(db, j, strategy, policy, seed, 0..trials)?;
    Ok(CatchEstimate::from_counts(hits, trials)?.with_exact(analytic_catch_oracle(strategy, policy)?))
}
