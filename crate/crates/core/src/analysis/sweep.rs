use alloc::vec::Vec;

use crate::adversary::{delay_to_gamma, dephasing_tap};
use crate::error::{QpqError, Result};
use crate::protocol::{honesty_test_probabilities, prepare_superposed_query, qpq_register, DatabaseConfig};

/// Honesty-test statistics for one delay value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub tau: f64,
    pub gamma: f64,
    pub p_d0: f64,
    pub p_d1: f64,
}

/// Detector probabilities of a correctly compensated honesty test on the
/// superposed reply to entry `j` when Bob delays his arm by each `tau`.
pub fn delay_sweep(taus: &[f64], sigma_c: f64, db: &DatabaseConfig, j: u32) -> Result<Vec<SweepRow>> {
    if taus.windows(2).any(|w| w[0].is_nan() || w[1].is_nan() || w[0] > w[1]) {
        return Err(QpqError::InvalidParameter("delays must be sorted ascending".into()));
    }
    let register = qpq_register(db.len())?;
    let query = prepare_superposed_query(&register, j)?.to_density();
    let guess = db.bit(j)?;
    taus.iter()
        .map(|&tau| {
            let gamma = delay_to_gamma(tau, sigma_c)?;
            let reply = dephasing_tap(&query, db, gamma)?;
            let p = honesty_test_probabilities(&reply, j, guess)?;
            Ok(SweepRow { tau, gamma, p_d0: p.d0, p_d1: p.d1 })
        })
        .collect()
}
