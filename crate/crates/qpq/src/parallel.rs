//! Trial loops spread over a rayon pool.
//!
//! Every trial seeds its own generator from `(seed, index)`, so the counts
//! are identical for any thread count.

use std::ops::Range;

use qpq_core::analysis::{count_partition_catches, count_user_privacy_catches, partition_catch_exact};
use qpq_core::{
    analytic_catch_oracle, simulate_data_privacy_game, BobStrategy, CatchEstimate, DatabaseConfig, PartitionGameConfig,
    Policy,
};
use rayon::prelude::*;

use crate::CliError;

const CHUNK: u64 = 4096;

fn chunks(trials: u64) -> Vec<Range<u64>> {
    (0..trials.div_ceil(CHUNK)).map(|c| c * CHUNK..((c + 1) * CHUNK).min(trials)).collect()
}

fn pool(threads: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {threads} worker threads: {e}")))
}

pub fn user_privacy_estimate(
    db: &DatabaseConfig,
    j: u32,
    strategy: BobStrategy,
    policy: Policy,
    trials: u64,
    seed: u64,
    threads: usize,
) -> Result<CatchEstimate, CliError> {
    if threads <= 1 {
        return Ok(qpq_core::estimate_user_privacy_catch(db, j, strategy, policy, trials, seed)?);
    }
    let hits = pool(threads)?.install(|| {
        chunks(trials)
            .into_par_iter()
            .map(|r| count_user_privacy_catches(db, j, strategy, policy, seed, r))
            .try_reduce(|| 0, |a, b| Ok(a + b))
    })?;
    Ok(CatchEstimate::from_counts(hits, trials)?.with_exact(analytic_catch_oracle(strategy, policy)?))
}

pub fn data_privacy_estimate(config: &PartitionGameConfig, threads: usize) -> Result<CatchEstimate, CliError> {
    if threads <= 1 {
        return Ok(simulate_data_privacy_game(config)?);
    }
    config.validate()?;
    let hits = pool(threads)?.install(|| {
        chunks(config.trials)
            .into_par_iter()
            .map(|r| count_partition_catches(config, r))
            .try_reduce(|| 0, |a, b| Ok(a + b))
    })?;
    Ok(CatchEstimate::from_counts(hits, config.trials)?.with_exact(partition_catch_exact(config)?))
}
