//! Monte Carlo estimators, the exact catch-probability oracle, the
//! data-privacy partition game and the delay sweep.

mod data_privacy;
mod estimate;
mod oracle;
mod sweep;

pub use data_privacy::{
    count_partition_catches, data_privacy_formula, finite_partition_catch, ideal_photon_number_check,
    partition_catch_exact, partition_trial, simulate_data_privacy_game, NumberCheck, PartitionGameConfig,
    PartitionModel,
};
pub use estimate::{
    count_user_privacy_catches, estimate_user_privacy_catch, user_privacy_trial, CatchEstimate, OracleValue,
};
pub use oracle::analytic_catch_oracle;
pub use sweep::{delay_sweep, SweepRow};
