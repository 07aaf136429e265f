//! Exact single-photon simulation of the linear-optics quantum private query
//! (QPQ) protocol.
//!
//! The crate is `no_std` (it needs `alloc`) and is organised bottom-up:
//!
//! * [`state`] models one photon spread over a register of polarized modes,
//!   as a pure state or a density operator, with the optical elements the
//!   protocol needs (half-wave plate, 50% beam splitter), a dephasing channel
//!   and projective measurements.
//! * [`protocol`] holds query preparation, the database transformation, the
//!   plain readout, the interferometric honesty test and the two-query
//!   transaction runner.
//! * [`adversary`] holds Bob's cheating strategies and Alice's multi-photon
//!   cheat descriptors.
//! * [`analysis`] holds Monte Carlo estimators, the exact branch-enumeration
//!   oracle, the data-privacy partition game and the delay sweep.
//!
//! All randomness is passed in explicitly; every value is immutable once built.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod adversary;
pub mod analysis;
mod error;
pub mod protocol;
pub mod rng;
pub mod state;

pub use adversary::{
    apply_bob_strategy, delay_to_gamma, dephasing_tap, place_cheat_photons, AliceCheat, BobAgent, BobStrategy,
    InfoRecord, MeasurePick, Placement, QueryIndex, QueryInfo,
};
pub use analysis::{
    analytic_catch_oracle, data_privacy_formula, delay_sweep, estimate_user_privacy_catch, ideal_photon_number_check,
    simulate_data_privacy_game, CatchEstimate, NumberCheck, OracleValue, PartitionGameConfig, PartitionModel, SweepRow,
};
pub use error::{QpqError, Result};
pub use protocol::{
    alice_read_plain, bob_apply_database, decode_channel, encode_channel, honesty_test, honesty_test_probabilities,
    prepare_plain_query, prepare_superposed_query, qpq_register, run_transaction, ChannelEncoding, ChannelLabel,
    DatabaseConfig, DetectorProbabilities, HonestyVerdict, Ordering, Policy, QueryKind, TransactionOutcome,
};
pub use state::{DensityOperator, ModeId, ModeRegister, Occupation, OpticalState, Polarization, PureState, Side};
