//! Protocol and adversary invariants.

mod common;

use common::{max_abs_diff, random_density, spectrum};
use core::f64::consts::FRAC_1_SQRT_2;
use num_complex::Complex64;
use qpq_core::rng::trial_rng;
use qpq_core::{
    analytic_catch_oracle, bob_apply_database, honesty_test_probabilities, prepare_plain_query,
    prepare_superposed_query, qpq_register, run_transaction, BobAgent, BobStrategy, CatchEstimate, DatabaseConfig,
    HonestyVerdict, MeasurePick, ModeId, Ordering, Polarization, Policy, PureState, QueryIndex, Side,
};
use rand::Rng;

fn all_strategies() -> Vec<BobStrategy> {
    vec![
        BobStrategy::Honest,
        BobStrategy::MeasureAndReprepare(MeasurePick::First),
        BobStrategy::MeasureAndReprepare(MeasurePick::Second),
        BobStrategy::MeasureAndReprepare(MeasurePick::UniformRandomOne),
        BobStrategy::MeasureAndReprepare(MeasurePick::Both),
        BobStrategy::PartialDephase(0.0),
        BobStrategy::PartialDephase(0.35),
        BobStrategy::PartialDephase(1.0),
        BobStrategy::DelayTap { tau: 0.8, sigma_c: 1.0 },
    ]
}

/// `(|g⟩_j + |H⟩_{j_a})/√2`, written down directly.
fn expected_superposed(n: u32, j: u32, pol: Polarization) -> PureState {
    let reg = qpq_register(n).unwrap();
    let mut amps = vec![Complex64::new(0.0, 0.0); reg.dim()];
    amps[reg.slot(ModeId::bob(j), pol).unwrap()] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    amps[reg.slot(ModeId::alice(j), Polarization::H).unwrap()] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    PureState::from_amplitudes(&reg, amps).unwrap()
}

fn pol_of(bit: bool) -> Polarization {
    if bit {
        Polarization::V
    } else {
        Polarization::H
    }
}

#[test]
fn honest_bob_is_correct_and_never_flagged_exhaustively() {
    let reg = qpq_register(3).unwrap();
    let mut rng = trial_rng(21, 0);
    for db in DatabaseConfig::all(3) {
        for j in 1..=3 {
            let a = db.bit(j).unwrap();
            let s = bob_apply_database(&prepare_superposed_query(&reg, j).unwrap().to_density(), &db).unwrap();
            let p = honesty_test_probabilities(&s, j, a).unwrap();
            assert!(p.d1.abs() < 1e-12 && (p.d0 - 1.0).abs() < 1e-12);
            for policy in [Policy::PLAIN_FIRST, Policy::SUPERPOSED_FIRST] {
                for _ in 0..20 {
                    let mut bob = BobAgent::new(BobStrategy::Honest).unwrap();
                    let out = run_transaction(&db, j, &mut bob, policy, &mut rng).unwrap();
                    assert_eq!(out.retrieved_bit, Some(a));
                    assert_ne!(out.verdict, HonestyVerdict::D1Fired);
                }
            }
        }
    }
}

#[test]
fn interferometer_is_the_projector_onto_the_guessed_reply() {
    let reg = qpq_register(3).unwrap();
    let mut rng = trial_rng(22, 0);
    for _ in 0..200 {
        let rho = random_density(&reg, &mut rng);
        let j = rng.gen_range(1..=3);
        let guess: bool = rng.gen();
        let p = honesty_test_probabilities(&rho, j, guess).unwrap();
        let target = expected_superposed(3, j, pol_of(guess));
        let projector = rho.projector_probability(&target).unwrap();
        assert!((p.d0 - projector).abs() < 1e-10, "{} vs {projector}", p.d0);
        assert!(p.d0 + p.d1 <= 1.0 + 1e-10);
    }
}

#[test]
fn guess_symmetry_under_database_flip() {
    let reg = qpq_register(3).unwrap();
    for strategy in [BobStrategy::Honest, BobStrategy::PartialDephase(0.0), BobStrategy::PartialDephase(0.6)] {
        for db in DatabaseConfig::all(3) {
            for j in 1..=3 {
                let mut flipped_bits = db.bits().to_vec();
                flipped_bits[(j - 1) as usize] ^= true;
                let flipped = DatabaseConfig::new(flipped_bits).unwrap();
                let probs = |d: &DatabaseConfig| {
                    let mut rng = trial_rng(0, 0);
                    let query = prepare_superposed_query(&reg, j).unwrap().to_density();
                    let (reply, _) =
                        BobAgent::new(strategy).unwrap().respond(QueryIndex::First, &query, d, &mut rng).unwrap();
                    honesty_test_probabilities(&reply, j, d.bit(j).unwrap()).unwrap()
                };
                let (p, q) = (probs(&db), probs(&flipped));
                assert!((p.d0 - q.d0).abs() < 1e-12 && (p.d1 - q.d1).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn random_guess_is_meaningful_half_the_time() {
    let db: DatabaseConfig = "0,1,1".parse().unwrap();
    let trials = 100_000u64;
    let mut discarded = 0;
    for i in 0..trials {
        let mut rng = trial_rng(23, i);
        let mut bob = BobAgent::new(BobStrategy::Honest).unwrap();
        let out = run_transaction(&db, 2, &mut bob, Policy::SUPERPOSED_FIRST, &mut rng).unwrap();
        assert_eq!(out.ordering, Ordering::SuperposedFirst);
        if out.verdict == HonestyVerdict::NotMeaningful {
            assert_ne!(out.guess_used, Some(true));
            discarded += 1;
        }
    }
    let e = CatchEstimate::from_counts(discarded, trials).unwrap();
    assert!(e.within_sigmas(0.5, 3.0), "{e:?}");
}

#[test]
fn bob_cannot_touch_alices_ancillas() {
    let reg = qpq_register(3).unwrap();
    let alice: Vec<ModeId> = reg.side(Side::AliceSide).collect();
    let bob: Vec<ModeId> = reg.side(Side::BobSide).collect();
    let db: DatabaseConfig = "1,0,1".parse().unwrap();
    let mut rng = trial_rng(24, 0);
    for strategy in all_strategies() {
        for _ in 0..100 {
            let rho = random_density(&reg, &mut rng);
            let before = rho.block(&alice).unwrap();
            let mut agent = BobAgent::new(strategy).unwrap();
            let (out, info) = agent.respond(QueryIndex::First, &rho, &db, &mut rng).unwrap();
            let after = out.block(&alice).unwrap();
            let absent = rho.occupation_probabilities(&bob).unwrap()[bob.len()];
            let expected: Vec<Complex64> = match info {
                Some(i) if i.collapsed => before.iter().map(|x| x / absent).collect(),
                Some(i) if i.learned_mode.is_some() => vec![Complex64::new(0.0, 0.0); before.len()],
                _ => before.clone(),
            };
            for (x, y) in after.iter().zip(&expected) {
                assert!((x - y).norm() < 1e-10, "{strategy}");
            }
        }
    }
}

#[test]
fn strategies_are_trace_preserving_and_positive() {
    let reg = qpq_register(3).unwrap();
    let db: DatabaseConfig = "0,1,1".parse().unwrap();
    let mut rng = trial_rng(25, 0);
    for strategy in all_strategies() {
        for _ in 0..100 {
            let rho = random_density(&reg, &mut rng);
            let query = if rng.gen() { QueryIndex::First } else { QueryIndex::Second };
            let (out, _) = BobAgent::new(strategy).unwrap().respond(query, &rho, &db, &mut rng).unwrap();
            assert!((out.trace().re - 1.0).abs() < 1e-10, "{strategy}");
            assert!(out.is_hermitian(1e-10));
            assert!(spectrum(&out)[0] >= -1e-10, "{strategy}");
        }
    }
}

#[test]
fn delay_tap_equals_partial_dephase_elementwise() {
    let reg = qpq_register(3).unwrap();
    let db: DatabaseConfig = "1,1,0".parse().unwrap();
    let mut rng = trial_rng(26, 0);
    for _ in 0..100 {
        let rho = random_density(&reg, &mut rng);
        let tau = rng.gen_range(0.0..5.0);
        let sigma_c = rng.gen_range(0.1..3.0);
        let gamma = qpq_core::delay_to_gamma(tau, sigma_c).unwrap();
        let (a, _) = BobAgent::new(BobStrategy::DelayTap { tau, sigma_c })
            .unwrap()
            .respond(QueryIndex::First, &rho, &db, &mut rng)
            .unwrap();
        let (b, _) = BobAgent::new(BobStrategy::PartialDephase(gamma))
            .unwrap()
            .respond(QueryIndex::First, &rho, &db, &mut rng)
            .unwrap();
        assert!(max_abs_diff(&a, &b) <= 1e-12);
    }
}

#[test]
fn passing_with_certainty_iff_no_information() {
    let reg = qpq_register(3).unwrap();
    let mut rng = trial_rng(27, 0);
    for strategy in [BobStrategy::Honest, BobStrategy::PartialDephase(1.0)] {
        for db in DatabaseConfig::all(3) {
            for j in 1..=3 {
                for (q, kind) in [(QueryIndex::First, 0), (QueryIndex::Second, 1)] {
                    let query = if kind == 0 {
                        prepare_superposed_query(&reg, j).unwrap().to_density()
                    } else {
                        prepare_plain_query(&reg, j).unwrap().to_density()
                    };
                    let (reply, _) = BobAgent::new(strategy).unwrap().respond(q, &query, &db, &mut rng).unwrap();
                    if kind == 0 {
                        let p = honesty_test_probabilities(&reply, j, db.bit(j).unwrap()).unwrap();
                        assert!(p.d1.abs() < 1e-12);
                    }
                }
            }
        }
        assert_eq!(analytic_catch_oracle(strategy, Policy::RANDOM).unwrap().to_f64(), 0.0);
    }
    for strategy in all_strategies() {
        let informative = match strategy {
            BobStrategy::Honest => false,
            BobStrategy::PartialDephase(g) => g < 1.0,
            _ => true,
        };
        let p = analytic_catch_oracle(strategy, Policy::RANDOM).unwrap().to_f64();
        assert_eq!(p > 0.0, informative, "{strategy}: {p}");
    }
}

#[test]
fn runner_records_one_query_per_invocation() {
    // Both queries of a transaction pass through separate `respond` calls,
    // so a mr:both Bob logs exactly two entries in arrival order.
    let db: DatabaseConfig = "0,0,1".parse().unwrap();
    let mut rng = trial_rng(28, 0);
    for _ in 0..200 {
        let mut bob = BobAgent::new(BobStrategy::MeasureAndReprepare(MeasurePick::Both)).unwrap();
        let out = run_transaction(&db, 3, &mut bob, Policy::RANDOM, &mut rng).unwrap();
        let entries = out.bob_info.entries();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].query, QueryIndex::First);
        assert_eq!(entries[1].query, QueryIndex::Second);
        let plain_entry = match out.ordering {
            Ordering::PlainFirst => entries[0],
            Ordering::SuperposedFirst => entries[1],
        };
        assert_eq!(plain_entry.learned_mode, Some(3));
    }
}
