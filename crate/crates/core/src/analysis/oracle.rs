//! Exact catch probabilities by enumerating the finite branch tree of a
//! transaction.
//!
//! This path shares no code with the state engine: it tracks a real 4×4
//! density matrix on the labels `{jH, jV, j_aH, j_aV}` in exact rational
//! arithmetic and evaluates the honesty test as the projector onto
//! `(|A^(R)⟩_j + |H⟩_{j_a})/√2`.

use alloc::vec;
use alloc::vec::Vec;

use num_rational::Ratio;
use num_traits::{Num, ToPrimitive};

use super::estimate::OracleValue;
use crate::adversary::{BobStrategy, MeasurePick};
use crate::error::Result;
use crate::protocol::{Ordering, Policy};

const JH: usize = 0;
const JV: usize = 1;
const AH: usize = 2;
const AV: usize = 3;

type Mat<T> = [[T; 4]; 4];

#[derive(Clone, Copy)]
enum Action<T> {
    Pass,
    Measure,
    Dephase(T),
}

fn half<T: Num + Copy>() -> T {
    T::one() / (T::one() + T::one())
}

fn zero_mat<T: Num + Copy>() -> Mat<T> {
    [[T::zero(); 4]; 4]
}

fn plain_query<T: Num + Copy>() -> Mat<T> {
    let mut m = zero_mat();
    m[JH][JH] = T::one();
    m
}

fn superposed_query<T: Num + Copy>() -> Mat<T> {
    let mut m = zero_mat();
    for i in [JH, AH] {
        for k in [JH, AH] {
            m[i][k] = half();
        }
    }
    m
}

/// Half-wave plate on the database mode when `bit` is set.
fn rotate<T: Num + Copy>(m: Mat<T>, bit: bool) -> Mat<T> {
    if !bit {
        return m;
    }
    let swap = |i: usize| match i {
        JH => JV,
        JV => JH,
        other => other,
    };
    let mut out = zero_mat();
    for i in 0..4 {
        for k in 0..4 {
            out[swap(i)][swap(k)] = m[i][k];
        }
    }
    out
}

fn bob_branches<T: Num + Copy>(action: Action<T>, rho: Mat<T>, bit: bool) -> Vec<(T, Mat<T>)> {
    match action {
        Action::Pass => vec![(T::one(), rotate(rho, bit))],
        Action::Dephase(gamma) => {
            let mut out = rotate(rho, bit);
            for i in [JH, JV] {
                for k in [AH, AV] {
                    out[i][k] = out[i][k] * gamma;
                    out[k][i] = out[k][i] * gamma;
                }
            }
            vec![(T::one(), out)]
        }
        Action::Measure => {
            let mut branches = Vec::new();
            let found = rho[JH][JH] + rho[JV][JV];
            let absent = rho[AH][AH] + rho[AV][AV];
            if !found.is_zero() {
                branches.push((found, rotate(plain_query(), bit)));
            }
            if !absent.is_zero() {
                let mut post = zero_mat();
                for i in [AH, AV] {
                    for k in [AH, AV] {
                        post[i][k] = rho[i][k] / absent;
                    }
                }
                branches.push((absent, rotate(post, bit)));
            }
            branches
        }
    }
}

/// Polarization readout branches; `None` means the photon was not in the
/// database mode, which the runner scores as a D1 click.
fn readout_branches<T: Num + Copy>(rho: &Mat<T>) -> Vec<(T, Option<bool>)> {
    [(rho[JH][JH], Some(false)), (rho[JV][JV], Some(true)), (rho[AH][AH] + rho[AV][AV], None)]
        .into_iter()
        .filter(|(w, _)| !w.is_zero())
        .collect()
}

/// `⟨S^g|ρ|S^g⟩` with `|S^g⟩ = (|g⟩_j + |H⟩_{j_a})/√2`.
fn d0_probability<T: Num + Copy>(rho: &Mat<T>, guess: bool) -> T {
    let g = if guess { JV } else { JH };
    (rho[g][g] + rho[AH][AH] + rho[g][AH] + rho[AH][g]) * half()
}

fn transaction_catch<T: Num + Copy>(ordering: Ordering, actions: [Action<T>; 2], bit: bool, guess: Option<bool>) -> T {
    let mut total = T::zero();
    match ordering {
        Ordering::PlainFirst => {
            for (w1, r1) in bob_branches(actions[0], plain_query(), bit) {
                for (wr, readout) in readout_branches(&r1) {
                    for (w2, r2) in bob_branches(actions[1], superposed_query(), bit) {
                        let d1 = match readout {
                            Some(b) => T::one() - d0_probability(&r2, b),
                            None => T::one(),
                        };
                        total = total + w1 * wr * w2 * d1;
                    }
                }
            }
        }
        Ordering::SuperposedFirst => {
            let guesses = match guess {
                Some(g) => vec![(T::one(), g)],
                None => vec![(half(), false), (half(), true)],
            };
            for (wg, g) in guesses {
                for (w1, r1) in bob_branches(actions[0], superposed_query(), bit) {
                    let test_d1 = T::one() - d0_probability(&r1, g);
                    for (w2, r2) in bob_branches(actions[1], plain_query(), bit) {
                        for (wr, readout) in readout_branches(&r2) {
                            let d1 = match readout {
                                Some(b) if b == g => test_d1,
                                Some(_) => T::zero(),
                                None => T::one(),
                            };
                            total = total + wg * w1 * w2 * wr * d1;
                        }
                    }
                }
            }
        }
    }
    total
}

fn catch_probability<T: Num + Copy>(plans: &[(T, [Action<T>; 2])], policy: Policy) -> T {
    let orderings = match policy.ordering {
        Some(o) => vec![(T::one(), o)],
        None => vec![(half(), Ordering::PlainFirst), (half(), Ordering::SuperposedFirst)],
    };
    let mut total = T::zero();
    for &(wo, ordering) in &orderings {
        for &(wp, actions) in plans {
            // The target bit is averaged over; the result does not depend on it.
            for bit in [false, true] {
                total = total + wo * wp * half() * transaction_catch(ordering, actions, bit, policy.guess);
            }
        }
    }
    total
}

fn plans<T: Num + Copy>(strategy: BobStrategy, gamma: Option<T>) -> Vec<(T, [Action<T>; 2])> {
    use Action::{Measure, Pass};
    match strategy {
        BobStrategy::Honest => vec![(T::one(), [Pass, Pass])],
        BobStrategy::MeasureAndReprepare(MeasurePick::First) => vec![(T::one(), [Measure, Pass])],
        BobStrategy::MeasureAndReprepare(MeasurePick::Second) => vec![(T::one(), [Pass, Measure])],
        BobStrategy::MeasureAndReprepare(MeasurePick::Both) => vec![(T::one(), [Measure, Measure])],
        BobStrategy::MeasureAndReprepare(MeasurePick::UniformRandomOne) => {
            vec![(half(), [Measure, Pass]), (half(), [Pass, Measure])]
        }
        BobStrategy::PartialDephase(_) | BobStrategy::DelayTap { .. } => {
            let g = gamma.unwrap_or_else(T::one);
            vec![(T::one(), [Action::Dephase(g), Action::Dephase(g)])]
        }
    }
}

/// `gamma` as a fraction with denominator at most 2^20, if it is exactly one.
fn small_rational(gamma: f64) -> Option<Ratio<i64>> {
    let r = Ratio::<i64>::approximate_float(gamma)?;
    (*r.denom() <= 1 << 20 && r.to_f64() == Some(gamma)).then_some(r)
}

/// Exact probability that Alice's honesty test flags `strategy` under
/// `policy`, by enumerating ordering, Bob's pick, measurement collapse,
/// Alice's guess and the detector Born weights.
///
/// Strategies whose coherence factor is not a small exact fraction (e.g.
/// most delay taps) are evaluated in floating point and reported as
/// [`OracleValue::Approximate`].
pub fn analytic_catch_oracle(strategy: BobStrategy, policy: Policy) -> Result<OracleValue> {
    strategy.validate()?;
    let gamma = strategy.dephasing_gamma()?;
    let rational = match gamma {
        None => Some(None),
        Some(g) => small_rational(g).map(Some),
    };
    Ok(match rational {
        Some(g) => OracleValue::Exact(catch_probability(&plans(strategy, g), policy)),
        None => OracleValue::Approximate(catch_probability(&plans(strategy, gamma), policy)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(strategy: &str, policy: Policy) -> Ratio<i64> {
        analytic_catch_oracle(strategy.parse().unwrap(), policy).unwrap().exact().unwrap()
    }

    #[test]
    fn reported_catch_probabilities() {
        assert_eq!(exact("mr:random", Policy::PLAIN_FIRST), Ratio::new(1, 4));
        assert_eq!(exact("mr:random", Policy::RANDOM), Ratio::new(3, 16));
        assert_eq!(exact("honest", Policy::RANDOM), Ratio::new(0, 1));
        assert_eq!(exact("honest", Policy::PLAIN_FIRST), Ratio::new(0, 1));
    }

    #[test]
    fn derived_branch_values() {
        // Superposed query intercepted: collapse either way, D1 with 1/2.
        assert_eq!(exact("mr:second", Policy::PLAIN_FIRST), Ratio::new(1, 2));
        assert_eq!(exact("mr:first", Policy::PLAIN_FIRST), Ratio::new(0, 1));
        // Superposed first: meaningful half the time.
        assert_eq!(exact("mr:first", Policy::SUPERPOSED_FIRST), Ratio::new(1, 4));
        assert_eq!(exact("mr:both", Policy::PLAIN_FIRST), Ratio::new(1, 2));
        assert_eq!(exact("mr:both", Policy::RANDOM), Ratio::new(3, 8));
        assert_eq!(exact("mr:first", Policy::SUPERPOSED_FIRST.with_guess(true)), Ratio::new(1, 4));
        // Dephasing: (1 − gamma)/2 on every meaningful test.
        assert_eq!(exact("dephase:0.4", Policy::PLAIN_FIRST), Ratio::new(3, 10));
        assert_eq!(exact("dephase:0.4", Policy::RANDOM), Ratio::new(9, 40));
        assert_eq!(exact("dephase:1", Policy::RANDOM), Ratio::new(0, 1));
        assert_eq!(exact("delay:0,1", Policy::RANDOM), Ratio::new(0, 1));
    }

    #[test]
    fn forced_guess_averages_to_random() {
        // The target bit is averaged over, so a forced guess is right half the time.
        for g in [false, true] {
            assert_eq!(
                exact("mr:random", Policy::SUPERPOSED_FIRST.with_guess(g)),
                exact("mr:random", Policy::SUPERPOSED_FIRST)
            );
        }
        assert_eq!(exact("mr:random", Policy::SUPERPOSED_FIRST), Ratio::new(1, 8));
    }

    #[test]
    fn irrational_gamma_is_flagged() {
        let v = analytic_catch_oracle("delay:1,1".parse().unwrap(), Policy::PLAIN_FIRST).unwrap();
        let g = libm::exp(-0.5);
        match v {
            OracleValue::Approximate(p) => assert!((p - (1.0 - g) / 2.0).abs() < 1e-12),
            OracleValue::Exact(_) => panic!("expected approximate value"),
        }
    }
}
