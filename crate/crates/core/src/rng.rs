//! Seeded random sources.
//!
//! Each Monte Carlo trial draws from its own ChaCha stream keyed by
//! `(master seed, trial index)`, so results do not depend on the order in
//! which trials are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator used for every sampled operation in the crate.
pub type TrialRng = ChaCha8Rng;

/// Random source for trial `index` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Picks a branch index with the given (non-negative) weights.
///
/// Zero-weight branches are never returned. When rounding leaves the draw
/// past the cumulative total the last positive branch is used. Returns `None`
/// only when every weight is zero.
pub(crate) fn sample_branch<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().copied().filter(|w| *w > 0.0).sum();
    if total <= 0.0 {
        return None;
    }
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = Some(i);
        if u < acc {
            return Some(i);
        }
    }
    last
}
