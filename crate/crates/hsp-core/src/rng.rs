//! Seed discipline.
//!
//! Every stochastic entry point takes a `u64` master seed. Independent
//! trials use [`trial_rng`], which maps the trial index onto a ChaCha
//! stream: trial `i` always sees the same generator no matter how many
//! trials run before or after it.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for a single-shot computation.
pub fn master_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for trial `trial` of a batch keyed by `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draws an index from an explicit probability vector by inverting the
/// CDF. `probs` must be nonnegative and sum to 1 within rounding slack.
///
/// Tie rule: the draw is the smallest `j` with `probs[j] > 0` and
/// `u <= cdf[j]`, so zero-probability outcomes are never returned.
pub fn draw_index(probs: &[f64], rng: &mut impl Rng) -> usize {
    debug_assert!(!probs.is_empty());
    let u: f64 = rng.gen();
    let mut cdf = 0.0;
    let mut last_positive = 0;
    for (j, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            cdf += p;
            last_positive = j;
            if u <= cdf {
                return j;
            }
        }
    }
    // Rounding left cdf a hair under 1; charge the draw to the final
    // positive-probability outcome.
    last_positive
}
