//! Monte-Carlo and sieve checkers for the probability bounds the
//! recovery algorithms rest on: majority voting, GCD of uniform
//! samples, the totient partial sum, and random group generation.
//!
//! Checkers report what happened; callers compare the empirical rate
//! against the guaranteed bound, normally with three standard errors
//! of slack.

use num_integer::Integer;
use rand::Rng;

use crate::abelian::{AbelianGroup, Subgroup};
use crate::ehk::FiniteGroupTable;
use crate::rng::trial_rng;
use crate::{Error, Result};

/// Totient sieve size guard.
pub const TOTIENT_CAP: u64 = 10_000_000;
/// Generation experiments materialize groups up to this order.
pub const GENERATION_GROUP_CAP: usize = 1 << 12;

/// Outcome of one Monte-Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub trials: u64,
    pub successes: u64,
    /// successes / trials.
    pub empirical: f64,
    /// The guaranteed probability being tested.
    pub bound: f64,
    /// empirical − bound.
    pub margin: f64,
    pub seed: u64,
}

impl TrialReport {
    fn new(trials: u64, successes: u64, bound: f64, seed: u64) -> TrialReport {
        let empirical = successes as f64 / trials as f64;
        TrialReport {
            trials,
            successes,
            empirical,
            bound,
            margin: empirical - bound,
            seed,
        }
    }

    /// Binomial standard error of the empirical estimate.
    pub fn sigma(&self) -> f64 {
        (self.empirical * (1.0 - self.empirical) / self.trials as f64).sqrt()
    }
}

fn require_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::domain("at least one trial required"));
    }
    Ok(())
}

// ------------------------------------------------------------------
// Majority voting.

/// Counts how often n Bernoulli(1/2 + ε) draws fail to produce a
/// strict majority. The failure rate is guaranteed ≤ e^(−2ε²n).
pub fn chernoff_check(epsilon: f64, n: u64, trials: u64, seed: u64) -> Result<TrialReport> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::domain(format!(
            "bias must lie strictly between 0 and 1/2, got {epsilon}"
        )));
    }
    if n == 0 {
        return Err(Error::domain("at least one draw per trial required"));
    }
    require_trials(trials)?;
    let p = 0.5 + epsilon;
    let mut failures = 0u64;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let mut agree = 0u64;
        for _ in 0..n {
            if rng.gen_bool(p) {
                agree += 1;
            }
        }
        if 2 * agree <= n {
            failures += 1;
        }
    }
    let bound = (-2.0 * epsilon * epsilon * n as f64).exp();
    Ok(TrialReport::new(trials, failures, bound, seed))
}

// ------------------------------------------------------------------
// Totient partial sum.

/// Exact sieve evaluation of Σ φ(c) for c = 1..n against 3n²/π².
#[derive(Debug, Clone, PartialEq)]
pub struct TotientSumCheck {
    pub n: u64,
    pub sum: u64,
    /// |Σ φ(c) − 3n²/π²|.
    pub deviation: f64,
    /// n·ln n.
    pub bound: f64,
}

impl TotientSumCheck {
    pub fn holds(&self) -> bool {
        self.deviation < self.bound
    }
}

/// φ(1), …, φ(n) by linear sieve.
fn totient_table(n: usize) -> Vec<u32> {
    let mut phi = vec![0u32; n + 1];
    let mut primes: Vec<usize> = Vec::new();
    phi[1] = 1;
    for i in 2..=n {
        if phi[i] == 0 {
            phi[i] = (i - 1) as u32;
            primes.push(i);
        }
        for &p in &primes {
            let ip = i * p;
            if ip > n {
                break;
            }
            if i % p == 0 {
                phi[ip] = phi[i] * p as u32;
                break;
            }
            phi[ip] = phi[i] * (p as u32 - 1);
        }
    }
    phi
}

pub fn totient_sum_check(n: u64) -> Result<TotientSumCheck> {
    if n < 2 {
        return Err(Error::domain("totient sum needs n >= 2"));
    }
    if n > TOTIENT_CAP {
        return Err(Error::capability(format!(
            "totient sieve capped at {TOTIENT_CAP}, got {n}"
        )));
    }
    let phi = totient_table(n as usize);
    let sum: u64 = phi[1..].iter().map(|&x| x as u64).sum();
    let nf = n as f64;
    let target = 3.0 * nf * nf / (std::f64::consts::PI * std::f64::consts::PI);
    Ok(TotientSumCheck {
        n,
        sum,
        deviation: (sum as f64 - target).abs(),
        bound: nf * nf.ln(),
    })
}

// ------------------------------------------------------------------
// GCD of uniform samples.

/// Counts how often k uniform draws from {0, …, d−1} have gcd 1.
/// Guaranteed ≥ 1 − 2^(−k/2); for k = 2 also ≥ 1/2.
pub fn gcd_probability_check(d: u64, k: u32, trials: u64, seed: u64) -> Result<TrialReport> {
    if d < 2 {
        return Err(Error::domain("sample range needs d >= 2"));
    }
    if k < 2 {
        return Err(Error::domain("gcd experiment needs k >= 2 samples"));
    }
    require_trials(trials)?;
    let mut hits = 0u64;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let mut g = 0u64;
        for _ in 0..k {
            g = g.gcd(&rng.gen_range(0..d));
            if g == 1 {
                break;
            }
        }
        if g == 1 {
            hits += 1;
        }
    }
    let bound = 1.0 - 0.5f64.powf(k as f64 / 2.0);
    Ok(TrialReport::new(trials, hits, bound, seed))
}

// ------------------------------------------------------------------
// Random group generation.

enum GenerationGroup {
    Abelian(AbelianGroup),
    Table(FiniteGroupTable),
}

fn resolve_group(descriptor: &str) -> Result<GenerationGroup> {
    if let Ok(group) = AbelianGroup::parse(descriptor) {
        return Ok(GenerationGroup::Abelian(group));
    }
    if let Ok(table) = FiniteGroupTable::bundled(descriptor) {
        return Ok(GenerationGroup::Table(table));
    }
    Err(Error::domain(format!(
        "unknown group descriptor {descriptor:?}: expected a modulus \
         product like Z2xZ4 or a bundled table name"
    )))
}

fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - ((x - 1) as u64).leading_zeros()
    }
}

/// Counts how often t + ⌈log₂|G|⌉ uniform elements generate G.
/// Guaranteed ≥ 1 − 2^(−t).
pub fn generation_probability_check(
    descriptor: &str,
    t: u32,
    trials: u64,
    seed: u64,
) -> Result<TrialReport> {
    require_trials(trials)?;
    let group = resolve_group(descriptor)?;
    let order = match &group {
        GenerationGroup::Abelian(g) => g.order() as usize,
        GenerationGroup::Table(g) => g.order(),
    };
    if order > GENERATION_GROUP_CAP {
        return Err(Error::capability(format!(
            "generation experiments capped at order {GENERATION_GROUP_CAP}, got {order}"
        )));
    }
    let draws = t as u64 + ceil_log2(order) as u64;
    let mut hits = 0u64;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let generated = match &group {
            GenerationGroup::Abelian(g) => {
                let mut gens = Vec::new();
                let mut current = Subgroup::trivial(g);
                for _ in 0..draws {
                    let elem = g.element_at(rng.gen_range(0..g.order()) as usize);
                    // Closure is only recomputed when the subgroup
                    // actually grows, at most log2 |G| times.
                    if !current.contains(g, &elem) {
                        gens.push(elem);
                        current = Subgroup::from_generators(g, &gens)?;
                        if current.order() == g.order() {
                            break;
                        }
                    }
                }
                current.order() == g.order()
            }
            GenerationGroup::Table(g) => {
                let mut gens = Vec::new();
                let mut current = vec![g.identity()];
                for _ in 0..draws {
                    let elem = rng.gen_range(0..g.order());
                    if current.binary_search(&elem).is_err() {
                        gens.push(elem);
                        current = g.closure(&gens);
                        if current.len() == g.order() {
                            break;
                        }
                    }
                }
                current.len() == g.order()
            }
        };
        if generated {
            hits += 1;
        }
    }
    let bound = 1.0 - 0.5f64.powi(t as i32);
    Ok(TrialReport::new(trials, hits, bound, seed))
}

/// Exact probability that r + t uniform vectors span F₂^r:
/// ∏ (1 − 2^(−(t+a))) over a = 1..r.
pub fn z2r_generation_exact(r: u32, t: u32) -> f64 {
    (1..=r)
        .map(|a| 1.0 - 0.5f64.powi((t + a) as i32))
        .product()
}
