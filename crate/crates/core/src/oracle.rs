//! Ground truth for the moment formulas: an exhaustive enumerator that yields
//! the exact distribution of the occupancy count, and a seeded Monte Carlo
//! sampler for instances beyond its reach.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, iterate_k_subsets, ExactInt, ExactRational};
use crate::error::{MaoError, Result};
use crate::mao::Params;
use crate::moments::{check_threshold, moment_report_with, NormCache, TailMode};
use crate::report::{rational, rational_map};

/// Default cap on the number of subset tuples the enumerator will visit.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Environment variable that overrides [`DEFAULT_BUDGET`].
pub const BUDGET_ENV: &str = "MAO_BUDGET";

/// Budget from `MAO_BUDGET`, falling back to the default when unset or
/// unparsable.
pub fn budget_from_env() -> u64 {
    std::env::var(BUDGET_ENV)
        .ok()
        .and_then(|v| v.trim().replace('_', "").parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

/// Number of equally likely draws, `prod_i C(n, m_i)`.
pub fn tuple_count(params: &Params) -> ExactInt {
    params
        .m()
        .iter()
        .fold(BigInt::one(), |acc, &mi| acc * binomial(params.n(), mi))
}

/// Exact distribution of `x_{=t}` or `x_{>=t}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactPmf {
    pub params: Params,
    pub t: usize,
    pub mode: TailMode,
    /// Only counts with positive probability are stored.
    #[serde(with = "rational_map")]
    pub probabilities: BTreeMap<u64, ExactRational>,
}

impl ExactPmf {
    pub fn probability(&self, x: u64) -> ExactRational {
        self.probabilities.get(&x).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn total(&self) -> ExactRational {
        self.probabilities.values().sum()
    }

    /// `E[x^v]`.
    pub fn raw_moment(&self, v: u32) -> ExactRational {
        self.probabilities
            .iter()
            .map(|(&x, p)| p * BigInt::from(x).pow(v))
            .sum()
    }

    /// `E[(x)_i]`.
    pub fn factorial_moment(&self, i: usize) -> ExactRational {
        self.probabilities
            .iter()
            .map(|(&x, p)| p * crate::combinatorics::falling_factorial_u64(x, i))
            .sum()
    }
}

/// Visits every tuple of subsets (the product of colexicographic orders over
/// the slots) and tallies the occupancy count.
pub fn exhaustive_pmf(params: &Params, t: usize, mode: TailMode, budget: u64) -> Result<ExactPmf> {
    check_threshold(params, t)?;
    let tuples = tuple_count(params);
    if tuples > BigInt::from(budget) {
        return Err(MaoError::BudgetExceeded { tuples: tuples.to_string(), budget });
    }
    let n = params.n() as usize;
    let slots: Vec<Vec<Vec<usize>>> = params
        .m()
        .iter()
        .map(|&mi| iterate_k_subsets(n, mi as usize).expect("m_i <= n").collect())
        .collect();

    let tally = slots[0]
        .par_iter()
        .map(|first| {
            let mut coverage = vec![0usize; n];
            let mut counts = vec![0u64; n + 1];
            for &e in first {
                coverage[e - 1] += 1;
            }
            descend(&slots[1..], &mut coverage, &mut counts, t, mode);
            counts
        })
        .reduce(
            || vec![0u64; n + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let probabilities = tally
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c > 0)
        .map(|(x, c)| (x as u64, BigRational::new(BigInt::from(c), tuples.clone())))
        .collect();
    Ok(ExactPmf { params: params.clone(), t, mode, probabilities })
}

fn descend(
    rest: &[Vec<Vec<usize>>],
    coverage: &mut [usize],
    counts: &mut [u64],
    t: usize,
    mode: TailMode,
) {
    let Some((slot, tail)) = rest.split_first() else {
        let x = coverage.iter().filter(|&&c| mode.admits(c, t)).count();
        counts[x] += 1;
        return;
    };
    for subset in slot {
        for &e in subset {
            coverage[e - 1] += 1;
        }
        descend(tail, coverage, counts, t, mode);
        for &e in subset {
            coverage[e - 1] -= 1;
        }
    }
}

/// Highest raw moment the sampler estimates.
pub const MC_ORDERS: usize = 4;

const MAX_BLOCK: u64 = 4096;

/// Trials per block such that a block's sums of `x^8` (with `x <= n`) fit in
/// a `u128`; `None` if a single trial would overflow.
fn block_size(n: u64) -> Option<u64> {
    let top = (n.max(1) as u128).checked_pow(2 * MC_ORDERS as u32)?;
    Some((u128::MAX / top).min(MAX_BLOCK as u128) as u64)
}

/// Monte Carlo estimates of `E[x^v]` for `v = 1..=4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMoments {
    pub params: Params,
    pub t: usize,
    pub mode: TailMode,
    pub trials: u64,
    pub seed: u64,
    pub raw_moment_estimates: Vec<f64>,
    /// `NaN` (serialized as `null`) when only one trial was run.
    pub standard_errors: Vec<f64>,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for one trial: the key comes from the seed and the ChaCha
/// stream id is the trial index, so each trial's draws are independent of
/// how trials are scheduled.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}

/// Per-element coverage counts for one simulated draw of all subsets.
///
/// Each subset is the first `m_i` positions of a partial Fisher-Yates
/// shuffle of the population.
pub fn draw_coverage(params: &Params, seed: u64, trial: u64) -> Vec<u32> {
    let n = params.n() as usize;
    let mut rng = trial_rng(seed, trial);
    let mut pool: Vec<usize> = (0..n).collect();
    let mut coverage = vec![0u32; n];
    draw_into(params, &mut rng, &mut pool, &mut coverage);
    coverage
}

fn draw_into(params: &Params, rng: &mut ChaCha8Rng, pool: &mut [usize], coverage: &mut [u32]) {
    let n = pool.len();
    for (j, slot) in pool.iter_mut().enumerate() {
        *slot = j;
    }
    coverage.iter_mut().for_each(|c| *c = 0);
    for &mi in params.m() {
        for j in 0..mi as usize {
            let pick = rng.gen_range(j..n);
            pool.swap(j, pick);
            coverage[pool[j]] += 1;
        }
    }
}

/// Sums of `x^1 ..= x^(2 * MC_ORDERS)` over a block of trials.
type PowerSums = [u128; 2 * MC_ORDERS];

fn block_sums(params: &Params, t: usize, mode: TailMode, seed: u64, range: std::ops::Range<u64>) -> PowerSums {
    let n = params.n() as usize;
    let mut pool = vec![0usize; n];
    let mut coverage = vec![0u32; n];
    let mut sums = [0u128; 2 * MC_ORDERS];
    for trial in range {
        let mut rng = trial_rng(seed, trial);
        draw_into(params, &mut rng, &mut pool, &mut coverage);
        let x = coverage.iter().filter(|&&c| mode.admits(c as usize, t)).count() as u128;
        let mut power = 1u128;
        for s in sums.iter_mut() {
            power *= x;
            *s += power;
        }
    }
    sums
}

/// Estimates raw moments by simulation.
///
/// Power sums are accumulated in exact integers, so the result is identical
/// for a given `(params, t, mode, trials, seed)` whatever the thread count.
pub fn monte_carlo(
    params: &Params,
    t: usize,
    mode: TailMode,
    trials: u64,
    seed: u64,
) -> Result<EmpiricalMoments> {
    check_threshold(params, t)?;
    if trials == 0 {
        return Err(MaoError::NoTrials);
    }
    let block = block_size(params.n()).ok_or_else(|| {
        MaoError::Inadmissible(format!("n = {} is too large for exact power sums", params.n()))
    })?;
    let blocks = trials.div_ceil(block);
    let partial: Vec<PowerSums> = (0..blocks)
        .into_par_iter()
        .map(|b| block_sums(params, t, mode, seed, b * block..((b + 1) * block).min(trials)))
        .collect();
    let mut sums = vec![BigInt::zero(); 2 * MC_ORDERS];
    for part in partial {
        for (s, p) in sums.iter_mut().zip(part) {
            *s += p;
        }
    }

    let count = BigInt::from(trials);
    let mut estimates = Vec::with_capacity(MC_ORDERS);
    let mut errors = Vec::with_capacity(MC_ORDERS);
    for v in 1..=MC_ORDERS {
        let first = sums[v - 1].clone();
        let second = &sums[2 * v - 1];
        let mean = BigRational::new(first.clone(), count.clone());
        estimates.push(mean.to_f64().unwrap_or(f64::NAN));
        if trials < 2 {
            errors.push(f64::NAN);
            continue;
        }
        // Var(mean) = (N * S2 - S1^2) / (N^2 (N - 1))
        let spread = &count * second - &first * &first;
        let var_of_mean = BigRational::new(spread, &count * &count * (&count - 1u32));
        errors.push(var_of_mean.to_f64().unwrap_or(f64::NAN).max(0.0).sqrt());
    }
    Ok(EmpiricalMoments {
        params: params.clone(),
        t,
        mode,
        trials,
        seed,
        raw_moment_estimates: estimates,
        standard_errors: errors,
    })
}

/// Which ground truth a comparison runs against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleKind {
    Exhaustive { budget: u64 },
    MonteCarlo { trials: u64, seed: u64 },
}

/// Largest |z| accepted as agreement with a Monte Carlo estimate.
pub const Z_TOLERANCE: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub order: usize,
    #[serde(with = "rational")]
    pub theorem: ExactRational,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_rational")]
    pub oracle_exact: Option<ExactRational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standard_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equal: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_score: Option<f64>,
}

impl CompareRow {
    pub fn agrees(&self) -> bool {
        match (self.equal, self.z_score) {
            (Some(eq), _) => eq,
            (None, Some(z)) => z.abs() <= Z_TOLERANCE,
            (None, None) => false,
        }
    }
}

mod opt_rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Option<ExactRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match q {
            Some(q) => rational::serialize(q, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<ExactRational>, D::Error> {
        Option::<crate::report::RationalRepr>::deserialize(d)?
            .map(|r| ExactRational::try_from(r).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub params: Params,
    pub t: usize,
    pub mode: TailMode,
    pub oracle: OracleKind,
    pub rows: Vec<CompareRow>,
}

impl CompareReport {
    pub fn all_agree(&self) -> bool {
        self.rows.iter().all(CompareRow::agrees)
    }
}

/// Tabulates the norm-based raw moments of orders `1..=max_order` against
/// the chosen oracle: exact equality for enumeration, z-scores for
/// simulation.
pub fn compare_report(
    params: &Params,
    t: usize,
    mode: TailMode,
    max_order: usize,
    oracle: OracleKind,
) -> Result<CompareReport> {
    check_threshold(params, t)?;
    if max_order == 0 {
        return Err(MaoError::InvalidOrder { order: 0, min: 1 });
    }
    let cache = NormCache::new();
    let report = moment_report_with(&cache, params, t, mode, max_order)?;
    let rows = match oracle {
        OracleKind::Exhaustive { budget } => {
            let pmf = exhaustive_pmf(params, t, mode, budget)?;
            report
                .raw_moments
                .iter()
                .enumerate()
                .map(|(i, theorem)| {
                    let exact = pmf.raw_moment(i as u32 + 1);
                    CompareRow {
                        order: i + 1,
                        theorem: theorem.clone(),
                        equal: Some(exact == *theorem),
                        oracle_exact: Some(exact),
                        estimate: None,
                        standard_error: None,
                        z_score: None,
                    }
                })
                .collect()
        }
        OracleKind::MonteCarlo { trials, seed } => {
            if max_order > MC_ORDERS {
                return Err(MaoError::InvalidOrder { order: max_order, min: 1 });
            }
            let empirical = monte_carlo(params, t, mode, trials, seed)?;
            report
                .raw_moments
                .iter()
                .enumerate()
                .map(|(i, theorem)| {
                    let estimate = empirical.raw_moment_estimates[i];
                    let se = empirical.standard_errors[i];
                    let exact = theorem.to_f64().unwrap_or(f64::NAN);
                    let z = if se > 0.0 {
                        (estimate - exact) / se
                    } else if estimate == exact {
                        0.0
                    } else {
                        f64::INFINITY
                    };
                    CompareRow {
                        order: i + 1,
                        theorem: theorem.clone(),
                        oracle_exact: None,
                        estimate: Some(estimate),
                        standard_error: Some(se),
                        equal: None,
                        z_score: Some(z),
                    }
                })
                .collect()
        }
    };
    Ok(CompareReport { params: params.clone(), t, mode, oracle, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn overlap_pmf_of_two_subsets() {
        let p = Params::new(5, vec![2, 3]).unwrap();
        let pmf = exhaustive_pmf(&p, 2, TailMode::AtLeast, DEFAULT_BUDGET).unwrap();
        assert_eq!(pmf.probability(0), ratio(1, 10));
        assert_eq!(pmf.probability(1), ratio(6, 10));
        assert_eq!(pmf.probability(2), ratio(3, 10));
        assert_eq!(pmf.total(), ratio(1, 1));
        assert_eq!(pmf.raw_moment(1), ratio(6, 5));
    }

    #[test]
    fn deterministic_single_subset() {
        let p = Params::new(4, vec![2]).unwrap();
        let pmf = exhaustive_pmf(&p, 1, TailMode::Exactly, DEFAULT_BUDGET).unwrap();
        assert_eq!(pmf.probabilities, BTreeMap::from([(2, ratio(1, 1))]));
        let full = Params::new(3, vec![3]).unwrap();
        let pmf = exhaustive_pmf(&full, 1, TailMode::Exactly, DEFAULT_BUDGET).unwrap();
        assert_eq!(pmf.probabilities, BTreeMap::from([(3, ratio(1, 1))]));
    }

    #[test]
    fn budget_is_enforced() {
        let p = Params::new(5, vec![2, 3]).unwrap();
        assert_eq!(
            exhaustive_pmf(&p, 1, TailMode::Exactly, 99),
            Err(MaoError::BudgetExceeded { tuples: "100".into(), budget: 99 })
        );
        assert!(exhaustive_pmf(&p, 1, TailMode::Exactly, 100).is_ok());
        assert!(exhaustive_pmf(&p, 3, TailMode::Exactly, 100).is_err());
    }

    #[test]
    fn pmf_json_shape() {
        let p = Params::new(5, vec![2, 3]).unwrap();
        let pmf = exhaustive_pmf(&p, 2, TailMode::AtLeast, DEFAULT_BUDGET).unwrap();
        let json = serde_json::to_value(&pmf).unwrap();
        assert_eq!(json["probabilities"]["1"]["num"], "3");
        assert_eq!(json["probabilities"]["1"]["den"], "5");
        let back: ExactPmf = serde_json::from_value(json).unwrap();
        assert_eq!(back, pmf);
    }

    #[test]
    fn deterministic_monte_carlo() {
        let p = Params::new(9, vec![5]).unwrap();
        let est = monte_carlo(&p, 1, TailMode::Exactly, 1000, 3).unwrap();
        assert_eq!(est.raw_moment_estimates[0], 5.0);
        assert_eq!(est.raw_moment_estimates[1], 25.0);
        assert!(est.standard_errors.iter().all(|&se| se == 0.0));
        let one = monte_carlo(&p, 1, TailMode::Exactly, 1, 3).unwrap();
        assert!(one.standard_errors[0].is_nan());
        assert_eq!(monte_carlo(&p, 1, TailMode::Exactly, 0, 3), Err(MaoError::NoTrials));
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let p = Params::new(12, vec![4, 6, 7]).unwrap();
        let a = monte_carlo(&p, 2, TailMode::AtLeast, 10_000, 42).unwrap();
        let b = monte_carlo(&p, 2, TailMode::AtLeast, 10_000, 42).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo(&p, 2, TailMode::AtLeast, 10_000, 43).unwrap();
        assert_ne!(a.raw_moment_estimates, c.raw_moment_estimates);
    }

    #[test]
    fn sampler_draws_exact_sizes() {
        let p = Params::new(10, vec![4, 7, 10]).unwrap();
        for trial in 0..50 {
            let cov = draw_coverage(&p, 7, trial);
            assert_eq!(cov.iter().sum::<u32>(), 21);
            assert!(cov.iter().all(|&c| (1..=3).contains(&c)));
        }
    }

    #[test]
    fn compare_exhaustive_small() {
        let p = Params::new(5, vec![2, 3]).unwrap();
        let rep = compare_report(&p, 1, TailMode::Exactly, 3, OracleKind::Exhaustive { budget: DEFAULT_BUDGET }).unwrap();
        assert_eq!(rep.rows.len(), 3);
        assert!(rep.all_agree());
        let json = serde_json::to_string(&rep).unwrap();
        let back: CompareReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn compare_rejects_high_mc_order() {
        let p = Params::new(10, vec![2, 3]).unwrap();
        assert!(compare_report(&p, 1, TailMode::Exactly, 5, OracleKind::MonteCarlo { trials: 10, seed: 1 }).is_err());
    }
}
