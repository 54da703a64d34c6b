//! The MAO function `g`, its transversal sums `G_T`, and the MAO norms.
//!
//! For an instance with population size `n` and subset sizes `m_1, ..., m_T`,
//! a tuple of index sets `A_1, ..., A_r` of `[T]` is scored by
//!
//! ```text
//! g(A_1, ..., A_r) = prod_i (m_i)_{k_i} * (n - m_i)_{r - k_i}
//! ```
//!
//! where `k_i` counts the sets containing `i`. `G_T` sums `g` over all tuples
//! with prescribed cardinalities, and the norm divides that sum by
//! `((n)_r)^(T-1)`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{falling_factorial_u64, iterate_k_subsets, ExactInt, ExactRational};
use crate::error::{MaoError, Result};

/// One problem instance: population size `n` and the subset sizes `m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct Params {
    n: u64,
    m: Vec<u64>,
}

#[derive(Deserialize)]
struct RawParams {
    n: u64,
    m: Vec<u64>,
}

impl TryFrom<RawParams> for Params {
    type Error = MaoError;

    fn try_from(raw: RawParams) -> Result<Self> {
        Params::new(raw.n, raw.m)
    }
}

impl Params {
    /// Requires `n >= 1`, at least one subset, and `1 <= m_i <= n`.
    pub fn new(n: u64, m: Vec<u64>) -> Result<Self> {
        if n == 0 {
            return Err(MaoError::InvalidParams("n must be positive".into()));
        }
        if m.is_empty() {
            return Err(MaoError::InvalidParams("at least one subset size is required".into()));
        }
        if let Some(bad) = m.iter().find(|&&mi| mi == 0 || mi > n) {
            return Err(MaoError::InvalidParams(format!(
                "subset size {bad} is outside [1, {n}]"
            )));
        }
        Ok(Self { n, m })
    }

    /// All `t` subsets share the size `m`.
    pub fn uniform(n: u64, m: u64, t: usize) -> Result<Self> {
        Self::new(n, vec![m; t])
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> &[u64] {
        &self.m
    }

    /// Number of subsets, `T`.
    pub fn subsets(&self) -> usize {
        self.m.len()
    }

    /// The instance with every `m_i` replaced by `n - m_i`.
    pub fn complement(&self) -> Result<Self> {
        Self::new(self.n, self.m.iter().map(|&mi| self.n - mi).collect())
    }

    /// Per-index factor table: `table[i][k] = (m_i)_k (n - m_i)_{r-k}`.
    pub(crate) fn index_weights(&self, r: usize) -> Vec<Vec<ExactInt>> {
        self.m
            .iter()
            .map(|&mi| {
                (0..=r)
                    .map(|k| falling_factorial_u64(mi, k) * falling_factorial_u64(self.n - mi, r - k))
                    .collect()
            })
            .collect()
    }
}

/// Admissible subset sizes for each of the `r` slots of a transversal sum.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeSpec {
    /// `|A_j| = p_j`.
    Fixed(Vec<usize>),
    /// `|A_j| in B_j`.
    BSets(Vec<BTreeSet<usize>>),
}

impl SizeSpec {
    /// Number of slots, `r`.
    pub fn arity(&self) -> usize {
        match self {
            SizeSpec::Fixed(p) => p.len(),
            SizeSpec::BSets(b) => b.len(),
        }
    }

    /// The equivalent B-set form; fixed sizes become singletons.
    pub fn to_bsets(&self) -> Vec<BTreeSet<usize>> {
        match self {
            SizeSpec::Fixed(p) => p.iter().map(|&pj| BTreeSet::from([pj])).collect(),
            SizeSpec::BSets(b) => b.clone(),
        }
    }

    pub fn validate(&self, t: usize) -> Result<()> {
        for set in self.to_bsets() {
            let Some(&max) = set.last() else {
                return Err(MaoError::InvalidSizeSpec("empty size set".into()));
            };
            if max > t {
                return Err(MaoError::SizeOutOfRange { size: max, max: t });
            }
        }
        Ok(())
    }
}

/// Membership vector of a subset of `[t]`, rejecting out-of-range or repeated
/// indices.
fn membership(t: usize, subset: &[usize]) -> Result<Vec<bool>> {
    let mut seen = vec![false; t];
    for &i in subset {
        if i == 0 || i > t {
            return Err(MaoError::IndexOutOfRange { index: i, max: t });
        }
        if seen[i - 1] {
            return Err(MaoError::InvalidParams(format!("index {i} repeated in subset")));
        }
        seen[i - 1] = true;
    }
    Ok(seen)
}

/// `g(A) = prod_{i in A} m_i * prod_{i not in A} (n - m_i)`.
pub fn g_single(params: &Params, subset: &[usize]) -> Result<ExactInt> {
    let inside = membership(params.subsets(), subset)?;
    Ok(params
        .m
        .iter()
        .zip(inside)
        .fold(BigInt::one(), |acc, (&mi, is_in)| {
            acc * if is_in { mi } else { params.n - mi }
        }))
}

/// `k_i = |{ j : i in A_j }|` for each index of `[t]`.
pub fn multiplicity_vector(t: usize, tuple: &[Vec<usize>]) -> Result<Vec<usize>> {
    let mut k = vec![0usize; t];
    for subset in tuple {
        for (ki, is_in) in k.iter_mut().zip(membership(t, subset)?) {
            *ki += usize::from(is_in);
        }
    }
    Ok(k)
}

/// The MAO function `g(A_1, ..., A_r)`; `r` is the tuple length.
pub fn g_multi(params: &Params, tuple: &[Vec<usize>]) -> Result<ExactInt> {
    let r = tuple.len();
    let k = multiplicity_vector(params.subsets(), tuple)?;
    Ok(params.m.iter().zip(k).fold(BigInt::one(), |acc, (&mi, ki)| {
        acc * falling_factorial_u64(mi, ki) * falling_factorial_u64(params.n - mi, r - ki)
    }))
}

/// `g(A^r)`: the MAO function on `r` copies of the same set.
pub fn g_power(params: &Params, subset: &[usize], r: usize) -> Result<ExactInt> {
    if r == 0 {
        return Err(MaoError::InvalidOrder { order: 0, min: 1 });
    }
    let inside = membership(params.subsets(), subset)?;
    Ok(params
        .m
        .iter()
        .zip(inside)
        .fold(BigInt::one(), |acc, (&mi, is_in)| {
            acc * if is_in {
                falling_factorial_u64(mi, r)
            } else {
                falling_factorial_u64(params.n - mi, r)
            }
        }))
}

/// `G_T` by literal enumeration of every admissible tuple.
///
/// Cost is the product of the slot domain sizes; use only on small instances.
pub fn transversal_sum_naive(params: &Params, spec: &SizeSpec) -> Result<ExactInt> {
    let t = params.subsets();
    spec.validate(t)?;
    let r = spec.arity();
    let weights = params.index_weights(r);

    // Every slot's domain as membership counts contributions per index.
    let domains: Vec<Vec<Vec<usize>>> = spec
        .to_bsets()
        .iter()
        .map(|sizes| {
            sizes
                .iter()
                .flat_map(|&p| iterate_k_subsets(t, p).expect("validated size"))
                .collect()
        })
        .collect();
    if domains.iter().any(Vec::is_empty) {
        return Ok(BigInt::zero());
    }

    let mut total = BigInt::zero();
    let mut cursor = vec![0usize; r];
    let mut k = vec![0usize; t];
    loop {
        k.iter_mut().for_each(|ki| *ki = 0);
        for (slot, &c) in cursor.iter().enumerate() {
            for &i in &domains[slot][c] {
                k[i - 1] += 1;
            }
        }
        total += k
            .iter()
            .zip(&weights)
            .fold(BigInt::one(), |acc, (&ki, w)| acc * &w[ki]);

        // odometer over slots, last slot fastest
        let mut slot = r;
        loop {
            if slot == 0 {
                return Ok(total);
            }
            slot -= 1;
            cursor[slot] += 1;
            if cursor[slot] < domains[slot].len() {
                break;
            }
            cursor[slot] = 0;
        }
    }
}

/// Dense indexing of residual-size states `(c_1, ..., c_r)` with `c_j <= cap_j`.
struct StateSpace {
    caps: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl StateSpace {
    fn new(caps: Vec<usize>) -> Self {
        let mut strides = vec![0; caps.len()];
        let mut len = 1usize;
        for (j, &cap) in caps.iter().enumerate().rev() {
            strides[j] = len;
            len *= cap + 1;
        }
        Self { caps, strides, len }
    }

    fn decode(&self, mut idx: usize, out: &mut [usize]) {
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = idx / self.strides[j];
            idx %= self.strides[j];
        }
    }

    fn encode(&self, counts: &[usize]) -> usize {
        counts.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }
}

/// `G_T` by dynamic programming over the indices `1..=T`.
///
/// The state after processing `i` indices is the vector of how many of them
/// each slot has taken so far. Since the factor contributed by index `i`
/// depends only on how many slots take it, each step is a pass over the
/// `2^r` membership patterns. When every slot admits the same sizes the
/// states are kept sorted, merging the `r!` permutations of each count
/// vector.
pub fn transversal_sum_dp(params: &Params, spec: &SizeSpec) -> Result<ExactInt> {
    let t = params.subsets();
    spec.validate(t)?;
    let r = spec.arity();
    if r == 0 {
        return Ok(BigInt::one());
    }
    let bsets = spec.to_bsets();
    let weights = params.index_weights(r);
    if r > 1 && bsets.iter().all(|b| *b == bsets[0]) {
        Ok(dp_symmetric(&weights, &bsets[0], r))
    } else {
        Ok(dp_general(&weights, &bsets))
    }
}

fn dp_general(weights: &[Vec<ExactInt>], bsets: &[BTreeSet<usize>]) -> ExactInt {
    let r = bsets.len();
    let space = StateSpace::new(bsets.iter().map(|b| *b.last().unwrap()).collect());
    let mut current = vec![BigInt::zero(); space.len];
    current[0] = BigInt::one();
    let mut counts = vec![0usize; r];

    for w in weights {
        let mut next = vec![BigInt::zero(); space.len];
        for (idx, value) in current.iter().enumerate() {
            if value.is_zero() {
                continue;
            }
            space.decode(idx, &mut counts);
            let scaled: Vec<ExactInt> = w.iter().map(|wk| value * wk).collect();
            for pattern in 0u32..(1 << r) {
                let mut target = idx;
                let mut fits = true;
                for (j, (&c, (&cap, &stride))) in counts.iter().zip(space.caps.iter().zip(&space.strides)).enumerate() {
                    if pattern & (1 << j) != 0 {
                        if c == cap {
                            fits = false;
                            break;
                        }
                        target += stride;
                    }
                }
                if fits {
                    next[target] += &scaled[pattern.count_ones() as usize];
                }
            }
        }
        current = next;
    }

    let mut total = BigInt::zero();
    for (idx, value) in current.iter().enumerate() {
        space.decode(idx, &mut counts);
        if counts.iter().zip(bsets).all(|(c, b)| b.contains(c)) {
            total += value;
        }
    }
    total
}

fn dp_symmetric(weights: &[Vec<ExactInt>], sizes: &BTreeSet<usize>, r: usize) -> ExactInt {
    let cap = *sizes.last().unwrap();
    let space = StateSpace::new(vec![cap; r]);
    let sorted_states: Vec<usize> = (0..space.len)
        .filter(|&idx| {
            let mut c = vec![0; r];
            space.decode(idx, &mut c);
            c.windows(2).all(|w| w[0] <= w[1])
        })
        .collect();

    // current[idx] holds the weight of any single ordered arrangement of the
    // sorted counts at idx; all its permutations carry the same weight.
    let mut current = vec![BigInt::zero(); space.len];
    current[0] = BigInt::one();
    let mut counts = vec![0usize; r];
    let mut prev = vec![0usize; r];

    for (step, w) in weights.iter().enumerate() {
        let mut next = vec![BigInt::zero(); space.len];
        for &idx in &sorted_states {
            space.decode(idx, &mut counts);
            if counts[r - 1] > step + 1 {
                continue;
            }
            let mut acc = BigInt::zero();
            for pattern in 0u32..(1 << r) {
                let mut ok = true;
                for j in 0..r {
                    prev[j] = counts[j];
                    if pattern & (1 << j) != 0 {
                        if prev[j] == 0 {
                            ok = false;
                            break;
                        }
                        prev[j] -= 1;
                    }
                }
                if !ok {
                    continue;
                }
                prev.sort_unstable();
                let source = &current[space.encode(&prev)];
                if !source.is_zero() {
                    acc += source * &w[pattern.count_ones() as usize];
                }
            }
            next[idx] = acc;
        }
        current = next;
    }

    let factorial = |k: usize| (1..=k).product::<usize>();
    let mut total = BigInt::zero();
    for &idx in &sorted_states {
        space.decode(idx, &mut counts);
        if !counts.iter().all(|c| sizes.contains(c)) || current[idx].is_zero() {
            continue;
        }
        // number of distinct orderings of the sorted count vector
        let mut arrangements = factorial(r);
        let mut run = 1;
        for j in 1..=r {
            if j < r && counts[j] == counts[j - 1] {
                run += 1;
            } else {
                arrangements /= factorial(run);
                run = 1;
            }
        }
        total += &current[idx] * arrangements;
    }
    total
}

/// The MAO norm `G_T / ((n)_r)^(T-1)`, reduced.
pub fn mao_norm(params: &Params, spec: &SizeSpec) -> Result<ExactRational> {
    let r = spec.arity();
    if r as u64 > params.n {
        return Err(MaoError::DegenerateDenominator { r, n: params.n });
    }
    let numerator = transversal_sum_dp(params, spec)?;
    let denominator = falling_factorial_u64(params.n, r).pow(params.subsets() as u32 - 1);
    Ok(BigRational::new(numerator, denominator))
}

/// Norm of a single fixed size, `||(p)||_T = sum_{|A|=p} g(A) / n^(T-1)`.
pub fn single_norm(params: &Params, p: usize) -> Result<ExactRational> {
    mao_norm(params, &SizeSpec::Fixed(vec![p]))
}
