//! Exact integer primitives: falling factorials, binomials, Stirling numbers
//! of the second kind, and fixed-size subset enumeration.

use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{MaoError, Result};

/// Arbitrary-precision integer used for every integer-valued intermediate.
pub type ExactInt = BigInt;

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type ExactRational = BigRational;

/// `(x)_r = x (x - 1) ... (x - r + 1)`, with `(x)_0 = 1`.
///
/// For a non-negative integer `x < r` one factor is zero, so the result is 0.
pub fn falling_factorial(x: &ExactInt, r: usize) -> ExactInt {
    if !x.is_negative() && *x < BigInt::from(r) {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    let mut f = x.clone();
    for _ in 0..r {
        acc *= &f;
        f -= 1;
    }
    acc
}

/// `(x)_r` for an unsigned `x`.
pub fn falling_factorial_u64(x: u64, r: usize) -> ExactInt {
    if (r as u64) > x {
        return BigInt::zero();
    }
    (0..r as u64).fold(BigInt::one(), |acc, j| acc * (x - j))
}

/// Binomial coefficient `C(t, p)`; zero when `p > t`.
pub fn binomial(t: u64, p: u64) -> ExactInt {
    if p > t {
        return BigInt::zero();
    }
    let p = p.min(t - p);
    let mut acc = BigInt::one();
    for j in 0..p {
        acc *= t - j;
        acc /= j + 1;
    }
    acc
}

fn stirling_table() -> &'static Mutex<Vec<Vec<ExactInt>>> {
    static TABLE: OnceLock<Mutex<Vec<Vec<ExactInt>>>> = OnceLock::new();
    // Row v holds S(v, 0..=v); row 0 is S(0, 0) = 1.
    TABLE.get_or_init(|| Mutex::new(vec![vec![BigInt::one()]]))
}

/// Stirling number of the second kind `S(v, i)` for `1 <= i <= v`.
///
/// Rows are built with `S(v, i) = i S(v-1, i) + S(v-1, i-1)` and memoized
/// for the lifetime of the process.
pub fn stirling2(v: usize, i: usize) -> Result<ExactInt> {
    if i < 1 || i > v {
        return Err(MaoError::StirlingIndex { v, i });
    }
    let mut table = stirling_table().lock().unwrap_or_else(|e| e.into_inner());
    while table.len() <= v {
        let prev = table.last().expect("row 0 is seeded");
        let len = prev.len();
        let mut row = vec![BigInt::zero(); len + 1];
        for (j, slot) in row.iter_mut().enumerate().skip(1) {
            let stay = if j < len { &prev[j] * j } else { BigInt::zero() };
            *slot = stay + &prev[j - 1];
        }
        table.push(row);
    }
    Ok(table[v][i].clone())
}

/// Iterator over the `p`-subsets of `{1, ..., t}` in colexicographic order.
///
/// Each item is the sorted list of 1-based members.
#[derive(Debug, Clone)]
pub struct KSubsets {
    t: usize,
    current: Vec<usize>,
    done: bool,
}

impl KSubsets {
    pub fn new(t: usize, p: usize) -> Result<Self> {
        if p > t {
            return Err(MaoError::SizeOutOfRange { size: p, max: t });
        }
        Ok(Self {
            t,
            current: (1..=p).collect(),
            done: false,
        })
    }

    fn advance(&mut self) {
        let p = self.current.len();
        // Find the lowest position that can move up without colliding with
        // its right neighbour; everything below it resets to 1, 2, ...
        for j in 0..p {
            let limit = if j + 1 < p { self.current[j + 1] } else { self.t + 1 };
            if self.current[j] + 1 < limit {
                self.current[j] += 1;
                for (k, slot) in self.current[..j].iter_mut().enumerate() {
                    *slot = k + 1;
                }
                return;
            }
        }
        self.done = true;
    }
}

impl Iterator for KSubsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let item = self.current.clone();
        self.advance();
        Some(item)
    }
}

/// All `p`-subsets of `[t]`, colexicographic order.
pub fn iterate_k_subsets(t: usize, p: usize) -> Result<KSubsets> {
    KSubsets::new(t, p)
}
