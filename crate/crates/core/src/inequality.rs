//! Exact checks of the norm inequality
//!
//! ```text
//! prod_j ||(p_j)||_T  >=  ||(p_1, ..., p_r)||_T
//! ```
//!
//! on single instances and over parameter grids, together with the scalar
//! reductions for `r = 2` that serve as independent cross-checks.

use std::collections::{BTreeMap, VecDeque};
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{iterate_k_subsets, ExactRational};
use crate::error::{MaoError, Result};
use crate::mao::{g_single, mao_norm, single_norm, Params, SizeSpec};
use crate::report::{decimal12, fraction_string, rational};

/// How close the sizes `p_1, ..., p_r` are to one another.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProximityClass {
    /// `max(p) - min(p) <= 1`.
    Conservative,
    /// `max(p) - min(p) <= max(1, r - 2)`.
    Relaxed,
    Unconstrained,
}

impl ProximityClass {
    pub const ALL: [ProximityClass; 3] = [
        ProximityClass::Conservative,
        ProximityClass::Relaxed,
        ProximityClass::Unconstrained,
    ];

    fn spread(p: &[usize]) -> usize {
        match (p.iter().max(), p.iter().min()) {
            (Some(hi), Some(lo)) => hi - lo,
            _ => 0,
        }
    }

    fn relaxed_limit(r: usize) -> usize {
        r.saturating_sub(2).max(1)
    }

    /// The tightest class containing `p`.
    pub fn classify(p: &[usize]) -> Self {
        let spread = Self::spread(p);
        if spread <= 1 {
            ProximityClass::Conservative
        } else if spread <= Self::relaxed_limit(p.len()) {
            ProximityClass::Relaxed
        } else {
            ProximityClass::Unconstrained
        }
    }

    /// Whether `p` satisfies this class's condition.
    pub fn admits(self, p: &[usize]) -> bool {
        let spread = Self::spread(p);
        match self {
            ProximityClass::Conservative => spread <= 1,
            ProximityClass::Relaxed => spread <= Self::relaxed_limit(p.len()),
            ProximityClass::Unconstrained => true,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ProximityClass::Conservative => "conservative",
            ProximityClass::Relaxed => "relaxed",
            ProximityClass::Unconstrained => "unconstrained",
        }
    }
}

impl std::str::FromStr for ProximityClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "conservative" => Ok(ProximityClass::Conservative),
            "relaxed" => Ok(ProximityClass::Relaxed),
            "unconstrained" => Ok(ProximityClass::Unconstrained),
            other => Err(format!("unknown proximity class `{other}`")),
        }
    }
}

/// Both sides of the inequality for one `(params, p)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityVerdict {
    pub params: Params,
    pub p: Vec<usize>,
    /// `prod_j ||(p_j)||_T`.
    #[serde(with = "rational")]
    pub lhs: ExactRational,
    /// `||(p_1, ..., p_r)||_T`.
    #[serde(with = "rational")]
    pub rhs: ExactRational,
    #[serde(with = "rational")]
    pub margin: ExactRational,
    pub holds: bool,
    pub class: ProximityClass,
}

impl InequalityVerdict {
    pub fn margin_decimal(&self) -> String {
        decimal12(&self.margin)
    }
}

fn check_sizes(params: &Params, p: &[usize]) -> Result<()> {
    let t = params.subsets();
    if let Some(&bad) = p.iter().find(|&&pj| pj > t) {
        return Err(MaoError::SizeOutOfRange { size: bad, max: t });
    }
    if p.len() as u64 > params.n() {
        return Err(MaoError::DegenerateDenominator { r: p.len(), n: params.n() });
    }
    Ok(())
}

fn verdict_from(
    params: &Params,
    p: &[usize],
    singles: &[ExactRational],
) -> Result<InequalityVerdict> {
    let lhs: ExactRational = p.iter().map(|&pj| &singles[pj]).product();
    let rhs = mao_norm(params, &SizeSpec::Fixed(p.to_vec()))?;
    let margin = &lhs - &rhs;
    Ok(InequalityVerdict {
        params: params.clone(),
        p: p.to_vec(),
        holds: !margin.is_negative(),
        lhs,
        rhs,
        margin,
        class: ProximityClass::classify(p),
    })
}

fn single_norms(params: &Params) -> Result<Vec<ExactRational>> {
    (0..=params.subsets()).map(|q| single_norm(params, q)).collect()
}

/// Evaluates both sides exactly and labels the proximity class. Never
/// asserts: a violation is reported through `holds`.
pub fn check_inequality(params: &Params, p: &[usize]) -> Result<InequalityVerdict> {
    check_sizes(params, p)?;
    verdict_from(params, p, &single_norms(params)?)
}

/// The two forms of the inequality's left-hand side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorizationCheck {
    /// `sum over tuples of prod_j g(A_j)`, divided by `n^(r (T-1))`.
    #[serde(with = "rational")]
    pub tuple_sum: ExactRational,
    /// `prod_j (sum_{|A|=p_j} g(A) / n^(T-1))`.
    #[serde(with = "rational")]
    pub norm_product: ExactRational,
    pub equal: bool,
}

/// Enumerates every tuple for the summed form and compares it with the
/// product of single-slot sums.
pub fn factorization_identity_check(params: &Params, p: &[usize]) -> Result<FactorizationCheck> {
    check_sizes(params, p)?;
    let t = params.subsets();
    let domains: Vec<Vec<BigInt>> = p
        .iter()
        .map(|&pj| {
            iterate_k_subsets(t, pj)?
                .map(|a| g_single(params, &a))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    // Literal walk over the product of the slot domains.
    let mut sum = BigInt::zero();
    let mut cursor = vec![0usize; p.len()];
    'outer: loop {
        sum += cursor
            .iter()
            .zip(&domains)
            .fold(BigInt::one(), |acc, (&c, d)| acc * &d[c]);
        let mut slot = p.len();
        loop {
            if slot == 0 {
                break 'outer;
            }
            slot -= 1;
            cursor[slot] += 1;
            if cursor[slot] < domains[slot].len() {
                break;
            }
            cursor[slot] = 0;
        }
    }
    let scale = BigInt::from(params.n()).pow((p.len() * (t - 1)) as u32);
    let tuple_sum = BigRational::new(sum, scale);

    let norm_product: ExactRational = p
        .iter()
        .map(|&pj| single_norm(params, pj))
        .product::<Result<ExactRational>>()?;
    Ok(FactorizationCheck {
        equal: tuple_sum == norm_product,
        tuple_sum,
        norm_product,
    })
}

/// How subset-size vectors `m` are generated for each `(n, T)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MPolicy {
    /// `m_i = m` for every `m` in range.
    Uniform,
    /// Every non-decreasing vector. The norms are invariant under permuting
    /// the `m_i`, so this covers every mixed vector up to order.
    Mixed,
    /// Every ordered vector.
    MixedOrdered,
    /// A single given vector, used when `T` equals its length.
    Fixed(Vec<u64>),
}

/// How size vectors `p` are generated for each `(T, r)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PPolicy {
    AllEqual,
    /// `max - min <= 1`.
    Proximity1,
    /// `max - min <= max(1, r - 2)`.
    Relaxed,
    Unconstrained,
    /// A single given vector, used when `r` equals its length.
    Fixed(Vec<usize>),
}

/// A finite grid of `(params, p)` points to test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: RangeInclusive<u64>,
    pub t: RangeInclusive<usize>,
    pub r: RangeInclusive<usize>,
    pub m_policy: MPolicy,
    pub p_policy: PPolicy,
    /// Admit `m_i = n` in generated vectors (default excludes it).
    #[serde(default)]
    pub include_full: bool,
    pub class_filter: ProximityClass,
}

/// One point of a grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridPoint {
    pub params: Params,
    pub p: Vec<usize>,
}

/// All vectors in `[lo, hi]^len`, lexicographic; non-decreasing only if
/// `sorted`.
fn vectors<T: Copy + PartialOrd + std::ops::Add<Output = T> + From<u8>>(
    lo: T,
    hi: T,
    len: usize,
    sorted: bool,
) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    if lo > hi {
        return out;
    }
    let mut current = vec![lo; len];
    loop {
        out.push(current.clone());
        let mut j = len;
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            if current[j] < hi {
                current[j] = current[j] + T::from(1);
                let reset = if sorted { current[j] } else { lo };
                for slot in current[j + 1..].iter_mut() {
                    *slot = reset;
                }
                break;
            }
        }
    }
}

impl GridSpec {
    fn m_vectors(&self, n: u64, t: usize) -> Vec<Vec<u64>> {
        let hi = if self.include_full { n } else { n - 1 };
        match &self.m_policy {
            MPolicy::Uniform => (1..=hi).map(|m| vec![m; t]).collect(),
            MPolicy::Mixed => vectors(1, hi, t, true),
            MPolicy::MixedOrdered => vectors(1, hi, t, false),
            MPolicy::Fixed(m) if m.len() == t => vec![m.clone()],
            MPolicy::Fixed(_) => Vec::new(),
        }
    }

    fn p_vectors(&self, t: usize, r: usize) -> Vec<Vec<usize>> {
        let all = || vectors(0usize, t, r, false);
        let candidates = match &self.p_policy {
            PPolicy::AllEqual => (0..=t).map(|q| vec![q; r]).collect(),
            PPolicy::Proximity1 => all()
                .into_iter()
                .filter(|p| ProximityClass::Conservative.admits(p))
                .collect(),
            PPolicy::Relaxed => all()
                .into_iter()
                .filter(|p| ProximityClass::Relaxed.admits(p))
                .collect(),
            PPolicy::Unconstrained => all(),
            PPolicy::Fixed(p) if p.len() == r && p.iter().all(|&q| q <= t) => vec![p.clone()],
            PPolicy::Fixed(_) => Vec::new(),
        };
        candidates
            .into_iter()
            .filter(|p| self.class_filter.admits(p))
            .collect()
    }

    /// Grid points in deterministic order: `n`, then `T`, then `m`, then
    /// `r`, then `p`. Points with `r > n` are skipped.
    pub fn points(&self) -> impl Iterator<Item = GridPoint> + Send + '_ {
        self.n.clone().filter(|&n| n >= 1).flat_map(move |n| {
            self.t.clone().filter(|&t| t >= 1).flat_map(move |t| {
                self.m_vectors(n, t).into_iter().flat_map(move |m| {
                    let params = Params::new(n, m).expect("generated within bounds");
                    self.r
                        .clone()
                        .filter(move |&r| r as u64 <= n)
                        .flat_map(move |r| self.p_vectors(t, r))
                        .map(move |p| GridPoint { params: params.clone(), p })
                })
            })
        })
    }
}

/// Holds and violations per proximity class.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassTally {
    pub holds: u64,
    pub violations: u64,
}

/// Running totals over a sweep.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSummary {
    pub total: u64,
    pub holds: u64,
    pub violations: u64,
    pub by_class: BTreeMap<ProximityClass, ClassTally>,
    /// The verdict with the smallest margin seen.
    pub tightest: Option<InequalityVerdict>,
}

impl GridSummary {
    pub fn record(&mut self, verdict: &InequalityVerdict) {
        self.total += 1;
        let tally = self.by_class.entry(verdict.class).or_default();
        if verdict.holds {
            self.holds += 1;
            tally.holds += 1;
        } else {
            self.violations += 1;
            tally.violations += 1;
        }
        if self.tightest.as_ref().is_none_or(|best| verdict.margin < best.margin) {
            self.tightest = Some(verdict.clone());
        }
    }
}

const BATCH: usize = 512;

/// Lazily evaluated sweep. Each batch of points is evaluated in parallel and
/// yielded in grid order.
pub struct GridSearch<'a> {
    points: std::iter::Peekable<Box<dyn Iterator<Item = GridPoint> + Send + 'a>>,
    ready: VecDeque<Result<InequalityVerdict>>,
    summary: GridSummary,
}

impl GridSearch<'_> {
    pub fn summary(&self) -> &GridSummary {
        &self.summary
    }

    pub fn into_summary(self) -> GridSummary {
        self.summary
    }

    fn refill(&mut self) {
        let batch: Vec<GridPoint> = self.points.by_ref().take(BATCH).collect();
        let results: Vec<Result<InequalityVerdict>> = batch
            .par_iter()
            .map(|pt| {
                check_sizes(&pt.params, &pt.p)?;
                let singles = single_norms(&pt.params)?;
                verdict_from(&pt.params, &pt.p, &singles)
            })
            .collect();
        self.ready.extend(results);
    }
}

impl Iterator for GridSearch<'_> {
    type Item = Result<InequalityVerdict>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.ready.is_empty() {
            self.refill();
        }
        let item = self.ready.pop_front()?;
        if let Ok(verdict) = &item {
            self.summary.record(verdict);
        }
        Some(item)
    }
}

/// Starts a sweep over `spec`; fails if the grid has no points.
pub fn grid_search(spec: &GridSpec) -> Result<GridSearch<'_>> {
    let boxed: Box<dyn Iterator<Item = GridPoint> + Send + '_> = Box::new(spec.points());
    let mut points = boxed.peekable();
    if points.peek().is_none() {
        return Err(MaoError::EmptyGrid);
    }
    Ok(GridSearch { points, ready: VecDeque::new(), summary: GridSummary::default() })
}

/// Runs a sweep to completion, collecting every verdict.
pub fn run_grid(spec: &GridSpec) -> Result<(Vec<InequalityVerdict>, GridSummary)> {
    let mut search = grid_search(spec)?;
    let verdicts = search.by_ref().collect::<Result<Vec<_>>>()?;
    Ok((verdicts, search.into_summary()))
}

/// CSV row for a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRow {
    pub n: u64,
    #[serde(rename = "T")]
    pub t: usize,
    pub r: usize,
    /// `m_1;m_2;...`
    pub m: String,
    /// `p_1;p_2;...`
    pub p: String,
    pub class: ProximityClass,
    /// `num/den`
    pub lhs: String,
    pub rhs: String,
    pub margin_num: String,
    pub margin_den: String,
    pub holds: bool,
    pub margin_approx: String,
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}

impl From<&InequalityVerdict> for VerdictRow {
    fn from(v: &InequalityVerdict) -> Self {
        Self {
            n: v.params.n(),
            t: v.params.subsets(),
            r: v.p.len(),
            m: join(v.params.m()),
            p: join(&v.p),
            class: v.class,
            lhs: fraction_string(&v.lhs),
            rhs: fraction_string(&v.rhs),
            margin_num: v.margin.numer().to_string(),
            margin_den: v.margin.denom().to_string(),
            holds: v.holds,
            margin_approx: v.margin_decimal(),
        }
    }
}

/// Both sides of a scalar reduction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedComparison {
    #[serde(with = "rational")]
    pub lhs: ExactRational,
    #[serde(with = "rational")]
    pub rhs: ExactRational,
    pub holds: bool,
}

impl ReducedComparison {
    fn new(lhs: ExactRational, rhs: ExactRational) -> Self {
        Self { holds: lhs >= rhs, lhs, rhs }
    }
}

fn frac(a: i64, b: i64) -> ExactRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn one_minus_inverse(x: u64) -> ExactRational {
    frac(x as i64 - 1, x as i64)
}

/// For `r = 2` and `p = (T, T)` only `A = B = [T]` contributes, and the
/// inequality reduces to `(1 - 1/n)^(T-1) >= prod_i (1 - 1/m_i)`.
pub fn reduction_p_eq_t(params: &Params) -> Result<ReducedComparison> {
    if params.n() < 2 {
        return Err(MaoError::Inadmissible("the p = T reduction needs n > 1".into()));
    }
    let t = params.subsets();
    let lhs = num_traits::pow(one_minus_inverse(params.n()), t - 1);
    let rhs = params.m().iter().map(|&mi| one_minus_inverse(mi)).product();
    Ok(ReducedComparison::new(lhs, rhs))
}

/// For `r = 2`, `p = (T-1, T-1)` and every `m_i = m`:
///
/// ```text
/// (1 - 1/n)^(T-1) T (n-m)/m  >=  ((m-1)/m)^(T-1) ((n-m-1)/m + (T-1)(n-m)/(m-1))
/// ```
pub fn reduction_p_eq_t_minus1_uniform(n: u64, m: u64, t: usize) -> Result<ReducedComparison> {
    if m < 2 || m >= n || t < 1 {
        return Err(MaoError::Inadmissible(format!(
            "the p = T - 1 reduction needs 2 <= m < n and T >= 1 (n = {n}, m = {m}, T = {t})"
        )));
    }
    if t == 1 && n < m + 2 {
        return Err(MaoError::Inadmissible(format!(
            "with T = 1 the p = T - 1 reduction needs n >= m + 2 (n = {n}, m = {m})"
        )));
    }
    let (ni, mi, ti) = (n as i64, m as i64, t as i64);
    let lhs = num_traits::pow(one_minus_inverse(n), t - 1) * frac(ti * (ni - mi), mi);
    let rhs = num_traits::pow(one_minus_inverse(m), t - 1)
        * (frac(ni - mi - 1, mi) + frac((ti - 1) * (ni - mi), mi - 1));
    Ok(ReducedComparison::new(lhs, rhs))
}

/// Smallest `n` for which the uniform `p = T - 1` ratios are defined:
/// `m + 1` when `T >= 2`, `m + 2` when `T = 1`.
pub fn minimal_admissible_n(m: u64, t: usize) -> u64 {
    if t >= 2 {
        m + 1
    } else {
        m + 2
    }
}

/// `A = (n-m-1)/m`, `B = (n-m)/(m-1)`.
fn a_b(n: u64, m: u64) -> (ExactRational, ExactRational) {
    let (ni, mi) = (n as i64, m as i64);
    (frac(ni - mi - 1, mi), frac(ni - mi, mi - 1))
}

/// `L(T) = (1 - 1/n)^(T-1) T^2 (n-m)^2 / m^2`.
pub fn induction_lhs(n: u64, m: u64, t: usize) -> ExactRational {
    let (ni, mi, ti) = (n as i64, m as i64, t as i64);
    num_traits::pow(one_minus_inverse(n), t - 1) * frac(ti * ti * (ni - mi) * (ni - mi), mi * mi)
}

/// `R(T) = (1 - 1/m)^T T (n-m)/(m-1) (A + (T-1) B)`.
pub fn induction_rhs(n: u64, m: u64, t: usize) -> ExactRational {
    let (ni, mi, ti) = (n as i64, m as i64, t as i64);
    let (a, b) = a_b(n, m);
    num_traits::pow(one_minus_inverse(m), t)
        * frac(ti * (ni - mi), mi - 1)
        * (a + b * BigInt::from(ti - 1))
}

/// The two sides of the auxiliary inequality that a ratio step must satisfy,
/// `(1 - 1/n) (T+1)/T  >=  (1 - 1/m) (A + T B) / (A + (T-1) B)`.
pub fn auxiliary_sides(n: u64, m: u64, t: usize) -> (ExactRational, ExactRational) {
    let (a, b) = a_b(n, m);
    let ti = t as i64;
    let lhs = one_minus_inverse(n) * frac(ti + 1, ti);
    let rhs = one_minus_inverse(m) * (&a + &b * BigInt::from(ti))
        / (&a + &b * BigInt::from(ti - 1));
    (lhs, rhs)
}

/// One row of the induction audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InductionRow {
    pub m: u64,
    pub t: usize,
    pub n: u64,
    /// `L(T+1) / L(T)`.
    #[serde(with = "rational")]
    pub lhs_ratio: ExactRational,
    /// `R(T+1) / R(T)`.
    #[serde(with = "rational")]
    pub rhs_ratio: ExactRational,
    /// `lhs_ratio >= rhs_ratio`.
    pub ok: bool,
    /// The step condition with `(T+1)^2 / T^2` on the left in place of
    /// `(T+1)/T`, the form the minimal-`n` case analysis evaluates.
    pub squared_form_ok: bool,
    /// `L(T) >= R(T)` and `L(T+1) >= R(T+1)` evaluated directly.
    pub endpoints_hold: bool,
}

/// Monotonicity in `n` of the auxiliary sides for fixed `(m, T)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotonicityRow {
    pub m: u64,
    pub t: usize,
    pub ns: Vec<u64>,
    pub lhs_non_decreasing: bool,
    pub rhs_non_increasing: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InductionAudit {
    pub rows: Vec<InductionRow>,
    pub monotonicity: Vec<MonotonicityRow>,
}

impl InductionAudit {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.ok)
    }

    pub fn monotone(&self) -> bool {
        self.monotonicity
            .iter()
            .all(|r| r.lhs_non_decreasing && r.rhs_non_increasing)
    }
}

/// One induction-step row at `(m, T, n)`.
pub fn induction_step(m: u64, t: usize, n: u64) -> Result<InductionRow> {
    if m < 2 || t < 1 {
        return Err(MaoError::Inadmissible(format!(
            "induction audit needs m >= 2 and T >= 1 (m = {m}, T = {t})"
        )));
    }
    let floor = minimal_admissible_n(m, t);
    if n < floor {
        return Err(MaoError::Inadmissible(format!(
            "n = {n} is below the minimal admissible n = {floor} for m = {m}, T = {t}"
        )));
    }
    let (l0, l1) = (induction_lhs(n, m, t), induction_lhs(n, m, t + 1));
    let (r0, r1) = (induction_rhs(n, m, t), induction_rhs(n, m, t + 1));
    let lhs_ratio = &l1 / &l0;
    let rhs_ratio = &r1 / &r0;
    let (_, aux_rhs) = auxiliary_sides(n, m, t);
    let ti = t as i64;
    let squared_lhs = one_minus_inverse(n) * frac((ti + 1) * (ti + 1), ti * ti);
    Ok(InductionRow {
        m,
        t,
        n,
        ok: lhs_ratio >= rhs_ratio,
        squared_form_ok: squared_lhs >= aux_rhs,
        endpoints_hold: l0 >= r0 && l1 >= r1,
        lhs_ratio,
        rhs_ratio,
    })
}

/// Audits the ratio step `L(T+1)/L(T) >= R(T+1)/R(T)` for each `T` in
/// `ts`, at the minimal admissible `n` and at each `n = m + offset` that is
/// admissible, and checks that the auxiliary sides move monotonically in
/// `n` across those samples.
pub fn induction_step_audit(
    m: u64,
    ts: RangeInclusive<usize>,
    offsets: &[u64],
) -> Result<InductionAudit> {
    let mut rows = Vec::new();
    let mut monotonicity = Vec::new();
    for t in ts {
        let floor = minimal_admissible_n(m, t);
        let mut ns = vec![floor];
        ns.extend(offsets.iter().map(|&o| m + o).filter(|&n| n > floor));
        ns.sort_unstable();
        ns.dedup();
        for &n in &ns {
            rows.push(induction_step(m, t, n)?);
        }
        let sides: Vec<_> = ns.iter().map(|&n| auxiliary_sides(n, m, t)).collect();
        monotonicity.push(MonotonicityRow {
            m,
            t,
            lhs_non_decreasing: sides.windows(2).all(|w| w[0].0 <= w[1].0),
            rhs_non_increasing: sides.windows(2).all(|w| w[0].1 >= w[1].1),
            ns,
        });
    }
    Ok(InductionAudit { rows, monotonicity })
}

/// `f(T) = (T+1)^2 (T-1) / T^3`.
pub fn step4_f(t: u64) -> ExactRational {
    let ti = t as i64;
    frac((ti + 1) * (ti + 1) * (ti - 1), ti * ti * ti)
}

/// `f(T) >= 1 - 1/m^2`, the minimal-`n` condition for `T >= 2`.
pub fn step4_holds(m: u64, t: u64) -> bool {
    let mi = m as i64;
    step4_f(t) >= BigRational::one() - frac(1, mi * mi)
}

/// `4m(m+1) - (3m-1)(m+2)`, which equals `m^2 - m + 2`.
pub fn step5_gap(m: u64) -> BigInt {
    let mi = BigInt::from(m);
    BigInt::from(4) * &mi * (&mi + 1) - (BigInt::from(3) * &mi - 1) * (&mi + 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_and_admit() {
        assert_eq!(ProximityClass::classify(&[2, 2]), ProximityClass::Conservative);
        assert_eq!(ProximityClass::classify(&[2, 3, 3]), ProximityClass::Conservative);
        assert_eq!(ProximityClass::classify(&[1, 3]), ProximityClass::Unconstrained);
        assert_eq!(ProximityClass::classify(&[1, 3, 2, 2]), ProximityClass::Relaxed);
        assert_eq!(ProximityClass::classify(&[1, 4, 2, 2]), ProximityClass::Unconstrained);
        assert_eq!(ProximityClass::classify(&[]), ProximityClass::Conservative);
        // r <= 3: relaxed coincides with conservative
        for p in [[0usize, 2], [1, 3]] {
            assert!(!ProximityClass::Relaxed.admits(&p));
        }
        assert!(ProximityClass::Relaxed.admits(&[0, 1, 1]));
        assert!(ProximityClass::Relaxed.admits(&[0, 2, 1, 1]));
        assert!(ProximityClass::Unconstrained.admits(&[0, 9]));
        assert_eq!("relaxed".parse::<ProximityClass>(), Ok(ProximityClass::Relaxed));
        assert!("loose".parse::<ProximityClass>().is_err());
    }

    #[test]
    fn check_examples() {
        let p = Params::new(10, vec![3, 4]).unwrap();
        let v = check_inequality(&p, &[2, 2]).unwrap();
        assert_eq!(v.lhs, frac(36, 25));
        assert_eq!(v.rhs, frac(4, 5));
        assert_eq!(v.margin, frac(16, 25));
        assert!(v.holds);
        assert_eq!(v.class, ProximityClass::Conservative);

        let q = Params::new(5, vec![2, 3]).unwrap();
        let v = check_inequality(&q, &[1, 1]).unwrap();
        assert_eq!(v.lhs, frac(169, 25));
        assert_eq!(v.rhs, frac(28, 5));
        assert_eq!(v.margin, frac(29, 25));

        let tiny = Params::new(2, vec![1, 1]).unwrap();
        let v = check_inequality(&tiny, &[2, 2]).unwrap();
        assert_eq!(v.rhs, BigRational::zero());
        assert!(v.holds);
        assert!(check_inequality(&tiny, &[1, 1, 1]).is_err());
        assert!(check_inequality(&tiny, &[3]).is_err());
    }

    #[test]
    fn factorization_examples() {
        let p = Params::new(5, vec![2, 3]).unwrap();
        let c = factorization_identity_check(&p, &[1, 1]).unwrap();
        assert!(c.equal);
        assert_eq!(c.tuple_sum, frac(169, 25));
        let q = Params::new(7, vec![2, 3, 5]).unwrap();
        assert!(factorization_identity_check(&q, &[1, 2]).unwrap().equal);
        assert!(factorization_identity_check(&q, &[3]).unwrap().equal);
        assert!(factorization_identity_check(&q, &[]).unwrap().equal);
    }

    fn single_point_grid() -> GridSpec {
        GridSpec {
            n: 10..=10,
            t: 2..=2,
            r: 2..=2,
            m_policy: MPolicy::Fixed(vec![3, 4]),
            p_policy: PPolicy::Fixed(vec![2, 2]),
            include_full: false,
            class_filter: ProximityClass::Unconstrained,
        }
    }

    #[test]
    fn grid_single_point() {
        let spec = single_point_grid();
        let (verdicts, summary) = run_grid(&spec).unwrap();
        assert_eq!(verdicts.len(), 1);
        assert_eq!(verdicts[0], check_inequality(&Params::new(10, vec![3, 4]).unwrap(), &[2, 2]).unwrap());
        assert_eq!(summary.total, 1);
        assert_eq!(summary.violations, 0);
    }

    #[test]
    fn empty_grid_is_rejected() {
        let mut spec = single_point_grid();
        spec.t = 3..=3;
        assert!(matches!(grid_search(&spec), Err(MaoError::EmptyGrid)));
    }

    #[test]
    fn unconstrained_grid_labels_points() {
        let spec = GridSpec {
            n: 4..=5,
            t: 1..=3,
            r: 2..=2,
            m_policy: MPolicy::Mixed,
            p_policy: PPolicy::Unconstrained,
            include_full: false,
            class_filter: ProximityClass::Unconstrained,
        };
        let (verdicts, summary) = run_grid(&spec).unwrap();
        assert!(verdicts.iter().any(|v| v.class == ProximityClass::Unconstrained));
        assert!(verdicts.iter().all(|v| v.class == ProximityClass::classify(&v.p)));
        assert_eq!(summary.total as usize, verdicts.len());
        let tally: u64 = summary.by_class.values().map(|c| c.holds + c.violations).sum();
        assert_eq!(tally, summary.total);
        // order is the generation order
        let again: Vec<_> = spec.points().collect();
        assert!(verdicts.iter().zip(&again).all(|(v, pt)| v.params == pt.params && v.p == pt.p));
    }

    #[test]
    fn grid_generation_counts() {
        let spec = GridSpec {
            n: 4..=4,
            t: 3..=3,
            r: 3..=3,
            m_policy: MPolicy::MixedOrdered,
            p_policy: PPolicy::Proximity1,
            include_full: false,
            class_filter: ProximityClass::Conservative,
        };
        // 3^3 ordered m-vectors; p in {0..3}^3 with spread <= 1: 4 + 3 * 6
        assert_eq!(spec.points().count(), 27 * 22);
        let sorted = GridSpec { m_policy: MPolicy::Mixed, ..spec.clone() };
        assert_eq!(sorted.points().count(), 10 * 22);
        let full = GridSpec { include_full: true, m_policy: MPolicy::Uniform, ..spec };
        assert_eq!(full.points().count(), 4 * 22);
    }

    #[test]
    fn verdict_row_columns() {
        let v = check_inequality(&Params::new(10, vec![3, 4]).unwrap(), &[2, 2]).unwrap();
        let row = VerdictRow::from(&v);
        assert_eq!(row.m, "3;4");
        assert_eq!(row.lhs, "36/25");
        assert_eq!(row.margin_num, "16");
        assert_eq!(row.margin_den, "25");
        assert_eq!(row.margin_approx, "6.40000000000e-1");
    }

    #[test]
    fn reduction_p_eq_t_examples() {
        let p = Params::new(10, vec![3, 4]).unwrap();
        let red = reduction_p_eq_t(&p).unwrap();
        assert_eq!(red.lhs, frac(9, 10));
        assert_eq!(red.rhs, frac(1, 2));
        assert!(red.holds);
        assert_eq!(red.holds, check_inequality(&p, &[2, 2]).unwrap().holds);

        let q = Params::new(2, vec![2]).unwrap();
        let red = reduction_p_eq_t(&q).unwrap();
        assert_eq!(red.lhs, frac(1, 1));
        assert_eq!(red.rhs, frac(1, 2));
        assert!(red.holds);
        assert!(reduction_p_eq_t(&Params::new(1, vec![1]).unwrap()).is_err());
    }

    #[test]
    fn reduction_p_eq_t_minus1_examples() {
        let red = reduction_p_eq_t_minus1_uniform(10, 4, 3).unwrap();
        assert!(red.holds);
        let p = Params::uniform(10, 4, 3).unwrap();
        assert_eq!(red.holds, check_inequality(&p, &[2, 2]).unwrap().holds);
        for m in 2..8 {
            for t in 2..6 {
                assert!(reduction_p_eq_t_minus1_uniform(m + 1, m, t).unwrap().holds);
            }
            assert!(reduction_p_eq_t_minus1_uniform(m + 2, m, 1).unwrap().holds);
        }
        assert!(reduction_p_eq_t_minus1_uniform(5, 4, 1).is_err());
        assert!(reduction_p_eq_t_minus1_uniform(5, 1, 2).is_err());
        assert!(reduction_p_eq_t_minus1_uniform(5, 5, 2).is_err());
    }

    #[test]
    fn reduced_scalar_ratio_matches_norm_ratio() {
        // the reduction divides both sides by the same positive quantity
        for (n, m, t) in [(6u64, 2u64, 3usize), (9, 4, 2), (7, 5, 4), (8, 3, 1)] {
            let p = Params::uniform(n, m, t).unwrap();
            let v = check_inequality(&p, &[t - 1, t - 1]).unwrap();
            let red = reduction_p_eq_t_minus1_uniform(n, m, t).unwrap();
            assert_eq!(&v.lhs / &v.rhs, &red.lhs / &red.rhs, "n={n} m={m} T={t}");
        }
    }

    #[test]
    fn step_constants() {
        assert_eq!(step4_f(2), frac(9, 8));
        for m in 2..=100 {
            let gap = step5_gap(m);
            let mi = BigInt::from(m);
            assert_eq!(gap, &mi * &mi - &mi + 2);
            assert!(gap > BigInt::zero());
        }
        assert!(step4_holds(5, 2));
    }

    #[test]
    fn induction_rows_at_sample_points() {
        let row = induction_step(2, 2, 3).unwrap();
        assert!(row.ok);
        assert!(row.squared_form_ok);
        let row = induction_step(4, 5, 20).unwrap();
        assert!(row.ok);
        assert!(row.endpoints_hold);
        assert!(induction_step(3, 1, 4).is_err());
        assert!(induction_step(1, 2, 5).is_err());
    }

    #[test]
    fn ratio_step_at_minimal_n_reduces_to_t_vs_m() {
        // with A = 0 the ratio step reads m^2 (T^2 - 1) >= (m^2 - 1) T^2,
        // i.e. T >= m
        for m in 2..=8u64 {
            for t in 2..=8usize {
                let row = induction_step(m, t, m + 1).unwrap();
                assert_eq!(row.ok, t as u64 >= m, "m={m} T={t}");
                assert!(row.squared_form_ok);
                assert!(row.endpoints_hold);
            }
        }
    }

    #[test]
    fn auxiliary_sides_are_monotone_in_n() {
        let audit = induction_step_audit(5, 1..=6, &[3, 10, 25, 100]).unwrap();
        assert!(audit.monotone());
    }
}
