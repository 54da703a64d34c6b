//! Raw moments of the occupancy counts `x_{=t}` and `x_{>=t}`.
//!
//! The `i`-th factorial moment `E[(x)_i]` is the MAO norm of `i` identical
//! slots (each admitting size `t`, or every size in `[t, T]`), and raw
//! moments follow by the Stirling expansion
//! `E[x^v] = sum_i S(v, i) E[(x)_i]`.

use std::collections::{BTreeSet, HashMap};
use std::sync::Mutex;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{stirling2, ExactRational};
use crate::error::{MaoError, Result};
use crate::mao::{mao_norm, Params, SizeSpec};
use crate::report::{rational, rational_vec};

/// Which occupancy count is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMode {
    /// Elements covered exactly `t` times.
    Exactly,
    /// Elements covered at least `t` times.
    AtLeast,
}

impl TailMode {
    /// Coverage counts that make an element count toward `x`.
    pub fn admitted(self, t: usize, subsets: usize) -> BTreeSet<usize> {
        match self {
            TailMode::Exactly => BTreeSet::from([t]),
            TailMode::AtLeast => (t..=subsets).collect(),
        }
    }

    pub fn admits(self, coverage: usize, t: usize) -> bool {
        match self {
            TailMode::Exactly => coverage == t,
            TailMode::AtLeast => coverage >= t,
        }
    }
}

pub(crate) fn check_threshold(params: &Params, t: usize) -> Result<()> {
    if t < 1 || t > params.subsets() {
        return Err(MaoError::ThresholdOutOfRange { t, max: params.subsets() });
    }
    Ok(())
}

/// Size specification with `i` identical slots for the given threshold.
pub fn factorial_moment_spec(params: &Params, t: usize, mode: TailMode, i: usize) -> SizeSpec {
    match mode {
        TailMode::Exactly => SizeSpec::Fixed(vec![t; i]),
        TailMode::AtLeast => SizeSpec::BSets(vec![mode.admitted(t, params.subsets()); i]),
    }
}

/// Memo of MAO norms keyed by instance and size specification.
///
/// Shared across threads; a hit returns exactly what a fresh computation
/// would.
#[derive(Debug, Default)]
pub struct NormCache {
    entries: Mutex<HashMap<(Params, SizeSpec), ExactRational>>,
}

impl NormCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn norm(&self, params: &Params, spec: &SizeSpec) -> Result<ExactRational> {
        let key = (params.clone(), spec.clone());
        if let Some(hit) = self.lock().get(&key) {
            return Ok(hit.clone());
        }
        let value = mao_norm(params, spec)?;
        self.lock().insert(key, value.clone());
        Ok(value)
    }

    pub fn len(&self) -> usize {
        self.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, HashMap<(Params, SizeSpec), ExactRational>> {
        self.entries.lock().unwrap_or_else(|e| e.into_inner())
    }
}

/// `E[(x)_i]`, the `i`-th factorial moment.
pub fn factorial_moment(
    cache: &NormCache,
    params: &Params,
    t: usize,
    mode: TailMode,
    i: usize,
) -> Result<ExactRational> {
    check_threshold(params, t)?;
    cache.norm(params, &factorial_moment_spec(params, t, mode, i))
}

/// `E[x^v]`, drawing factorial moments from `cache`.
pub fn raw_moment_cached(
    cache: &NormCache,
    params: &Params,
    t: usize,
    mode: TailMode,
    v: usize,
) -> Result<ExactRational> {
    check_threshold(params, t)?;
    if v == 0 {
        return Err(MaoError::InvalidOrder { order: 0, min: 1 });
    }
    if v as u64 > params.n() {
        return Err(MaoError::DegenerateDenominator { r: v, n: params.n() });
    }
    let mut total = BigRational::zero();
    for i in 1..=v {
        let weight = BigRational::from_integer(stirling2(v, i)?);
        total += weight * factorial_moment(cache, params, t, mode, i)?;
    }
    Ok(total)
}

/// `E[x^v]` for `x = x_{=t}` or `x_{>=t}`.
pub fn raw_moment(params: &Params, t: usize, mode: TailMode, v: usize) -> Result<ExactRational> {
    raw_moment_cached(&NormCache::new(), params, t, mode, v)
}

/// Raw moments up to some order together with mean, variance and
/// `Delta_EV = E(x) - Var(x)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentReport {
    pub params: Params,
    pub t: usize,
    pub mode: TailMode,
    /// `raw_moments[v - 1] = E[x^v]`.
    #[serde(with = "rational_vec")]
    pub raw_moments: Vec<ExactRational>,
    #[serde(with = "rational")]
    pub mean: ExactRational,
    #[serde(with = "rational")]
    pub variance: ExactRational,
    #[serde(with = "rational")]
    pub delta_ev: ExactRational,
}

impl MomentReport {
    pub fn raw_moment(&self, v: usize) -> Option<&ExactRational> {
        v.checked_sub(1).and_then(|i| self.raw_moments.get(i))
    }
}

/// Moment report sharing one norm cache across all orders.
///
/// The second moment is always computed so the variance is defined, even
/// when `max_order == 1`.
pub fn moment_report_with(
    cache: &NormCache,
    params: &Params,
    t: usize,
    mode: TailMode,
    max_order: usize,
) -> Result<MomentReport> {
    if max_order == 0 {
        return Err(MaoError::InvalidOrder { order: 0, min: 1 });
    }
    let orders = max_order.max(2);
    let all = (1..=orders)
        .map(|v| raw_moment_cached(cache, params, t, mode, v))
        .collect::<Result<Vec<_>>>()?;
    let mean = all[0].clone();
    let variance = &all[1] - &mean * &mean;
    let delta_ev = &mean - &variance;
    Ok(MomentReport {
        params: params.clone(),
        t,
        mode,
        raw_moments: all[..max_order].to_vec(),
        mean,
        variance,
        delta_ev,
    })
}

pub fn moment_report(
    params: &Params,
    t: usize,
    mode: TailMode,
    max_order: usize,
) -> Result<MomentReport> {
    moment_report_with(&NormCache::new(), params, t, mode, max_order)
}

/// Outcome of checking `Delta_EV > 0` and `Delta_EV <= 2 E(x)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaEvVerdict {
    pub holds_positive: bool,
    pub holds_upper: bool,
}

pub fn delta_ev_bound_check(report: &MomentReport) -> Result<DeltaEvVerdict> {
    if report.mean.is_zero() {
        return Err(MaoError::ZeroMean);
    }
    let bound = BigRational::from_integer(2.into()) * &report.mean * &report.mean;
    Ok(DeltaEvVerdict {
        holds_positive: report.delta_ev.is_positive(),
        holds_upper: report.delta_ev <= bound,
    })
}
