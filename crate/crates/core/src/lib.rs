//! Exact computation of multi-set allocation occupancy (MAO) quantities.
//!
//! Draw `T` independent uniform subsets of sizes `m_1, ..., m_T` from an
//! `n`-element population and count the elements covered exactly `t` times
//! (`x_{=t}`) or at least `t` times (`x_{>=t}`). This crate evaluates, in
//! exact rational arithmetic:
//!
//! * the MAO function `g(A_1, ..., A_r)` and its transversal sums
//!   ([`mao`]), by enumeration and by dynamic programming;
//! * every raw moment of `x_{=t}` and `x_{>=t}` through the MAO norms and
//!   Stirling numbers of the second kind ([`moments`]);
//! * the product-of-norms inequality on single instances and over grids,
//!   plus its scalar reductions ([`inequality`]);
//! * an exhaustive enumerator and a reproducible Monte Carlo sampler that
//!   act as independent ground truth ([`oracle`]).
//!
//! ```
//! use mao_core::{moment_report, Params, TailMode};
//!
//! let params = Params::new(5, vec![2, 3]).unwrap();
//! let report = moment_report(&params, 1, TailMode::Exactly, 2).unwrap();
//! assert_eq!(report.mean.to_string(), "13/5");
//! assert_eq!(report.variance.to_string(), "36/25");
//! ```

pub mod combinatorics;
pub mod error;
pub mod inequality;
pub mod mao;
pub mod moments;
pub mod oracle;
pub mod report;

pub use combinatorics::{
    binomial, falling_factorial, falling_factorial_u64, iterate_k_subsets, stirling2, ExactInt,
    ExactRational, KSubsets,
};
pub use error::{MaoError, Result};
pub use inequality::{
    check_inequality, factorization_identity_check, grid_search, induction_step_audit,
    reduction_p_eq_t, reduction_p_eq_t_minus1_uniform, run_grid, GridSpec, InequalityVerdict,
    MPolicy, PPolicy, ProximityClass,
};
pub use mao::{
    g_multi, g_power, g_single, mao_norm, multiplicity_vector, transversal_sum_dp,
    transversal_sum_naive, Params, SizeSpec,
};
pub use moments::{
    delta_ev_bound_check, moment_report, raw_moment, MomentReport, NormCache, TailMode,
};
pub use oracle::{
    compare_report, exhaustive_pmf, monte_carlo, EmpiricalMoments, ExactPmf, OracleKind,
};
