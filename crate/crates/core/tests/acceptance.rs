//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use mao_core::inequality::{
    induction_step_audit, minimal_admissible_n, step4_f, step5_gap, MPolicy, PPolicy,
};
use mao_core::moments::{moment_report_with, NormCache};
use mao_core::oracle::{exhaustive_pmf, monte_carlo, DEFAULT_BUDGET};
use mao_core::{
    check_inequality, delta_ev_bound_check, factorization_identity_check, raw_moment,
    reduction_p_eq_t, reduction_p_eq_t_minus1_uniform, run_grid, stirling2, transversal_sum_dp,
    transversal_sum_naive, GridSpec, MaoError, Params, ProximityClass, SizeSpec, TailMode,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Every ordered vector in `[1, hi]^len`.
fn m_vectors(hi: u64, len: usize) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v| {
                (1..=hi).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Instances for criteria 2 and 3.
fn oracle_family() -> Vec<Params> {
    let mut out = Vec::new();
    for n in 2..=6u64 {
        for t in 1..=3usize {
            for m in m_vectors(n - 1, t) {
                out.push(Params::new(n, m).unwrap());
            }
        }
    }
    out
}

const STIRLING_TABLE: [[u64; 6]; 6] = [
    [1, 0, 0, 0, 0, 0],
    [1, 1, 0, 0, 0, 0],
    [1, 3, 1, 0, 0, 0],
    [1, 7, 6, 1, 0, 0],
    [1, 15, 25, 10, 1, 0],
    [1, 31, 90, 65, 15, 1],
];

fn criterion_1() -> Outcome {
    let mut checked = 0;
    for (v, row) in STIRLING_TABLE.iter().enumerate() {
        for (i, &expected) in row.iter().enumerate().take(v + 1) {
            if stirling2(v + 1, i + 1).unwrap() != BigInt::from(expected) {
                return outcome(false, format!("S({}, {}) mismatch", v + 1, i + 1));
            }
            checked += 1;
        }
    }
    outcome(checked == 21, format!("{checked}/21 entries exact"))
}

fn criterion_2_and_3() -> (Outcome, Outcome) {
    let (mut equal, mut compared, mut skipped, mut mismatches) = (0u64, 0u64, 0u64, Vec::new());
    let (mut corollary_ok, mut corollary_checked, mut corollary_bad) = (0u64, 0u64, Vec::new());
    for params in oracle_family() {
        let cache = NormCache::new();
        for t in 1..=params.subsets() {
            for mode in [TailMode::Exactly, TailMode::AtLeast] {
                let pmf = exhaustive_pmf(&params, t, mode, DEFAULT_BUDGET).unwrap();
                for v in 1..=3usize {
                    match mao_core::moments::raw_moment_cached(&cache, &params, t, mode, v) {
                        Ok(value) => {
                            compared += 1;
                            if value == pmf.raw_moment(v as u32) {
                                equal += 1;
                            } else {
                                mismatches.push(format!("{params:?} t={t} {mode:?} v={v}"));
                            }
                        }
                        // (n)_v = 0: the norm is undefined for this order
                        Err(MaoError::DegenerateDenominator { .. }) => skipped += 1,
                        Err(e) => mismatches.push(format!("{params:?} t={t} v={v}: {e}")),
                    }
                }

                let report = moment_report_with(&cache, &params, t, mode, 2).unwrap();
                if report.mean.is_zero() {
                    continue;
                }
                corollary_checked += 1;
                let verdict = delta_ev_bound_check(&report).unwrap();
                let positive_ok = report.mean == report.variance || verdict.holds_positive;
                if positive_ok && verdict.holds_upper {
                    corollary_ok += 1;
                } else {
                    corollary_bad.push(format!("{params:?} t={t} {mode:?}"));
                }
            }
        }
    }
    let c2 = outcome(
        mismatches.is_empty() && equal == compared,
        format!(
            "{equal}/{compared} moments exactly equal; {skipped} skipped (v > n, (n)_v = 0){}",
            mismatches.first().map(|m| format!("; first mismatch {m}")).unwrap_or_default()
        ),
    );
    let c3 = outcome(
        corollary_bad.is_empty(),
        format!(
            "{corollary_ok}/{corollary_checked} instances with mean > 0 satisfy Delta_EV > 0 (when E != Var) and Delta_EV <= 2 E^2{}",
            corollary_bad.first().map(|m| format!("; first failure {m}")).unwrap_or_default()
        ),
    );
    (c2, c3)
}

fn random_params(rng: &mut ChaCha8Rng, max_t: usize, max_n: u64) -> Params {
    let t = rng.gen_range(1..=max_t);
    let n = rng.gen_range(3..=max_n);
    let m = (0..t).map(|_| rng.gen_range(1..=n)).collect();
    Params::new(n, m).unwrap()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut equal = 0;
    for _ in 0..200 {
        let params = random_params(&mut rng, 8, 12);
        let t = params.subsets();
        let r = rng.gen_range(1..=3usize);
        let p: Vec<usize> = (0..r).map(|_| rng.gen_range(0..=t)).collect();
        if factorization_identity_check(&params, &p).unwrap().equal {
            equal += 1;
        }
    }
    outcome(equal == 200, format!("{equal}/200 randomized instances exactly equal"))
}

fn criterion_5() -> Outcome {
    let mut total = 0;
    let mut violations = 0;
    let mut tightest: Option<(BigRational, String)> = None;
    for m_policy in [MPolicy::Uniform, MPolicy::Mixed] {
        let spec = GridSpec {
            n: 3..=10,
            t: 1..=5,
            r: 2..=3,
            m_policy,
            p_policy: PPolicy::Proximity1,
            include_full: false,
            class_filter: ProximityClass::Conservative,
        };
        let (verdicts, summary) = run_grid(&spec).unwrap();
        total += summary.total;
        violations += summary.violations;
        for v in verdicts.iter().filter(|v| !v.holds) {
            eprintln!("  violation: n={} m={:?} p={:?} margin={}", v.params.n(), v.params.m(), v.p, v.margin);
        }
        if let Some(best) = summary.tightest {
            let label = format!("n={} m={:?} p={:?}", best.params.n(), best.params.m(), best.p);
            if tightest.as_ref().is_none_or(|(m, _)| best.margin < *m) {
                tightest = Some((best.margin, label));
            }
        }
    }
    let (margin, label) = tightest.unwrap();

    // Mixed sweeps one vector per multiset; check sampled orderings agree.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut reordered = 0;
    for _ in 0..300 {
        let n = rng.gen_range(3..=10u64);
        let t = rng.gen_range(2..=5usize);
        let m: Vec<u64> = (0..t).map(|_| rng.gen_range(1..n)).collect();
        let r = rng.gen_range(2..=3usize.min(n as usize));
        let lo = rng.gen_range(0..t);
        let p: Vec<usize> = (0..r).map(|_| lo + rng.gen_range(0..=1usize)).collect();
        let mut sorted = m.clone();
        sorted.sort_unstable();
        let a = check_inequality(&Params::new(n, m).unwrap(), &p).unwrap();
        let b = check_inequality(&Params::new(n, sorted).unwrap(), &p).unwrap();
        reordered += usize::from(a.lhs == b.lhs && a.rhs == b.rhs);
    }

    outcome(
        violations == 0 && total > 0 && reordered == 300,
        format!(
            "{violations} violations over {total} conservative-class points; smallest margin {} at {label}; \
             {reordered}/300 sampled orderings of m give identical sides",
            mao_core::report::decimal12(&margin)
        ),
    )
}

fn criterion_6() -> Vec<(&'static str, Outcome)> {
    // (a) reductions agree with the general check on their embeddings in
    // criterion 5's grid (r = 2 points only).
    let (mut agree, mut embeddings) = (0, 0);
    for n in 3..=10u64 {
        for t in 1..=5usize {
            for m in m_vectors(n - 1, t) {
                let params = Params::new(n, m.clone()).unwrap();
                let full = check_inequality(&params, &[t, t]).unwrap();
                embeddings += 1;
                agree += usize::from(reduction_p_eq_t(&params).unwrap().holds == full.holds);

                let uniform = m.iter().all(|&x| x == m[0]);
                let mi = m[0];
                if uniform && mi >= 2 && (t >= 2 || n >= mi + 2) {
                    let below = check_inequality(&params, &[t - 1, t - 1]).unwrap();
                    embeddings += 1;
                    let red = reduction_p_eq_t_minus1_uniform(n, mi, t).unwrap();
                    agree += usize::from(red.holds == below.holds);
                }
            }
        }
    }
    let reductions = outcome(
        agree == embeddings,
        format!("{agree}/{embeddings} embedding instances agree in truth value"),
    );

    // (b) the constants of the minimal-n cases
    let f2 = step4_f(2);
    let f2_ok = f2 == BigRational::new(9.into(), 8.into()) && f2.to_f64() == Some(1.125);
    let quad_ok = (2..=100u64).all(|m| {
        let gap = step5_gap(m);
        let mi = BigInt::from(m);
        gap == &mi * &mi - &mi + 2 && gap.is_positive()
    });
    let constants = outcome(
        f2_ok && quad_ok,
        format!("f(2) = {f2}; m^2 - m + 2 > 0 and equals 4m(m+1) - (3m-1)(m+2) for m in [2, 100]: {quad_ok}"),
    );

    // (c) ratio step at minimal admissible n and at n = m + 10
    let mut rows = Vec::new();
    let mut monotone = true;
    for m in 2..=10u64 {
        let audit = induction_step_audit(m, 1..=10, &[10]).unwrap();
        monotone &= audit.monotone();
        rows.extend(audit.rows);
    }
    let failing: Vec<_> = rows.iter().filter(|r| !r.ok).collect();
    let at_min = failing.iter().filter(|r| r.n == minimal_admissible_n(r.m, r.t)).count();
    let squared_ok = rows.iter().all(|r| r.squared_form_ok);
    let endpoints_ok = rows.iter().all(|r| r.endpoints_hold);
    let sample = failing
        .first()
        .map(|r| format!("; e.g. m={} T={} n={}: {} < {}", r.m, r.t, r.n, r.lhs_ratio, r.rhs_ratio))
        .unwrap_or_default();
    let audit = outcome(
        failing.is_empty(),
        format!(
            "{}/{} rows ok ({} failures at minimal n){sample}; squared-factor form ok everywhere: {squared_ok}; L(T) >= R(T) at every point: {endpoints_ok}",
            rows.len() - failing.len(),
            rows.len(),
            at_min
        ),
    );
    let monotonicity = outcome(monotone, "auxiliary LHS non-decreasing and RHS non-increasing in n");

    vec![
        ("6a reductions", reductions),
        ("6b constants", constants),
        ("6c induction audit", audit),
        ("6d monotonicity", monotonicity),
    ]
}

fn naive_domain(params: &Params, spec: &SizeSpec) -> f64 {
    let t = params.subsets() as u64;
    spec.to_bsets()
        .iter()
        .map(|b| {
            b.iter()
                .map(|&p| mao_core::binomial(t, p as u64).to_f64().unwrap())
                .sum::<f64>()
        })
        .product()
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut equal = 0;
    let mut done = 0;
    while done < 200 {
        let params = random_params(&mut rng, 12, 14);
        let t = params.subsets();
        let r = rng.gen_range(1..=3usize);
        let spec = if rng.gen_bool(0.5) {
            SizeSpec::Fixed((0..r).map(|_| rng.gen_range(0..=t)).collect())
        } else {
            SizeSpec::BSets(
                (0..r)
                    .map(|_| {
                        let k = rng.gen_range(1..=3usize);
                        (0..k).map(|_| rng.gen_range(0..=t)).collect::<BTreeSet<_>>()
                    })
                    .collect(),
            )
        };
        if naive_domain(&params, &spec) > 3e5 {
            continue;
        }
        done += 1;
        if transversal_sum_dp(&params, &spec).unwrap() == transversal_sum_naive(&params, &spec).unwrap() {
            equal += 1;
        }
    }
    // the literal T = 12, p = (4, 4) cross-check
    let big = Params::new(100, vec![40; 12]).unwrap();
    let spec = SizeSpec::Fixed(vec![4, 4]);
    let literal = transversal_sum_dp(&big, &spec).unwrap() == transversal_sum_naive(&big, &spec).unwrap();

    let large = Params::new(100, vec![40; 60]).unwrap();
    let start = Instant::now();
    let value = transversal_sum_dp(&large, &SizeSpec::Fixed(vec![20, 20, 20])).unwrap();
    let elapsed = start.elapsed();
    outcome(
        equal == 200 && literal && !value.is_zero() && elapsed < Duration::from_secs(10),
        format!(
            "{equal}/200 random instances equal; T=12 p=(4,4) literal check: {literal}; T=60 r=3 p=(20,20,20) in {:.3}s ({} digits)",
            elapsed.as_secs_f64(),
            value.to_string().len()
        ),
    )
}

fn criterion_8() -> Outcome {
    let configs: [(u64, Vec<u64>, usize, TailMode, u64); 5] = [
        (40, vec![10, 15, 20], 2, TailMode::AtLeast, 1),
        (40, vec![12, 12, 12], 1, TailMode::Exactly, 2),
        (40, vec![5, 25, 30], 3, TailMode::Exactly, 3),
        (30, vec![10, 12], 2, TailMode::AtLeast, 42),
        (50, vec![20, 8, 33, 17], 2, TailMode::Exactly, 5),
    ];
    let trials = 1_000_000;
    let mut worst = 0.0f64;
    let mut within = true;
    let mut identical = true;
    for (n, m, t, mode, seed) in configs {
        let params = Params::new(n, m).unwrap();
        let est = monte_carlo(&params, t, mode, trials, seed).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| monte_carlo(&params, t, mode, trials, seed).unwrap());
        identical &= single == est;
        for v in 1..=2 {
            let exact = raw_moment(&params, t, mode, v).unwrap().to_f64().unwrap();
            let z = (est.raw_moment_estimates[v - 1] - exact) / est.standard_errors[v - 1];
            worst = worst.max(z.abs());
            within &= z.abs() <= 5.0;
        }
    }
    outcome(
        within && identical,
        format!("max |z| = {worst:.3} over 5 configs x orders 1..2 at 1e6 trials; identical with 1 thread: {identical}"),
    )
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed().as_secs_f64())
}

fn main() {
    let mut failed = 0usize;
    let mut total = 0usize;
    let mut report = |name: String, o: Outcome| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        total += 1;
        println!("[{tag}] {name}: {}", o.detail);
    };

    println!("acceptance criteria:");
    let (c1, s) = timed(criterion_1);
    report(format!("1 Stirling table ({s:.1}s)"), c1);
    let ((c2, c3), s) = timed(criterion_2_and_3);
    report(format!("2 moment formula vs exhaustive oracle ({s:.1}s)"), c2);
    report("3 Delta_EV corollary".into(), c3);
    let (c4, s) = timed(criterion_4);
    report(format!("4 factorization identity ({s:.1}s)"), c4);
    let (c5, s) = timed(criterion_5);
    report(format!("5 conservative-class sweep ({s:.1}s)"), c5);
    let (c6, s) = timed(criterion_6);
    for (name, o) in c6 {
        report(format!("{name} ({s:.1}s for all of 6)"), o);
    }
    let (c7, s) = timed(criterion_7);
    report(format!("7 DP vs enumeration ({s:.1}s)"), c7);
    let (c8, s) = timed(criterion_8);
    report(format!("8 Monte Carlo consistency ({s:.1}s)"), c8);

    println!("{} passed, {} failed", total - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
