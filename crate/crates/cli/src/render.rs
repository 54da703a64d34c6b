//! Output in the three formats. JSON carries every rational as
//! `{num, den, approx}`; sweeps stream one record per line.

use std::io::Write;

use mao_core::inequality::{GridSearch, ReducedComparison, VerdictRow};
use mao_core::oracle::{CompareReport, EmpiricalMoments, OracleKind};
use mao_core::report::{decimal12, fraction_string, rational};
use mao_core::{ExactRational, InequalityVerdict, MomentReport, Params, SizeSpec};
use serde::{Deserialize, Serialize};

use crate::args::Format;
use crate::Failure;

type Out<'a> = &'a mut dyn Write;

#[derive(Debug, Serialize, Deserialize)]
pub struct NormOutput {
    pub params: Params,
    pub spec: SizeSpec,
    #[serde(with = "rational")]
    pub value: ExactRational,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReduceOutput {
    pub case: String,
    pub reduced: ReducedComparison,
    pub direct: InequalityVerdict,
    /// The reduced form and the direct check give the same truth value.
    pub agree: bool,
}

fn json<T: Serialize>(out: Out, value: &T) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn join<T: ToString>(xs: &[T], sep: &str) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(sep)
}

fn describe_spec(spec: &SizeSpec) -> String {
    match spec {
        SizeSpec::Fixed(p) => format!("({})", join(p, ",")),
        SizeSpec::BSets(sets) => {
            let sets: Vec<String> = sets.iter().map(|s| format!("{{{}}}", join(&s.iter().collect::<Vec<_>>(), ","))).collect();
            format!("({})", sets.join(","))
        }
    }
}

fn quantity_rows(out: Out, rows: &[(String, &ExactRational)]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["quantity", "num", "den", "approx"])?;
    for (name, q) in rows {
        w.write_record([name.as_str(), &q.numer().to_string(), &q.denom().to_string(), &decimal12(q)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn norm(out: Out, format: Format, norm: &NormOutput) -> Result<(), Failure> {
    match format {
        Format::Json => json(out, norm),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["n", "m", "spec", "num", "den", "approx"])?;
            w.write_record([
                norm.params.n().to_string(),
                join(norm.params.m(), ";"),
                describe_spec(&norm.spec),
                norm.value.numer().to_string(),
                norm.value.denom().to_string(),
                decimal12(&norm.value),
            ])?;
            w.flush()?;
            Ok(())
        }
        Format::Pretty => {
            writeln!(out, "n = {}, m = ({})", norm.params.n(), join(norm.params.m(), ", "))?;
            writeln!(
                out,
                "||{}||_T = {} ~ {}",
                describe_spec(&norm.spec),
                fraction_string(&norm.value),
                decimal12(&norm.value)
            )?;
            Ok(())
        }
    }
}

pub fn moments(out: Out, format: Format, report: &MomentReport) -> Result<(), Failure> {
    let mut rows: Vec<(String, &ExactRational)> = report
        .raw_moments
        .iter()
        .enumerate()
        .map(|(i, q)| (format!("E[x^{}]", i + 1), q))
        .collect();
    rows.push(("mean".into(), &report.mean));
    rows.push(("variance".into(), &report.variance));
    rows.push(("delta_ev".into(), &report.delta_ev));
    match format {
        Format::Json => json(out, report),
        Format::Csv => quantity_rows(out, &rows),
        Format::Pretty => {
            let mode = match report.mode {
                mao_core::TailMode::Exactly => "exactly",
                mao_core::TailMode::AtLeast => "at least",
            };
            writeln!(
                out,
                "n = {}, m = ({}), elements covered {mode} {} times",
                report.params.n(),
                join(report.params.m(), ", "),
                report.t
            )?;
            for (name, q) in rows {
                writeln!(out, "{name:>10} = {} ~ {}", fraction_string(q), decimal12(q))?;
            }
            Ok(())
        }
    }
}

fn pretty_verdict(out: Out, v: &InequalityVerdict) -> Result<(), Failure> {
    writeln!(
        out,
        "n={} T={} m=({}) p=({}) [{}]: {} {} {}, margin {} ~ {}",
        v.params.n(),
        v.params.subsets(),
        join(v.params.m(), ","),
        join(&v.p, ","),
        v.class.as_str(),
        fraction_string(&v.lhs),
        if v.holds { ">=" } else { "<" },
        fraction_string(&v.rhs),
        fraction_string(&v.margin),
        v.margin_decimal()
    )?;
    Ok(())
}

pub fn verdict(out: Out, format: Format, v: &InequalityVerdict) -> Result<(), Failure> {
    match format {
        Format::Json => json(out, v),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.serialize(VerdictRow::from(v))?;
            w.flush()?;
            Ok(())
        }
        Format::Pretty => pretty_verdict(out, v),
    }
}

pub fn reduce(out: Out, format: Format, r: &ReduceOutput) -> Result<(), Failure> {
    match format {
        Format::Json => json(out, r),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["case", "lhs", "rhs", "holds", "direct_margin", "direct_holds", "agree"])?;
            w.write_record([
                r.case.clone(),
                fraction_string(&r.reduced.lhs),
                fraction_string(&r.reduced.rhs),
                r.reduced.holds.to_string(),
                fraction_string(&r.direct.margin),
                r.direct.holds.to_string(),
                r.agree.to_string(),
            ])?;
            w.flush()?;
            Ok(())
        }
        Format::Pretty => {
            writeln!(
                out,
                "{}: reduced {} {} {} ({} ~ {})",
                r.case,
                fraction_string(&r.reduced.lhs),
                if r.reduced.holds { ">=" } else { "<" },
                fraction_string(&r.reduced.rhs),
                if r.reduced.holds { "holds" } else { "fails" },
                decimal12(&(&r.reduced.lhs - &r.reduced.rhs)),
            )?;
            write!(out, "direct: ")?;
            pretty_verdict(out, &r.direct)?;
            writeln!(out, "agree: {}", r.agree)?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct SummaryRecord<'a> {
    summary: &'a mao_core::inequality::GridSummary,
}

pub fn search(out: Out, format: Format, mut search: GridSearch<'_>) -> Result<(), Failure> {
    match format {
        Format::Json => {
            for v in search.by_ref() {
                serde_json::to_writer(&mut *out, &v?)?;
                writeln!(out)?;
            }
            serde_json::to_writer(&mut *out, &SummaryRecord { summary: search.summary() })?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            for v in search.by_ref() {
                w.serialize(VerdictRow::from(&v?))?;
            }
            w.flush()?;
            drop(w);
            // The summary does not fit the row schema; it goes to stderr.
            eprintln!("{}", serde_json::to_string(&SummaryRecord { summary: search.summary() })?);
        }
        Format::Pretty => {
            for v in search.by_ref() {
                pretty_verdict(out, &v?)?;
            }
            let s = search.summary();
            writeln!(out, "points: {}, holds: {}, violations: {}", s.total, s.holds, s.violations)?;
            for (class, tally) in &s.by_class {
                writeln!(
                    out,
                    "  {}: {} hold, {} violations",
                    class.as_str(),
                    tally.holds,
                    tally.violations
                )?;
            }
            if let Some(best) = &s.tightest {
                write!(out, "smallest margin: ")?;
                pretty_verdict(out, best)?;
            }
        }
    }
    Ok(())
}

pub fn simulate(out: Out, format: Format, est: &EmpiricalMoments) -> Result<(), Failure> {
    match format {
        Format::Json => json(out, est),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["order", "estimate", "standard_error"])?;
            for (i, (e, se)) in est.raw_moment_estimates.iter().zip(&est.standard_errors).enumerate() {
                w.write_record([(i + 1).to_string(), e.to_string(), se.to_string()])?;
            }
            w.flush()?;
            Ok(())
        }
        Format::Pretty => {
            writeln!(
                out,
                "n = {}, m = ({}), t = {}, {} trials, seed {}",
                est.params.n(),
                join(est.params.m(), ", "),
                est.t,
                est.trials,
                est.seed
            )?;
            for (i, (e, se)) in est.raw_moment_estimates.iter().zip(&est.standard_errors).enumerate() {
                writeln!(out, "E[x^{}] ~ {e:.6} +/- {se:.6}", i + 1)?;
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct CompareOutput<'a> {
    #[serde(flatten)]
    report: &'a CompareReport,
    all_agree: bool,
}

pub fn compare(out: Out, format: Format, report: &CompareReport) -> Result<(), Failure> {
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    match format {
        Format::Json => json(out, &CompareOutput { report, all_agree: report.all_agree() }),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["order", "theorem", "oracle_exact", "estimate", "standard_error", "z_score", "agrees"])?;
            for row in &report.rows {
                w.write_record([
                    row.order.to_string(),
                    fraction_string(&row.theorem),
                    row.oracle_exact.as_ref().map(fraction_string).unwrap_or_default(),
                    opt(row.estimate),
                    opt(row.standard_error),
                    opt(row.z_score),
                    row.agrees().to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
        Format::Pretty => {
            let oracle = match report.oracle {
                OracleKind::Exhaustive { .. } => "exhaustive enumeration".to_string(),
                OracleKind::MonteCarlo { trials, seed } => format!("{trials} trials, seed {seed}"),
            };
            writeln!(out, "oracle: {oracle}")?;
            for row in &report.rows {
                let theirs = match (&row.oracle_exact, row.estimate, row.standard_error) {
                    (Some(q), _, _) => fraction_string(q),
                    (None, Some(e), Some(se)) => format!("{e:.6} +/- {se:.6}"),
                    _ => "-".into(),
                };
                writeln!(
                    out,
                    "E[x^{}]: {} vs {} {}",
                    row.order,
                    fraction_string(&row.theorem),
                    theirs,
                    if row.agrees() { "ok" } else { "MISMATCH" }
                )?;
            }
            writeln!(out, "all agree: {}", report.all_agree())?;
            Ok(())
        }
    }
}
