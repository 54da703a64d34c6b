//! `mao`: command-line front end to `mao-core`.
//!
//! Exit codes: 0 success, 1 usage error, 2 domain error, 3 enumeration
//! budget exceeded.

mod args;
mod config;
mod render;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use mao_core::oracle::{budget_from_env, compare_report, monte_carlo, OracleKind};
use mao_core::{
    check_inequality, grid_search, mao_norm, moment_report, reduction_p_eq_t,
    reduction_p_eq_t_minus1_uniform, GridSpec, MaoError, Params,
};

use args::{Case, Cli, Command, Format, InequalityCommand, Instance, OracleArg};
use render::{NormOutput, ReduceOutput};

enum Failure {
    Usage(String),
    Domain(MaoError),
    Io(io::Error),
}

impl From<MaoError> for Failure {
    fn from(e: MaoError) -> Self {
        Failure::Domain(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.into())
    }
}

fn exit_code(e: &MaoError) -> u8 {
    match e {
        MaoError::BudgetExceeded { .. } => 3,
        MaoError::InvalidParams(_)
        | MaoError::IndexOutOfRange { .. }
        | MaoError::SizeOutOfRange { .. }
        | MaoError::InvalidSizeSpec(_)
        | MaoError::ThresholdOutOfRange { .. }
        | MaoError::InvalidOrder { .. } => 1,
        _ => 2,
    }
}

fn params(instance: &Instance) -> Result<Params, Failure> {
    Ok(Params::new(instance.n, instance.m.clone())?)
}

fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Failure::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let format = cli.format;
    let mut out = open_output(cli.output.as_deref())?;

    match cli.command {
        Command::Norm(a) => {
            let params = params(&a.instance)?;
            let spec = a.spec();
            let value = mao_norm(&params, &spec)?;
            render::norm(&mut out, format, &NormOutput { params, spec, value })?;
        }
        Command::Moments(a) => {
            let params = params(&a.instance)?;
            let report = moment_report(&params, a.threshold.t, a.threshold.mode.into(), a.order)?;
            render::moments(&mut out, format, &report)?;
        }
        Command::Inequality { command } => inequality(&mut out, format, command)?,
        Command::Simulate(a) => {
            let params = params(&a.instance)?;
            let est = monte_carlo(&params, a.threshold.t, a.threshold.mode.into(), a.trials, a.seed)?;
            render::simulate(&mut out, format, &est)?;
        }
        Command::Compare(a) => {
            let params = params(&a.instance)?;
            let oracle = match a.oracle {
                OracleArg::Exhaustive => OracleKind::Exhaustive { budget: budget_from_env() },
                OracleArg::MonteCarlo => OracleKind::MonteCarlo { trials: a.trials, seed: a.seed },
            };
            let report =
                compare_report(&params, a.threshold.t, a.threshold.mode.into(), a.max_order, oracle)?;
            render::compare(&mut out, format, &report)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn inequality(out: &mut dyn Write, format: Format, command: InequalityCommand) -> Result<(), Failure> {
    match command {
        InequalityCommand::Check(a) => {
            let verdict = check_inequality(&params(&a.instance)?, &a.p)?;
            render::verdict(out, format, &verdict)
        }
        InequalityCommand::Reduce(a) => {
            let m = match (a.t, a.m.as_slice()) {
                (Some(t), [single]) => vec![*single; t],
                (Some(t), m) if m.len() != t => {
                    return Err(Failure::Usage(format!("--m has {} entries but --T is {t}", m.len())))
                }
                (_, m) => m.to_vec(),
            };
            let params = Params::new(a.n, m)?;
            let t = params.subsets();
            let (case, reduced, p) = match a.case {
                Case::PEqT => ("p-eq-T", reduction_p_eq_t(&params)?, vec![t, t]),
                Case::PEqTMinus1 => {
                    let m0 = params.m()[0];
                    if params.m().iter().any(|&mi| mi != m0) {
                        return Err(MaoError::Inadmissible(
                            "the p = T - 1 reduction needs equal subset sizes".into(),
                        )
                        .into());
                    }
                    ("p-eq-T-minus-1", reduction_p_eq_t_minus1_uniform(a.n, m0, t)?, vec![t - 1, t - 1])
                }
            };
            let direct = check_inequality(&params, &p)?;
            let agree = direct.holds == reduced.holds;
            render::reduce(out, format, &ReduceOutput { case: case.into(), reduced, direct, agree })
        }
        InequalityCommand::Search(a) => {
            let spec = GridSpec {
                n: a.n.clone(),
                t: a.t.clone(),
                r: a.r.clone(),
                m_policy: a.m_policy(),
                p_policy: a.p_policy(),
                include_full: a.include_full,
                class_filter: a.class.into(),
            };
            let search = grid_search(&spec)?;
            render::search(out, format, search)
        }
    }
}

fn main() -> ExitCode {
    let mut argv: Vec<OsString> = std::env::args_os().collect();
    if let Some(path) = config::config_path(&argv) {
        match config::load(Path::new(&path)).and_then(|c| config::merge(argv, &c)) {
            Ok(merged) => argv = merged,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        }
    }
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
