use std::collections::BTreeSet;
use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mao_core::{MPolicy, PPolicy, ProximityClass, SizeSpec, TailMode};

#[derive(Debug, Parser)]
#[command(
    name = "mao",
    version,
    about = "Exact moments, norms and inequality sweeps for the MAO / GHGD coverage distribution"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// JSON file of default flag values. Flags given on the command line win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Worker threads for sweeps and simulation.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalized transversal sum ||(p_1, ..., p_r)||_T.
    Norm(NormArgs),
    /// Exact raw moments, mean, variance and Delta_EV.
    Moments(MomentArgs),
    /// The product inequality prod_j ||p_j|| >= ||(p_1, ..., p_r)||.
    Inequality {
        #[command(subcommand)]
        command: InequalityCommand,
    },
    /// Monte Carlo estimates of the first four raw moments.
    Simulate(SimulateArgs),
    /// Exact moments against an oracle.
    Compare(CompareArgs),
}

#[derive(Debug, Subcommand)]
pub enum InequalityCommand {
    /// Evaluate one instance.
    Check(CheckArgs),
    /// Sweep a parameter grid, streaming one verdict per point.
    Search(SearchArgs),
    /// Scalar reduced forms of special cases.
    Reduce(ReduceArgs),
}

#[derive(Debug, Args)]
pub struct Instance {
    /// Population size.
    #[arg(long)]
    pub n: u64,

    /// Subset sizes, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub m: Vec<u64>,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("sizes").required(true).args(["p", "bsets"]))]
pub struct NormArgs {
    #[command(flatten)]
    pub instance: Instance,

    /// Fixed sizes p_1,...,p_r.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub p: Vec<usize>,

    /// Admissible size sets, one per slot: `1-2,0-3` or `1-2,4`.
    #[arg(long, value_parser = parse_bsets)]
    pub bsets: Option<SizeSpec>,
}

impl NormArgs {
    pub fn spec(&self) -> SizeSpec {
        match &self.bsets {
            Some(spec) => spec.clone(),
            None => SizeSpec::Fixed(self.p.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Atleast,
}

impl From<Mode> for TailMode {
    fn from(mode: Mode) -> Self {
        match mode {
            Mode::Exact => TailMode::Exactly,
            Mode::Atleast => TailMode::AtLeast,
        }
    }
}

#[derive(Debug, Args)]
pub struct Threshold {
    /// Coverage threshold.
    #[arg(long)]
    pub t: usize,

    /// Count elements covered exactly t times or at least t times.
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
}

#[derive(Debug, Args)]
pub struct MomentArgs {
    #[command(flatten)]
    pub instance: Instance,

    #[command(flatten)]
    pub threshold: Threshold,

    /// Highest raw moment reported.
    #[arg(long, default_value_t = 2)]
    pub order: usize,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub instance: Instance,

    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub p: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MPolicyArg {
    Uniform,
    Mixed,
    MixedOrdered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PPolicyArg {
    AllEqual,
    Proximity1,
    Relaxed,
    Unconstrained,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassArg {
    Conservative,
    Relaxed,
    Unconstrained,
}

impl From<ClassArg> for ProximityClass {
    fn from(class: ClassArg) -> Self {
        match class {
            ClassArg::Conservative => ProximityClass::Conservative,
            ClassArg::Relaxed => ProximityClass::Relaxed,
            ClassArg::Unconstrained => ProximityClass::Unconstrained,
        }
    }
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Population sizes, `lo..hi` (inclusive) or a single value.
    #[arg(long, value_parser = parse_range::<u64>)]
    pub n: RangeInclusive<u64>,

    /// Numbers of subsets.
    #[arg(long = "T", value_parser = parse_range::<usize>)]
    pub t: RangeInclusive<usize>,

    /// Numbers of slots.
    #[arg(long, value_parser = parse_range::<usize>, default_value = "2..3")]
    pub r: RangeInclusive<usize>,

    /// Subset-size vectors to try; `mixed` takes one vector per multiset.
    #[arg(long, value_enum, default_value_t = MPolicyArg::Mixed)]
    pub m_policy: MPolicyArg,

    /// Fixed subset sizes instead of a policy (only used where T matches).
    #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with = "m_policy")]
    pub m: Vec<u64>,

    #[arg(long, value_enum, default_value_t = PPolicyArg::Unconstrained)]
    pub p_policy: PPolicyArg,

    /// Keep only size vectors in this proximity class.
    #[arg(long, value_enum, default_value_t = ClassArg::Unconstrained)]
    pub class: ClassArg,

    /// Admit m_i = n.
    #[arg(long)]
    pub include_full: bool,
}

impl SearchArgs {
    pub fn m_policy(&self) -> MPolicy {
        if !self.m.is_empty() {
            return MPolicy::Fixed(self.m.clone());
        }
        match self.m_policy {
            MPolicyArg::Uniform => MPolicy::Uniform,
            MPolicyArg::Mixed => MPolicy::Mixed,
            MPolicyArg::MixedOrdered => MPolicy::MixedOrdered,
        }
    }

    pub fn p_policy(&self) -> PPolicy {
        match self.p_policy {
            PPolicyArg::AllEqual => PPolicy::AllEqual,
            PPolicyArg::Proximity1 => PPolicy::Proximity1,
            PPolicyArg::Relaxed => PPolicy::Relaxed,
            PPolicyArg::Unconstrained => PPolicy::Unconstrained,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Case {
    #[value(name = "p-eq-T")]
    PEqT,
    #[value(name = "p-eq-T-minus-1")]
    PEqTMinus1,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[arg(long, value_enum)]
    pub case: Case,

    #[arg(long)]
    pub n: u64,

    /// Subset sizes; a single value is repeated T times when --T is given.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub m: Vec<u64>,

    #[arg(long = "T")]
    pub t: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub instance: Instance,

    #[command(flatten)]
    pub threshold: Threshold,

    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleArg {
    Exhaustive,
    MonteCarlo,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub instance: Instance,

    #[command(flatten)]
    pub threshold: Threshold,

    #[arg(long, default_value_t = 3)]
    pub max_order: usize,

    /// Exhaustive enumeration is bounded by MAO_BUDGET tuples.
    #[arg(long, value_enum, default_value_t = OracleArg::Exhaustive)]
    pub oracle: OracleArg,

    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn parse_range<T>(s: &str) -> Result<RangeInclusive<T>, String>
where
    T: std::str::FromStr + PartialOrd + Copy,
{
    let num = |x: &str| x.trim().parse::<T>().map_err(|_| format!("`{x}` is not a valid number"));
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (num(lo)?, num(hi.strip_prefix('=').unwrap_or(hi))?),
        None => {
            let v = num(s)?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(format!("empty range `{s}`"));
    }
    Ok(lo..=hi)
}

pub fn parse_bsets(s: &str) -> Result<SizeSpec, String> {
    let mut slots = Vec::new();
    for item in s.split(',') {
        let item = item.trim();
        let mut set = BTreeSet::new();
        for part in item.split('+') {
            let (lo, hi) = match part.split_once('-') {
                Some((lo, hi)) => (lo, hi),
                None => (part, part),
            };
            let lo: usize = lo.trim().parse().map_err(|_| format!("bad size set `{item}`"))?;
            let hi: usize = hi.trim().parse().map_err(|_| format!("bad size set `{item}`"))?;
            if lo > hi {
                return Err(format!("empty size set `{item}`"));
            }
            set.extend(lo..=hi);
        }
        slots.push(set);
    }
    Ok(SizeSpec::BSets(slots))
}
