use std::path::PathBuf;

use amortise_core::engine::{Strategy, DEFAULT_FUEL};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Amortised runtime analysis of typed constructor rewrite systems.
#[derive(Parser, Debug)]
#[command(name = "amortise", version)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Report format on standard output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Also write the machine-readable report (or the inferred signature) here.
    #[arg(short = 'o', long = "output", global = true)]
    pub output: Option<PathBuf>,
    /// Step budget for every evaluation.
    #[arg(long, global = true, default_value_t = DEFAULT_FUEL, value_parser = clap::value_parser!(u64).range(1..))]
    pub fuel: u64,
    /// Print constraint systems and per-check detail.
    #[arg(short, long, global = true)]
    pub verbose: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    JsonLines,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyArg {
    /// Leftmost innermost.
    Li,
    /// Rightmost innermost.
    Ri,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Li => Strategy::LeftmostInnermost,
            StrategyArg::Ri => Strategy::RightmostInnermost,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct Typed {
    /// Rewrite system (`.trs`).
    pub trs: PathBuf,
    /// Annotated signature (`.sig`).
    #[arg(long)]
    pub sig: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Type-check every rule against every declaration of its root.
    Check(Typed),
    /// Infer an annotated signature of the given degree by linear programming.
    Infer {
        trs: PathBuf,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
        deg: u64,
        /// `total-cost` or `cost:<symbol>`.
        #[arg(long)]
        minimize: Option<String>,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
        max_decls: u64,
    },
    /// Rewrite a term to normal form.
    Eval {
        trs: PathBuf,
        #[arg(long)]
        term: String,
        /// `x=value; y=value`: evaluate under this substitution by big steps.
        #[arg(long)]
        subst: Option<String>,
        #[arg(long, value_enum, default_value_t = StrategyArg::Li)]
        strategy: StrategyArg,
    },
    /// Derivation height of a ground term.
    Dheight {
        trs: PathBuf,
        #[arg(long)]
        term: String,
    },
    /// Runtime complexity `rc(n)` by exhaustive enumeration of basic terms.
    Rc {
        trs: PathBuf,
        #[arg(long, default_value_t = 7, value_parser = clap::value_parser!(u64).range(1..))]
        max_size: u64,
    },
    /// Potential of a ground term at an annotated type.
    Phi {
        #[command(flatten)]
        typed: Typed,
        #[arg(long)]
        term: String,
        /// For example `Queue [0 1]`.
        #[arg(long = "type")]
        at: String,
    },
    /// Orientation of the derived interpretation.
    Orient {
        #[command(flatten)]
        typed: Typed,
        /// Bound on start-term size for derivations.
        #[arg(long, default_value_t = 7, value_parser = clap::value_parser!(u64).range(1..))]
        max_size: u64,
        /// Bound on substitution value size for rule instances.
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
        subst_size: u64,
    },
    /// Compare `rc(n)` with the potential bound.
    Bound {
        #[command(flatten)]
        typed: Typed,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
        n_max: u64,
    },
    /// Sweep the soundness inequality over basic terms.
    Soundness {
        #[command(flatten)]
        typed: Typed,
        #[arg(long, default_value_t = 7, value_parser = clap::value_parser!(u64).range(1..))]
        max_size: u64,
    },
}
