use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Exact verification of floating-point accumulation networks.
#[derive(Debug, Clone, PartialEq, Eq, Parser, Serialize, Deserialize)]
#[command(name = "fpan", version, about)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Solver command line; `{file}` is replaced by the problem path.
    #[arg(long, global = true, env = "FPAN_SOLVER", default_value = "z3 {file}")]
    pub solver: String,

    /// Per-query solver timeout in seconds.
    #[arg(long, global = true, default_value_t = 60)]
    pub timeout: u64,

    /// Print the JSON report on standard output instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    /// Also write the JSON report to this file.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Run a network on concrete inputs.
    Simulate(SimulateArgs),
    /// Encode a property and prove or refute it with the solver.
    Verify(VerifyArgs),
    /// Print the SMT-LIB problem without solving it.
    EmitSmt(EmitArgs),
    /// Check catalog lemmas exhaustively against concrete TwoSum.
    CheckLemmas(CheckLemmasArgs),
    /// Find the worst relative error over a small-precision window.
    SearchError(SearchArgs),
    /// Check an error bound on every tuple of a small-precision window.
    Exhaustive(ExhaustiveArgs),
    /// Largest provable error exponent per domain and network.
    Ablate(AblateArgs),
    /// Names of the built-in networks.
    ListNetworks,
    /// Re-run the configuration recorded in a JSON report.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropertyKind {
    /// `|w0| < 2^-k |z0|` for inputs given as fixed-point pairs.
    Relerr,
    /// `z0` dominates `z1` under `--relation`.
    Dominance,
}

#[derive(Debug, Clone, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Built-in network name or path to a network file.
    #[arg(long)]
    pub network: String,
    #[arg(long, default_value = "binary64")]
    pub format: String,
    /// Comma-separated literals, one per input.
    #[arg(long, allow_hyphen_values = true)]
    pub inputs: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct PropertyArgs {
    #[arg(long)]
    pub network: String,
    #[arg(long, default_value = "setz")]
    pub domain: String,
    #[arg(long, default_value = "binary64")]
    pub format: String,
    #[arg(long, value_enum, default_value = "relerr")]
    pub property: PropertyKind,
    /// Error exponent, or `auto` for the largest provable one.
    #[arg(long)]
    pub k: Option<String>,
    /// Nonoverlap relation for `dominance`: s, p, ulp or qd.
    #[arg(long)]
    pub relation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub prop: PropertyArgs,
    /// Search range for `--k auto`, as `lo..hi`; defaults to `0..2p+2`.
    #[arg(long)]
    pub k_range: Option<String>,
    /// Largest number of concrete inputs tried when realizing a model.
    #[arg(long, default_value_t = 1_000_000)]
    pub realize_budget: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct EmitArgs {
    /// Emit the floating-point-theory check of one lemma instead.
    #[arg(long, conflicts_with_all = ["network", "property", "k", "relation", "domain"])]
    pub lemma: Option<String>,
    #[arg(long, required_unless_present = "lemma")]
    pub network: Option<String>,
    #[arg(long)]
    pub domain: Option<String>,
    #[arg(long, default_value = "binary64")]
    pub format: String,
    #[arg(long, value_enum)]
    pub property: Option<PropertyKind>,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub relation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct CheckLemmasArgs {
    #[arg(long, default_value = "setz")]
    pub domain: String,
    #[arg(long, default_value = "custom:p=5,emin=-40")]
    pub format: String,
    /// Exponent window for nonzero inputs, as `lo..hi`.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Check only these lemmas.
    #[arg(long, value_delimiter = ',')]
    pub lemma: Vec<String>,
    /// Also require every input pair to match some hypothesis.
    #[arg(long)]
    pub coverage: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct WindowArgs {
    #[arg(long)]
    pub network: String,
    #[arg(long, short)]
    pub precision: u32,
    /// Exponent window as `lo..hi`; defaults to `-(2p+4)..0`.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Allow any inputs, not only TwoSum fixed-point pairs.
    #[arg(long)]
    pub any_inputs: bool,
    /// Leave zero out of the input values.
    #[arg(long)]
    pub no_zero: bool,
    /// Largest number of tuples to evaluate.
    #[arg(long)]
    pub budget: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct SearchArgs {
    #[command(flatten)]
    pub window: WindowArgs,
    /// Report a violation when the worst error exceeds this exact value.
    #[arg(long)]
    pub bound: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct ExhaustiveArgs {
    #[command(flatten)]
    pub window: WindowArgs,
    /// Check `(1 + 2u) 2^-k` relative error.
    #[arg(long, conflicts_with = "bound")]
    pub k: Option<i64>,
    /// Check this exact relative error bound.
    #[arg(long, required_unless_present = "k")]
    pub bound: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct AblateArgs {
    #[arg(long, default_value = "binary64")]
    pub format: String,
    #[arg(long, value_delimiter = ',', default_value = "ddadd_aug,madd_aug")]
    pub networks: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "se,setz,seltzo")]
    pub domains: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub report: PathBuf,
}
