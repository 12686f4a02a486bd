//! `qmitm` command-line front end.
//!
//! Reports go to stdout as one JSON document; a short human summary goes to
//! stderr. Exit codes: 0 solved (or validation clean), 1 no solution found
//! (or violations found), 2 input or parameter error.

mod bench;
mod report;
mod solve;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "qmitm", version, about = "Meet-in-the-middle plus simulated Grover search solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one instance read from a file or produced by the generator.
    Solve(SolveArgs),
    /// Run the scaling benchmark and fit query-count exponents.
    Bench(BenchArgs),
    /// Exhaustive promise and claim validation.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolveKind {
    Knapsack,
    Ilp,
    Cnf,
    Exact1,
    /// Pair or simultaneous claw on generated function families.
    Claw,
    /// Symmetric claw on a generated knapsack-claw oracle.
    SymmetricClaw,
    /// Simultaneous collision on a generated family.
    Collision,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Seed for every random choice.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Reruns after a failed search, each with seed + k.
    #[arg(long, default_value_t = 5)]
    pub retries: u32,
    /// Include wall-clock times (makes output non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(value_enum)]
    pub kind: SolveKind,
    /// Instance file (knapsack, ilp: plain text; cnf, exact1: DIMACS).
    pub input: Option<PathBuf>,
    /// Generate an instance of this size instead of reading a file
    /// (n, or log2 N for claw and collision).
    #[arg(long)]
    pub generate: Option<usize>,
    /// Rows (ilp) or functions per side (claw, collision) for generated instances.
    #[arg(long)]
    pub d: Option<usize>,
    /// Clause density for generated cnf/exact1 instances, and the CNF_c class for cnf.
    #[arg(long)]
    pub c: Option<f64>,
    /// Generate without a planted solution.
    #[arg(long)]
    pub no_plant: bool,
    /// Cross-check against the exhaustive solver (n <= 20, or N <= 4096).
    #[arg(long)]
    pub verify: bool,
    /// Subset size s for claw and collision (default ceil(sqrt N)).
    #[arg(long)]
    pub subset_size: Option<u64>,
    /// Expert: fix the CNF block fraction alpha instead of deriving it from c.
    #[arg(long)]
    pub alpha_override: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// knapsack, ilp, cnf, exact1, symmetric-claw, claw (pair-claw), collision.
    pub problem: String,
    /// Comma-separated sizes (n, or log2 N for claw and collision).
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Output path prefix; writes PREFIX.csv and PREFIX.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub subset_size: Option<u64>,
    /// Skip the full-domain Grover baseline.
    #[arg(long)]
    pub no_baseline: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ValidateKind {
    /// Symmetry promise of knapsack-claw oracles.
    Claw,
    /// r-to-1 promise of generated collision families.
    Family,
    /// Block claim on planted CNF formulas.
    CnfClaim,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(value_enum)]
    pub kind: ValidateKind,
    /// Bit length n (claw), log2 N (family), or n (cnf-claim).
    #[arg(long)]
    pub n: usize,
    /// Number of generated instances.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let echo: Vec<String> = std::env::args().skip(1).collect();
    let result = match cli.command {
        Command::Solve(a) => solve::run(&a, &echo),
        Command::Bench(a) => bench::run(&a, &echo),
        Command::Validate(a) => validate::run(&a, &echo),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            report::emit_error(&echo, &e);
            ExitCode::from(2)
        }
    }
}
