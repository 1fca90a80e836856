mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{CliError, Report};

#[derive(Debug, Parser)]
#[command(
    name = "wpv",
    version,
    about = "Exact weighted position values, axiom checks and a bidding-mechanism simulator"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Write output here (atomically) instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Comparison tolerance in floating-point mode.
    #[arg(long, default_value_t = 1e-9, global = true)]
    pub tol: f64,
    /// Exact rational arithmetic.
    #[arg(long, global = true)]
    pub rational: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Dividends,
    LinkShapley,
    Recursive,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    Weighted,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Tie {
    First,
    Random,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Proof,
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    Coauthor,
    RandomTable,
    Unanimity,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Allocations by one or all computation routes.
    Value {
        #[arg(required = true)]
        instances: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::All)]
        method: Method,
        /// Ignore the instance weights (classical position value).
        #[arg(long)]
        classical: bool,
    },
    /// Run axiom checks against an allocation rule.
    Axioms {
        #[arg(required = true)]
        instances: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Rule::Weighted)]
        rule: Rule,
        /// `all` or a comma-separated list of axiom keys.
        #[arg(long, default_value = "all")]
        check: String,
    },
    /// Simulate the bidding mechanism under the equilibrium profile.
    Mechanism {
        #[arg(required = true)]
        instances: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Tie::Sweep)]
        tie: Tie,
        #[arg(long, value_enum, default_value_t = Mode::Proof)]
        mode: Mode,
        /// Also audit unilateral deviations on the grid ±0.01, ±0.1, ±1.
        #[arg(long)]
        deviations: bool,
        /// Write a line-per-event trace here (single instance only).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Harsanyi dividends and link-game Shapley values.
    Dividends {
        #[arg(required = true)]
        instances: Vec<PathBuf>,
    },
    /// Emit an instance document.
    Generate(GenerateArgs),
    /// Weighted and classical position values side by side.
    Compare {
        #[arg(required = true)]
        instances: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub generator: Generator,
    #[arg(long, default_value_t = 3)]
    pub players: usize,
    /// Links as `1-2,2-3`; random-table draws them when omitted.
    #[arg(long)]
    pub links: Option<String>,
    /// Number of random links for random-table without --links.
    #[arg(long, default_value_t = 4)]
    pub link_count: usize,
    /// Comma-separated weights, default all 1.
    #[arg(long)]
    pub weights: Option<String>,
    /// Coauthor project counts, comma-separated.
    #[arg(long)]
    pub projects: Option<String>,
    #[arg(long, default_value = "1")]
    pub inverse: String,
    #[arg(long, default_value = "1")]
    pub product: String,
    /// Coauthor cost polynomial coefficients, constant term first.
    #[arg(long)]
    pub cost: Option<String>,
    /// Unanimity support as `1-2,2-3`.
    #[arg(long)]
    pub support: Option<String>,
    #[arg(long, default_value = "1")]
    pub coefficient: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 5 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("wpv: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let report: Report = if cli.global.rational {
        commands::dispatch::<wpv_core::Rational>(&cli.command, &cli.global)?
    } else {
        commands::dispatch::<f64>(&cli.command, &cli.global)?
    };
    let text = output::render(&report, cli.global.format)?;
    output::write(&text, cli.global.out.as_deref())?;
    for (source, e) in &report.errors {
        eprintln!("wpv: {source}: {e}");
    }
    for source in &report.inconsistent {
        let e = CliError::Consistency(format!("{source}: results disagree beyond tolerance"));
        eprintln!("wpv: {e}");
    }
    Ok(report.exit_code())
}
