//! `pml`: model checking, bounded satisfiability and the two reductions of
//! polyadic Boolean modal logic from the command line.

mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use report::{escape, Format};

#[derive(Parser, Debug)]
#[command(name = "pml", version, about = "Polyadic Boolean modal logic toolkit")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

/// Formulas are given inline, or as `@PATH` to read them from a file.
#[derive(Subcommand, Debug)]
pub enum Command {
    /// Truth set of a formula in a model.
    Check {
        model: PathBuf,
        formula: String,
        /// Use the direct recursive evaluator instead of labeling.
        #[arg(long)]
        naive: bool,
        /// Exit with 1 unless the formula holds at this world.
        #[arg(long)]
        expect: Option<u32>,
    },
    /// Reduce a formula over `R` and `!R` to one without relation negation.
    ReduceNeg { formula: String },
    /// Reduce a formula to table normal form and table symbols.
    ReduceTables {
        formula: String,
        /// Symbols as `NAME/ARITY,...`; inferred from the formula if absent.
        #[arg(long)]
        vocab: Option<String>,
        /// Maximum number of relation symbols.
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
        max_symbols: u64,
        /// Maximum number of conjuncts of the main-lemma axiom.
        #[arg(long, default_value_t = 1 << 20, value_parser = clap::value_parser!(u64).range(1..))]
        max_xi1: u64,
        /// Also print the full reduced formula.
        #[arg(long)]
        full: bool,
    },
    /// Move all relation negations of a term to its root.
    NormalizeTerm {
        term: String,
        #[arg(long)]
        vocab: String,
    },
    /// List the tables of one arity with their indices.
    Tables {
        #[arg(long)]
        vocab: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        arity: u64,
    },
    /// Bounded satisfiability search.
    Sat {
        formula: String,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
        max_worlds: u64,
        /// Write the witness model to this file.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Run a reduction's forward and backward constructions with all checks.
    VerifyReduction {
        #[arg(value_enum)]
        reduction: Reduction,
        /// A model of the source formula.
        model: PathBuf,
        formula: String,
        #[arg(long, default_value_t = 0)]
        world: u32,
        /// Run the backward construction on this model of the reduced formula
        /// instead of the forward output.
        #[arg(long)]
        reduced_model: Option<PathBuf>,
        /// Layering of the table construction.
        #[arg(long, value_enum, default_value_t = Layering::Truncated)]
        layering: Layering,
        /// Depth bound `D` for truncated layering.
        #[arg(long)]
        depth: Option<usize>,
        /// Number of layers for cyclic layering.
        #[arg(long)]
        layers: Option<usize>,
        #[arg(long, default_value_t = 1 << 20, value_parser = clap::value_parser!(u64).range(1..))]
        max_xi1: u64,
    },
    /// List encoding of a model and its size.
    Encode { model: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Reduction {
    Neg,
    Tables,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Layering {
    Truncated,
    Cyclic,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Budget(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Format(_) | CliError::Io { .. } => "format",
            CliError::Budget(_) => "budget",
        }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Budget(_) => 3,
            _ => 2,
        }
    }
}

/// Result of a successful command: its report and whether the answer was
/// negative.
pub struct Outcome {
    pub report: report::Report,
    pub negative: bool,
}

/// Runs `pml` on `argv` (without the program name), writing the report to
/// `out` and errors to `err`; returns the exit status.
pub fn run(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let cli = match Cli::try_parse_from(std::iter::once("pml".to_string()).chain(argv.iter().cloned())) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let first = e.to_string().lines().next().unwrap_or_default().trim_start_matches("error: ").to_string();
            let _ = writeln!(err, "error[usage]: {}", escape(&first));
            return 2;
        }
    };
    match commands::execute(&cli.command) {
        Ok(outcome) => {
            let _ = write!(out, "{}", outcome.report.render(cli.format));
            u8::from(outcome.negative)
        }
        Err(e) => {
            let _ = writeln!(err, "error[{}]: {}", e.kind(), escape(&e.to_string()));
            e.code()
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let code = run(&argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code)
}
