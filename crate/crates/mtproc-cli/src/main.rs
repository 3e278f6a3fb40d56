//! Batch front end: evaluate composition expressions on p-value files, run
//! the property checkers, and export threshold staircases for plotting.

mod commands;
mod input;
mod report;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mtproc",
    version,
    about = "Evaluate and verify compositions of multiple testing procedures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Table,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an expression on a file of p-values
    Eval {
        /// Composition expression, e.g. 'intersect(bh(0.05), topk(3))'
        #[arg(long)]
        expr: String,
        /// Input file: one p-value per line (optional 'p' header), or a CSV
        /// when --column is given
        #[arg(long)]
        input: PathBuf,
        /// Binding for the symbolic 'alpha'
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        format: OutputFormat,
        /// Read p-values from the named CSV column
        #[arg(long)]
        column: Option<String>,
    },
    /// Run the property checkers against an expression
    Check {
        #[arg(long)]
        expr: String,
        /// Randomized trials per property
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Inclusive range of problem sizes, e.g. '1..8' or a single size
        #[arg(long = "m-range", default_value = "1..8")]
        m_range: String,
        /// Binding for the symbolic 'alpha'
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        format: OutputFormat,
    },
    /// Emit the threshold staircase of a closed-form expression as CSV
    PlotData {
        #[arg(long)]
        expr: String,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        column: Option<String>,
    },
}

/// Failures carry the exit code mandated for their class: 2 for expression
/// and usage problems, 3 for I/O and data problems, 1 for failed checks.
pub(crate) enum CliError {
    Usage(String),
    Data(String),
    ChecksFailed,
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::ChecksFailed => 1,
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval {
            expr,
            input,
            alpha,
            format,
            column,
        } => commands::eval(&expr, &input, alpha, format, column.as_deref()),
        Command::Check {
            expr,
            trials,
            seed,
            m_range,
            alpha,
            format,
        } => commands::check(&expr, trials, seed, &m_range, alpha, format),
        Command::PlotData {
            expr,
            input,
            alpha,
            column,
        } => commands::plot_data(&expr, &input, alpha, column.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            match &err {
                CliError::Usage(msg) | CliError::Data(msg) => eprintln!("error: {msg}"),
                CliError::ChecksFailed => eprintln!("error: guaranteed properties violated"),
            }
            ExitCode::from(err.code())
        }
    }
}
