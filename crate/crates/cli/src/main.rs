//! Command-line front end: generate states, evaluate the NE witness, twirl,
//! decide symmetric separability, run experiments, and fit distributions.
//!
//! Exit codes: 0 ok, 2 configuration error, 3 I/O failure, 4 dimension or
//! validation error, 5 numerical failure.

mod commands;
mod dump;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nelab_core::ErrorClass;

#[derive(Parser)]
#[command(name = "nelab", version, about = "Symmetry-induced entanglement laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample states from an ensemble spec into a JSON-lines dump.
    Gen {
        /// Ensemble spec JSON file.
        #[arg(long)]
        spec: String,
        /// Number of states to draw.
        #[arg(long)]
        count: usize,
        /// RNG seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path.
        #[arg(long)]
        out: String,
    },
    /// Evaluate the number entanglement of each state in a dump.
    Ne {
        /// States dump (JSON-lines, `gen` output).
        #[arg(long)]
        states: String,
        /// Local charge on A (ChargeOperator JSON).
        #[arg(long)]
        charge: String,
        /// Output path.
        #[arg(long)]
        out: String,
        /// Output format.
        #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
        format: String,
    },
    /// Twirl each state of a dump by a charge family.
    Twirl {
        #[arg(long)]
        states: String,
        /// Charge family JSON file.
        #[arg(long)]
        family: String,
        #[arg(long)]
        out: String,
    },
    /// Decide symmetric separability for each state of a dump.
    Decide {
        #[arg(long)]
        states: String,
        /// Charge family JSON file (sum, product, or local kind).
        #[arg(long)]
        family: String,
        #[arg(long)]
        out: String,
    },
    /// Run a Monte-Carlo NE experiment from a config file.
    Experiment {
        /// ExperimentConfig JSON file.
        #[arg(long)]
        config: String,
        /// Output prefix; writes `<out>.results.json` and `<out>.hist.csv`.
        #[arg(long)]
        out: String,
        /// Also write `<out>.hist.svg`.
        #[arg(long)]
        svg: bool,
        /// Override the config's worker count (default: NELAB_WORKERS or
        /// the config value).
        #[arg(long)]
        workers: Option<usize>,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit a chi distribution to a column of values.
    Fit {
        /// Input CSV (one value per line; a non-numeric header is skipped).
        #[arg(long)]
        input: String,
        /// Output JSON path; stdout when omitted.
        #[arg(long)]
        out: Option<String>,
    },
}

/// Process-level error with its exit code class.
#[derive(Debug)]
pub struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    pub fn config(e: impl std::fmt::Display) -> Self {
        CliError {
            message: e.to_string(),
            code: 2,
        }
    }

    pub fn io(e: impl std::fmt::Display) -> Self {
        CliError {
            message: e.to_string(),
            code: 3,
        }
    }

    pub fn validation(e: impl std::fmt::Display) -> Self {
        CliError {
            message: e.to_string(),
            code: 4,
        }
    }

    pub fn numerical(e: impl std::fmt::Display) -> Self {
        CliError {
            message: e.to_string(),
            code: 5,
        }
    }

    pub fn from_core(e: nelab_core::Error) -> Self {
        let code = match e.class() {
            ErrorClass::Config => 2,
            ErrorClass::Dimension | ErrorClass::Validation => 4,
            ErrorClass::Numerical => 5,
        };
        CliError {
            message: e.to_string(),
            code,
        }
    }
}

impl From<nelab_core::Error> for CliError {
    fn from(e: nelab_core::Error) -> Self {
        CliError::from_core(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen {
            spec,
            count,
            seed,
            out,
        } => commands::gen(&spec, count, seed, &out),
        Command::Ne {
            states,
            charge,
            out,
            format,
        } => commands::ne(&states, &charge, &out, &format),
        Command::Twirl {
            states,
            family,
            out,
        } => commands::twirl(&states, &family, &out),
        Command::Decide {
            states,
            family,
            out,
        } => commands::decide(&states, &family, &out),
        Command::Experiment {
            config,
            out,
            svg,
            workers,
            seed,
        } => commands::experiment(&config, &out, svg, workers, seed),
        Command::Fit { input, out } => commands::fit(&input, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
