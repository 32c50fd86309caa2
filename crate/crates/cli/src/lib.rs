//! The `cts` command-line tool: protocol runs, process validation, the
//! teleportation demo and contraction benchmarks. Every command prints one
//! JSON report on stdout; wall-clock timings sit under the top-level
//! `timings` key so reports can be compared after removing it.

pub mod commands;
pub mod scenario;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SPEC_MISMATCH: i32 = 3;
pub const EXIT_TOO_LARGE: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        message: String,
        line: usize,
        column: usize,
    },
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] cts_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use cts_core::Error as E;
        match self {
            CliError::Parse { .. } | CliError::Io(_) => EXIT_INPUT,
            CliError::Core(E::ContractTooLarge { .. }) => EXIT_TOO_LARGE,
            CliError::Core(
                E::SpecMismatch(_)
                | E::LabelMismatch(_)
                | E::DimMismatch { .. }
                | E::LabelCollision(_)
                | E::UnknownLabel(_),
            ) => EXIT_SPEC_MISMATCH,
            CliError::Core(_) => EXIT_INPUT,
        }
    }

    fn kind(&self) -> &'static str {
        use cts_core::Error as E;
        match self {
            CliError::Parse { .. } => "parse",
            CliError::Io(_) => "io",
            CliError::Core(E::ContractTooLarge { .. }) => "contract_too_large",
            CliError::Core(E::SpecMismatch(_)) => "spec_mismatch",
            CliError::Core(E::BadDimension(_)) => "bad_dimension",
            CliError::Core(_) if self.exit_code() == EXIT_SPEC_MISMATCH => "spec_mismatch",
            CliError::Core(_) => "invalid_input",
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({ "kind": self.kind(), "message": self.to_string() });
        match self {
            CliError::Parse { line, column, .. } => {
                v["line"] = json!(line);
                v["column"] = json!(column);
            }
            CliError::Core(cts_core::Error::ContractTooLarge { peak, cap }) => {
                v["peak_dim"] = json!(peak);
                v["cap"] = json!(cap);
            }
            _ => {}
        }
        v
    }
}

#[derive(Debug, Parser)]
#[command(name = "cts", version, about = "Teleport parties of quantum processes and check the statistics")]
pub struct Cli {
    /// Numerical tolerance for all checks (overrides the scenario).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for random instruments and sampled strategies (overrides the scenario).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Largest intermediate operator dimension allowed.
    #[arg(long, global = true, env = "CTS_MAX_DIM")]
    pub max_dim: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario's protocol and compare it with the direct statistics.
    Run { scenario: PathBuf },
    /// Check that a process is valid.
    Validate {
        /// A scenario file or a bare process spec.
        process: PathBuf,
        /// Random strategies for the normalisation check.
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Also sample with an entangled ancilla of this dimension per party.
        #[arg(long)]
        ancilla_dim: Option<usize>,
    },
    /// Teleport a random state through every Bell outcome.
    TeleportDemo {
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Show the contraction plan of a scenario's protocol network.
    Bench { scenario: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Run { .. } => "run",
            Command::Validate { .. } => "validate",
            Command::TeleportDemo { .. } => "teleport-demo",
            Command::Bench { .. } => "bench",
        }
    }
}

/// A finished command: the report, the process exit code and an optional
/// extra destination requested by the scenario.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub exit_code: i32,
    pub write_to: Option<PathBuf>,
}

pub fn execute(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::Run { scenario } => commands::run(cli, scenario),
        Command::Validate {
            process,
            samples,
            ancilla_dim,
        } => commands::validate(cli, process, *samples, *ancilla_dim),
        Command::TeleportDemo { dim } => commands::teleport_demo(cli, *dim),
        Command::Bench { scenario } => commands::bench(cli, scenario),
    };
    let mut out = match result {
        Ok(o) => o,
        Err(failure) => {
            let mut report = Map::new();
            report.insert("command".into(), json!(cli.command.name()));
            report.insert("passed".into(), json!(false));
            report.insert("error".into(), failure.error.to_json());
            report.extend(failure.extra);
            Outcome {
                report: Value::Object(report),
                exit_code: failure.error.exit_code(),
                write_to: None,
            }
        }
    };
    if let Some(path) = &cli.out {
        out.write_to = Some(path.clone());
    }
    out
}

/// An error plus whatever partial report was assembled before it.
#[derive(Debug)]
pub struct Failure {
    pub error: CliError,
    pub extra: Map<String, Value>,
}

impl<E: Into<CliError>> From<E> for Failure {
    fn from(e: E) -> Self {
        Self {
            error: e.into(),
            extra: Map::new(),
        }
    }
}

/// The report without its `timings` entry.
pub fn strip_timings(report: &Value) -> Value {
    let mut r = report.clone();
    if let Some(obj) = r.as_object_mut() {
        obj.remove("timings");
    }
    r
}
