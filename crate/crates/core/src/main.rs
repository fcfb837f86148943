use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use ncurv::commands::{self, Command, RunOptions};
use ncurv::scenario::{self, Overrides};

/// Used by `selftest` when no scenario file is given.
const BUILTIN: &str = r#"{
    "name": "builtin",
    "seed": 0,
    "triple": {
        "gamma": [1, -1],
        "dirac": [[0, 1], [1, 0]],
        "basis": [[[1, 0], [0, 1]], [[1, 0], [0, 0]]]
    }
}"#;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Curvature of connections over finite spectral triples.
#[derive(Debug, Parser)]
#[command(name = "ncurv", version)]
struct Cli {
    /// Residual tolerance, overriding the scenario's.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Relative rank tolerance, overriding the scenario's.
    #[arg(long = "rank-tol", global = true)]
    rank_tol: Option<f64>,
    /// Seed for generated data, overriding the scenario's.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Include full matrices in the result.
    #[arg(long = "emit-matrices", global = true)]
    emit_matrices: bool,
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: Format,
    /// validate, forms, junk, curvature, correspondence, external,
    /// product-spectrum, submersion or selftest.
    command: Command,
    /// Scenario file (JSON). Optional for selftest only.
    scenario: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let overrides = Overrides {
        tol: cli.tol,
        rank_tol: cli.rank_tol,
        seed: cli.seed,
    };
    let parsed = match (&cli.scenario, cli.command) {
        (Some(path), _) => scenario::parse_scenario(path, overrides),
        (None, Command::Selftest) => scenario::parse_bytes(BUILTIN.as_bytes(), "builtin", overrides),
        (None, c) => {
            eprintln!("error: {c} needs a scenario file");
            return ExitCode::from(2);
        }
    };
    let sc = match parsed {
        Ok(sc) => sc,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let opts = RunOptions {
        emit_matrices: cli.emit_matrices,
        ..RunOptions::default()
    };
    match commands::run(cli.command, &sc, opts) {
        Ok(doc) => {
            match cli.format {
                Format::Text => print!("{}", doc.to_text()),
                Format::Json => print!("{}", doc.to_json()),
            }
            if doc.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
