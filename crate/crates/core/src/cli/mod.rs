//! The `gerbe` command line: scenario validation, holonomy, randomized axiom
//! suites and example generation. Output is JSON on stdout. Exit codes are
//! 0 on success, 1 on a validation failure and 2 on an I/O or parse error.

pub mod axioms;
pub mod commands;
pub mod examples;
pub mod scenario;

use clap::{Parser, Subcommand};
use examples::{Example, ExampleParams, JandlKind};
use scenario::{from_json, to_json, Mode, Scenario};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "gerbe", version, about = "Bundle gerbes on finite simplicial surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check every axiom of the objects in a scenario file.
    Validate {
        /// Scenario file, or `-` for stdin.
        file: PathBuf,
    },
    /// Surface holonomy of the scenario's gerbe.
    Holonomy {
        file: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Recompute under a second trivialization seed (and fundamental domain).
        #[arg(long)]
        check_independence: bool,
    },
    /// Run the randomized property suites.
    Axioms {
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a canonical example scenario.
    Example {
        #[arg(value_enum)]
        name: Example,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        indices: usize,
        #[arg(long, default_value_t = 1)]
        rank: usize,
        #[arg(long, value_enum, default_value_t = JandlKind::Twisted)]
        jandl: JandlKind,
        /// Output file; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn read_scenario(path: &PathBuf) -> Result<Scenario, String> {
    let text = if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin()).map_err(|e| e.to_string())?
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?
    };
    from_json(&text).map_err(|e| e.to_string())
}

fn emit(out: &mut dyn Write, value: &impl serde::Serialize) -> i32 {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    match writeln!(out, "{text}") {
        Ok(()) => EXIT_OK,
        Err(_) => EXIT_IO,
    }
}

fn fail(err: &mut dyn Write, code: i32, msg: &str) -> i32 {
    let _ = writeln!(err, "error: {msg}");
    code
}

/// Runs the command line with the given arguments, writing to `out` and `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_IO } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match cli.command {
        Command::Validate { file } => {
            let doc = match read_scenario(&file) {
                Ok(d) => d,
                Err(m) => return fail(err, EXIT_IO, &m),
            };
            let v = commands::cmd_validate(&doc);
            match emit(out, &v) {
                EXIT_OK if !v.ok => EXIT_INVALID,
                c => c,
            }
        }
        Command::Holonomy { file, mode, seed, check_independence } => {
            let doc = match read_scenario(&file) {
                Ok(d) => d,
                Err(m) => return fail(err, EXIT_IO, &m),
            };
            match commands::cmd_holonomy(&doc, mode, seed, check_independence) {
                Ok(rec) => {
                    let independent = rec.independence.as_ref().is_none_or(|i| i.ok);
                    match emit(out, &rec) {
                        EXIT_OK if !independent => EXIT_INVALID,
                        c => c,
                    }
                }
                Err(e) => fail(err, EXIT_INVALID, &e.to_string()),
            }
        }
        Command::Axioms { cases, seed } => {
            let r = axioms::run_axioms(cases, seed);
            match emit(out, &r) {
                EXIT_OK if !r.is_ok() => EXIT_INVALID,
                c => c,
            }
        }
        Command::Example { name, theta, seed, indices, rank, jandl, output } => {
            let p = ExampleParams { theta, seed, indices, rank, jandl };
            let doc = match examples::example(name, &p) {
                Ok(d) => d,
                Err(e) => return fail(err, EXIT_INVALID, &e.to_string()),
            };
            let text = to_json(&doc);
            match output {
                Some(path) => match std::fs::write(&path, text + "\n") {
                    Ok(()) => EXIT_OK,
                    Err(e) => fail(err, EXIT_IO, &format!("{}: {e}", path.display())),
                },
                None => match writeln!(out, "{text}") {
                    Ok(()) => EXIT_OK,
                    Err(_) => EXIT_IO,
                },
            }
        }
    }
}

pub fn run() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

#[cfg(test)]
mod tests;
