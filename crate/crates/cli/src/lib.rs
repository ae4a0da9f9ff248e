//! Command-line front end: flags and JSON inputs in, deterministic JSON
//! reports and CI exit codes out.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::time::Instant;

use clap::Parser;
use thiserror::Error;

pub use config::{parse_inputs, Command, Inputs, RawArgs, RunConfig};
pub use report::Report;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Bad flags, unreadable files, malformed input or a size cap.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{0}")]
pub struct UsageError(pub String);

impl UsageError {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

/// Runs one verification. Mathematical precondition failures (a nonabelian
/// group, a space that is not an operator system) yield verdict false.
pub fn run(config: &RunConfig) -> Result<(Report, i32), UsageError> {
    let start = Instant::now();
    let outcome = match commands::execute(&config.inputs, config.jobs) {
        Ok(o) => o,
        Err(commands::Failure::Precondition(msg)) => commands::Outcome {
            verdict: false,
            details: serde_json::json!({ "precondition_failed": msg }),
        },
        Err(commands::Failure::Input(msg)) => return Err(UsageError(msg)),
    };
    let report = Report {
        command: config.inputs.command,
        inputs: config.inputs.clone(),
        verdict: outcome.verdict,
        details: outcome.details,
        elapsed_ms: config.timing.then(|| start.elapsed().as_millis() as u64),
    };
    let code = if report.verdict { EXIT_PASS } else { EXIT_FAIL };
    Ok((report, code))
}

fn single_line(text: &str) -> String {
    let line = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .unwrap_or("invalid arguments");
    line.trim().trim_start_matches("error: ").to_string()
}

/// Full process behavior; returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let raw = match RawArgs::try_parse_from(args) {
        Ok(raw) => raw,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_PASS;
            }
            eprintln!("error: {}", single_line(&e.to_string()));
            return EXIT_USAGE;
        }
    };
    let result = parse_inputs(raw).and_then(|config| run(&config).map(|r| (config, r)));
    let (config, (report, code)) = match result {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {}", single_line(&e.0));
            return EXIT_USAGE;
        }
    };
    let text = if config.human {
        report.to_human()
    } else {
        report.to_json()
    };
    let written = match &config.output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| format!("cannot write report: {e}")),
    };
    if let Err(msg) = written {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    code
}
