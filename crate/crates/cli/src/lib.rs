//! Scenario files, the built-in scenario library, and report rendering for
//! the `topodyn` command.

pub mod builtin;
pub mod render;
pub mod run;
pub mod scenario;

use std::fmt;
use std::path::{Path, PathBuf};

pub use run::{aggregate, run_scenario, RunOptions, RunReport};
pub use scenario::{CheckSpec, MeshSpec, Prepared, Scenario};

/// Errors that stop a run before any check executes (exit code 2).
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Validation(String),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid scenario: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

/// A scenario file if `arg` names one, otherwise a built-in scenario.
pub fn resolve(arg: &str) -> Result<Prepared, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        let (s, base) = scenario::load_file(path)?;
        return Prepared::new(s, base);
    }
    match builtin::find(arg) {
        Some(s) => Prepared::new(s, PathBuf::new()),
        None => Err(CliError::Validation(format!(
            "no scenario file or built-in scenario named '{arg}' (see --list-scenarios)"
        ))),
    }
}

/// Serialized report; equal inputs give byte-identical output apart from
/// the `runtime_ms` fields.
pub fn report_json(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}
