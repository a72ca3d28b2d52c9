use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use nbrays::report::ValidationReport;
use nbrays::Error;
use serde::Serialize;
use serde_json::{json, Value};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_INVALID_INPUT: u8 = 2;
pub const EXIT_INCONCLUSIVE: u8 = 3;
pub const EXIT_CHECK_FAILED: u8 = 4;

/// One named check. `passed` is `None` for a check that was skipped.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub check: String,
    pub passed: Option<bool>,
    pub details: Value,
}

/// Machine-readable record of one invocation. Everything except
/// `timings_ms` is a function of the inputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: BTreeMap<String, Value>,
    pub outcomes: Vec<CheckOutcome>,
    pub timings_ms: BTreeMap<String, f64>,
    pub tool_version: String,
    pub configuration_digest: Option<String>,
    pub exit_code: u8,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            inputs: BTreeMap::new(),
            outcomes: Vec::new(),
            timings_ms: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            configuration_digest: None,
            exit_code: EXIT_OK,
        }
    }

    pub fn input(&mut self, key: &str, value: impl Serialize) {
        self.inputs.insert(key.to_string(), json!(value));
    }

    pub fn outcome(&mut self, check: &str, passed: Option<bool>, details: Value) {
        if passed == Some(false) {
            self.exit_code = self.exit_code.max(EXIT_CHECK_FAILED);
        }
        self.outcomes.push(CheckOutcome { check: check.to_string(), passed, details });
    }

    pub fn validation(&mut self, check: &str, report: &ValidationReport) {
        self.outcome(check, Some(report.passed), json!(report));
    }

    /// Runs `f` and records its wall time under `label`.
    pub fn timed<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.timings_ms.insert(label.to_string(), t.elapsed().as_secs_f64() * 1e3);
        out
    }

    pub fn finish(self) -> ExitCode {
        println!("{}", serde_json::to_string_pretty(&self).expect("report serializes"));
        ExitCode::from(self.exit_code)
    }
}

/// A failure that ends the command before a report is complete.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self { code: EXIT_INVALID_INPUT, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::AmbiguousOverlap { .. } | Error::SearchBudgetExceeded(_) => EXIT_INCONCLUSIVE,
            Error::PathMismatch { .. } => EXIT_CHECK_FAILED,
            _ => EXIT_INVALID_INPUT,
        };
        Self { code, message: e.to_string() }
    }
}
