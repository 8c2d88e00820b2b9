//! Machine-readable run reports: every command emits the achieved defect
//! metrics (never just pass/fail) together with the configuration echo.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::{CliError, CommonOpts};

#[derive(Serialize)]
pub struct Report {
    pub command: String,
    pub tol_alg: f64,
    pub tol_pde: f64,
    pub seed: u64,
    pub config: Value,
    /// Named defect metrics, all achieved values.
    pub defects: BTreeMap<String, f64>,
    /// Command-specific payload.
    pub values: Value,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &str, common: &CommonOpts, config: Value) -> Self {
        Report {
            command: command.into(),
            tol_alg: common.tol_alg,
            tol_pde: common.tol_pde,
            seed: common.seed,
            config,
            defects: BTreeMap::new(),
            values: Value::Null,
            pass: true,
        }
    }

    pub fn defect(&mut self, name: &str, value: f64, tol: f64) {
        self.defects.insert(name.into(), value);
        if !(value <= tol) {
            self.pass = false;
        }
    }

    pub fn info(&mut self, name: &str, value: f64) {
        self.defects.insert(name.into(), value);
    }

    /// Serializes, writes to stdout (always) and finishes with the exit
    /// status demanded by the pass flag. A closed pipe is not an error.
    pub fn finish(self) -> Result<(), CliError> {
        use std::io::Write;
        let text = serde_json::to_string_pretty(&self).map_err(|e| CliError::Io(e.to_string()))?;
        let mut stdout = std::io::stdout().lock();
        match writeln!(stdout, "{text}") {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            Err(e) => return Err(CliError::Io(e.to_string())),
        }
        if self.pass {
            Ok(())
        } else {
            Err(CliError::CheckFailed(format!(
                "{}: defects exceed tolerance (see report)",
                self.command
            )))
        }
    }
}

pub fn write_file(path: &str, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{path}: {e}")))
}

pub fn read_file(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))
}
