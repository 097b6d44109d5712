use std::fmt;
use std::path::Path;

use krein_kit::io::{OperatorJson, SCHEMA};
use krein_kit::{KreinError, Mat};
use serde_json::{json, Map, Value};

/// Failure of a command, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed input, unreadable file or schema violation (exit 2).
    Input(String),
    /// A mathematical precondition does not hold (exit 1).
    Precondition(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Precondition(_) => 1,
            CliError::Input(_) => 2,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            CliError::Precondition(_) => "precondition_failed",
            CliError::Input(_) => "input_error",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Precondition(m) => f.write_str(m),
        }
    }
}

impl From<KreinError> for CliError {
    fn from(e: KreinError) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Precondition(e.to_string())
        }
    }
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("malformed JSON in {}: {e}", path.display())))
}

/// Accepts a bare object or a report carrying it under `outputs.<key>`.
pub fn unwrap_report(value: Value, key: &str) -> Value {
    if value.get("schema").is_some() {
        if let Some(inner) = value.get("outputs").and_then(|o| o.get(key)) {
            return inner.clone();
        }
    }
    value
}

pub fn parse<T: serde::de::DeserializeOwned>(value: Value, what: &str, path: &Path) -> Result<T, CliError> {
    serde_json::from_value(value)
        .map_err(|e| CliError::Input(format!("{} does not match the {what} schema: {e}", path.display())))
}

pub fn load_operator(path: &Path) -> Result<OperatorJson, CliError> {
    parse(unwrap_report(read_json(path)?, "operator"), "operator", path)
}

pub fn matrix(m: &Mat) -> Value {
    json!(OperatorJson::from_mat(m))
}

/// A report under construction. Every command fills `inputs`, `outputs`,
/// `residuals` and `checks`; the envelope is added by [`Report::finish`].
#[derive(Debug, Default)]
pub struct Report {
    pub inputs: Map<String, Value>,
    pub outputs: Map<String, Value>,
    pub residuals: Map<String, Value>,
    pub checks: Map<String, Value>,
}

impl Report {
    pub fn input(&mut self, key: &str, value: impl Into<Value>) {
        self.inputs.insert(key.into(), value.into());
    }

    pub fn input_file(&mut self, key: &str, path: &Path, value: impl Into<Value>) {
        self.inputs.insert(key.into(), json!({"path": path.display().to_string(), "value": value.into()}));
    }

    pub fn output(&mut self, key: &str, value: impl Into<Value>) {
        self.outputs.insert(key.into(), value.into());
    }

    pub fn residual(&mut self, key: &str, value: f64) {
        self.residuals.insert(key.into(), json!(value));
    }

    /// Records a pass/fail flag; returns it for convenience.
    pub fn check(&mut self, key: &str, passed: bool) -> bool {
        self.checks.insert(key.into(), json!(passed));
        passed
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.values().all(|v| v.as_bool().unwrap_or(true))
    }

    pub fn finish(self, command: &str, result: &Result<(), CliError>) -> (Value, i32) {
        let (status, code, error) = match result {
            Ok(()) => ("ok", 0, Value::Null),
            Err(e) => (e.status(), e.exit_code(), json!(e.to_string())),
        };
        let mut out = json!({
            "schema": SCHEMA,
            "command": command,
            "status": status,
            "exit_code": code,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "residuals": self.residuals,
            "checks": self.checks,
        });
        if !error.is_null() {
            out["error"] = error;
        }
        (out, code)
    }
}
