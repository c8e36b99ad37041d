use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use chansteer::Tolerances;

use crate::doc::DocError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
    InputError,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
            Status::InputError => 3,
        }
    }

    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
            Status::InputError => "INPUT_ERROR",
        }
    }
}

/// Outcome of one command. The body carries no timing so that identical
/// inputs always produce identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub status: Status,
    pub details: Value,
    pub tolerances: Tolerances,
}

impl Report {
    pub fn new(command: &str, status: Status, details: Value, tolerances: Tolerances) -> Self {
        Report { command: command.to_string(), status, details, tolerances }
    }

    pub fn input_error(command: &str, err: &DocError, tolerances: Tolerances) -> Self {
        let mut details = serde_json::to_value(err).expect("errors serialize");
        details["message"] = Value::String(err.to_string());
        Report::new(command, Status::InputError, details, tolerances)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// One `key: value` line per top-level detail, values as compact JSON.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.command, self.status.label());
        if let Value::Object(map) = &self.details {
            for (k, v) in map {
                let v = match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                let _ = writeln!(out, "  {k}: {v}");
            }
        } else {
            let _ = writeln!(out, "  {}", self.details);
        }
        let t = &self.tolerances;
        let _ = writeln!(out, "  tolerances: abs {:e}, rank {:e}, nnls {:e}", t.abs_tol, t.rank_rel_tol, t.nnls_residual_tol);
        out
    }
}
