//! Structured outcomes of verification checks and the JSON report schema.

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Whether a check held.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// One verified statement together with the data that justifies the verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    /// The mathematical statement being checked, in words.
    pub anchor: String,
    /// Residuals, classes or witnesses backing the verdict.
    pub data: Value,
    /// Wall time in milliseconds; omitted from deterministic output.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, ok: bool, anchor: impl Into<String>, data: Value) -> Self {
        CheckRecord { name: name.into(), status: Status::from_bool(ok), anchor: anchor.into(), data, elapsed_ms: None }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// A complete run: tool version, the configuration used and all checks in
/// name order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub config: Value,
    pub status: Status,
    pub checks: Vec<CheckRecord>,
}

impl Report {
    pub fn new(config: Value, mut checks: Vec<CheckRecord>) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let status = Status::from_bool(checks.iter().all(CheckRecord::passed));
        Report { tool_version: env!("CARGO_PKG_VERSION").to_string(), config, status, checks }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// One line per check: `PASS name  anchor`.
    pub fn to_text(&self) -> String {
        let mut out = format!("superbv {}\n", self.tool_version);
        for c in &self.checks {
            let tag = if c.passed() { "PASS" } else { "FAIL" };
            out.push_str(&format!("{tag} {}  [{}]\n", c.name, c.anchor));
            if !c.passed() {
                out.push_str(&format!("     {}\n", c.data));
            }
        }
        out.push_str(&format!(
            "{} of {} checks passed\n",
            self.checks.iter().filter(|c| c.passed()).count(),
            self.checks.len()
        ));
        out
    }
}
