use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Certified,
    NotCertified,
    EvidenceOnly,
    InvalidInput,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Certified | Verdict::EvidenceOnly => 0,
            Verdict::NotCertified => 1,
            Verdict::InvalidInput => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub report_version: u32,
    pub tool_version: String,
    pub command: String,
    pub manifest_fingerprint: String,
    /// Wall-clock seconds; only filled in with `--timing`, which makes the
    /// report non-reproducible.
    pub timing: Option<f64>,
    pub verdict: Verdict,
    pub diagnostics: Vec<String>,
    /// Effective parameters after flag overrides.
    pub parameters: BTreeMap<String, Value>,
    /// Numerical tolerances the command relied on.
    pub tolerances: BTreeMap<String, f64>,
    pub result: Value,
}

impl Report {
    pub fn new(command: &str, fingerprint: String) -> Self {
        Self {
            report_version: REPORT_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            manifest_fingerprint: fingerprint,
            timing: None,
            verdict: Verdict::EvidenceOnly,
            diagnostics: Vec::new(),
            parameters: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            result: Value::Null,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }
}
