//! Diagnostic reports: named scalar results with tolerances and a verdict,
//! serialized as JSON for the CLI and the acceptance suite.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportEntry {
    pub label: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// `{name, params, entries: [{label, value, tolerance, pass}], verdict}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub name: String,
    pub params: serde_json::Value,
    pub entries: Vec<ReportEntry>,
    pub verdict: Verdict,
}

impl DiagnosticReport {
    pub fn new(name: impl Into<String>, params: serde_json::Value) -> Self {
        DiagnosticReport {
            name: name.into(),
            params,
            entries: Vec::new(),
            verdict: Verdict::Pass,
        }
    }

    /// Record an entry; a failing entry flips the verdict.
    pub fn push(&mut self, label: impl Into<String>, value: f64, tolerance: f64, pass: bool) {
        self.entries.push(ReportEntry {
            label: label.into(),
            value,
            tolerance,
            pass,
        });
        if !pass {
            self.verdict = Verdict::Fail;
        }
    }

    /// Informational entry that never affects the verdict.
    pub fn note(&mut self, label: impl Into<String>, value: f64) {
        self.entries.push(ReportEntry {
            label: label.into(),
            value,
            tolerance: f64::INFINITY,
            pass: true,
        });
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// CSV of the entries: label,value,tolerance,pass
    pub fn entries_csv(&self) -> String {
        let mut out = String::from("label,value,tolerance,pass\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.label, e.value, e.tolerance, e.pass
            ));
        }
        out
    }
}
