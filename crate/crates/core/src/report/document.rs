use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::finding::{Finding, Stage};
use crate::error::{Error, Result};
use crate::spec::{DataInterface, ModelInterface, ModelSpec};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn of(findings: &[Finding]) -> Verdict {
        if findings.iter().any(Finding::is_error) {
            Verdict::Fail
        } else {
            Verdict::Pass
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        }
    }
}

/// Shape of the dataset that was checked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSummary {
    pub rows: usize,
    pub features: usize,
    pub label: String,
}

/// The interfaces and inputs a stage was checked against.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceSummary {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_interface: Option<DataInterface>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_interface: Option<ModelInterface>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_spec: Option<ModelSpec>,
}

/// A check that was not executed, and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkippedCheck {
    pub check: String,
    pub reason: String,
}

/// Raw findings of one seeded run of the stochastic checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub findings: Vec<Finding>,
}

/// Wall-clock time spent in one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timing {
    pub check: String,
    pub millis: f64,
}

/// Outcome of checking one pipeline stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub stage: Stage,
    pub interfaces: InterfaceSummary,
    /// Every threshold and the seed the stage ran with.
    pub config: Value,
    pub executed_checks: Vec<String>,
    pub skipped_checks: Vec<SkippedCheck>,
    /// Final findings: deterministic ones plus majority-voted stochastic ones.
    pub findings: Vec<Finding>,
    pub verdict: Verdict,
    /// Per-run findings of the stochastic checks before voting.
    pub runs: Vec<RunRecord>,
    /// Wall-clock measurements; not reproducible, so they can be dropped for
    /// byte-identical output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Vec<Timing>>,
}

impl Report {
    pub fn errors(&self) -> usize {
        self.findings.iter().filter(|f| f.is_error()).count()
    }

    pub fn warnings(&self) -> usize {
        self.findings.len() - self.errors()
    }

    pub fn has_finding(&self, check_id: &str) -> bool {
        self.findings.iter().any(|f| f.check_id == check_id)
    }

    pub fn without_timings(mut self) -> Self {
        self.timings = None;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Text,
    Json,
}

/// Renders a report. JSON output is pretty-printed and parses back to an
/// equal report; text output lists one finding per line as
/// `check_id [severity] message → fix`.
pub fn render_report(report: &Report, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_string_pretty(report)
                .map_err(|e| Error::contract(format!("report is not serializable: {e}")))?;
            out.push('\n');
            Ok(out)
        }
        ReportFormat::Text => Ok(render_text(report)),
    }
}

pub fn parse_report(text: &str) -> Result<Report> {
    serde_json::from_str(text).map_err(|e| Error::parse(format!("report: {e}")))
}

fn render_text(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} stage: {} ({} error(s), {} warning(s))",
        report.stage,
        report.verdict.as_str(),
        report.errors(),
        report.warnings()
    );
    let _ = writeln!(out, "executed: {}", report.executed_checks.join(", "));
    for skipped in &report.skipped_checks {
        let _ = writeln!(out, "skipped: {} ({})", skipped.check, skipped.reason);
    }
    for f in &report.findings {
        let _ = writeln!(out, "{} [{}] {} → {}", f.check_id, f.severity, f.message, f.fix);
    }
    if let Some(timings) = &report.timings {
        for t in timings {
            let _ = writeln!(out, "time: {} {:.1} ms", t.check, t.millis);
        }
    }
    out
}
