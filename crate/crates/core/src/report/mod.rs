//! Findings, the fix catalog, majority voting across seeded runs, and report
//! rendering.

pub mod catalog;
mod document;
mod finding;
mod vote;

pub use catalog::{fix_for, CatalogEntry, CATALOG, CATALOG_VERSION};
pub use document::{
    parse_report, render_report, DatasetSummary, InterfaceSummary, Report, ReportFormat,
    RunRecord, SkippedCheck, Timing, Verdict, SCHEMA_VERSION,
};
pub use finding::{number, sort_findings, Evidence, EvidenceValue, Finding, Locus, Severity, Stage};
pub use vote::{majority_vote, validate_runs};
