//! Risk rules, incident segmentation, severity grading and session reports.

mod incidents;
mod report;
mod rules;

use thiserror::Error;

use crate::stream::Unit;

pub use incidents::{detect_incidents, grade_severity, segment_runs, Incident, Run, Severity};
pub use report::{aggregate, build_report, Aggregate, RiskReport, SessionInfo, SeverityCounts, Totals};
pub use rules::{evaluate_rule, Comparator, Condition, Grading, Region, RiskRule, RuleSet};

#[derive(Debug, Error, PartialEq)]
pub enum RiskError {
    #[error("no stream for measure `{0}`")]
    MissingStream(String),
    #[error("measure `{measure}`: rule expects unit `{expected}`, stream has `{found}`")]
    UnitMismatch {
        measure: String,
        expected: Unit,
        found: Unit,
    },
    #[error("measure `{measure}`: expected {expected} samples, found {found}")]
    LengthMismatch {
        measure: String,
        expected: usize,
        found: usize,
    },
    #[error("{path}: {message}")]
    InvalidRule { path: String, message: String },
    #[error("rule set line {line}, column {column}: {message}")]
    RuleFile {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("frame rate must be positive and finite, got {0}")]
    InvalidRate(f64),
}
