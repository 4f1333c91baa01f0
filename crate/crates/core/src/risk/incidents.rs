use serde::{Deserialize, Serialize};
use std::fmt;

use super::rules::{Region, RiskRule};
use super::RiskError;
use crate::format::serialize_sig6;
use crate::stream::{StreamSet, Unit};

/// Slack for comparing frame-count durations against second thresholds.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Low,
    Medium,
    High,
}

impl Severity {
    /// Contribution to a region's stress score.
    pub fn weight(self) -> f64 {
        match self {
            Severity::Low => 0.2,
            Severity::Medium => 0.5,
            Severity::High => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Low => "low",
            Severity::Medium => "medium",
            Severity::High => "high",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Inclusive frame span; `bridged` lists the inclusive gaps that were
/// merged over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub start: usize,
    pub end: usize,
    pub bridged: Vec<(usize, usize)>,
}

impl Run {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Maximal true runs, minus those shorter than `min_duration_s`, with
/// neighbours closer than `merge_gap_s` joined.
pub fn segment_runs(mask: &[bool], frame_rate: f64, min_duration_s: f64, merge_gap_s: f64) -> Vec<Run> {
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < mask.len() {
        if mask[i] {
            let start = i;
            while i + 1 < mask.len() && mask[i + 1] {
                i += 1;
            }
            runs.push((start, i));
        }
        i += 1;
    }
    let kept = runs
        .into_iter()
        .filter(|&(s, e)| (e - s + 1) as f64 / frame_rate + TIME_EPS >= min_duration_s);

    let mut merged: Vec<Run> = Vec::new();
    for (s, e) in kept {
        if let Some(last) = merged.last_mut() {
            let gap = s - last.end - 1;
            if (gap as f64) / frame_rate < merge_gap_s - TIME_EPS {
                last.bridged.push((last.end + 1, s - 1));
                last.end = e;
                continue;
            }
        }
        merged.push(Run {
            start: s,
            end: e,
            bridged: Vec::new(),
        });
    }
    merged
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incident {
    pub rule_id: String,
    pub label: String,
    pub region: Region,
    pub severity: Severity,
    pub start_frame: usize,
    pub end_frame: usize,
    pub peak_frame: usize,
    #[serde(serialize_with = "serialize_sig6")]
    pub start_s: f64,
    /// Exclusive end time: `(end_frame + 1) / frame_rate`.
    #[serde(serialize_with = "serialize_sig6")]
    pub end_s: f64,
    #[serde(serialize_with = "serialize_sig6")]
    pub duration_s: f64,
    pub measure: String,
    pub unit: Unit,
    #[serde(serialize_with = "serialize_sig6")]
    pub peak_value: f64,
    #[serde(serialize_with = "serialize_sig6")]
    pub margin: f64,
    pub bridged: Vec<[usize; 2]>,
}

/// Grade a peak by its relative margin past the rule's primary condition.
pub fn grade_severity(peak_value: f64, rule: &RiskRule) -> Severity {
    let margin = rule.primary_condition().comparator.relative_margin(peak_value);
    if margin <= rule.grading.low {
        Severity::Low
    } else if margin <= rule.grading.medium {
        Severity::Medium
    } else {
        Severity::High
    }
}

/// Segment a rule mask into graded incidents. The peak is the masked
/// frame with the largest primary-condition margin, earliest on ties.
pub fn detect_incidents(
    mask: &[bool],
    rule: &RiskRule,
    frame_rate: f64,
    streams: &StreamSet,
) -> Result<Vec<Incident>, RiskError> {
    if !(frame_rate.is_finite() && frame_rate > 0.0) {
        return Err(RiskError::InvalidRate(frame_rate));
    }
    let runs = segment_runs(mask, frame_rate, rule.min_duration_s, rule.merge_gap_s);
    if runs.is_empty() {
        return Ok(Vec::new());
    }
    let primary = rule.primary_condition();
    let stream = streams
        .get(&primary.measure)
        .ok_or_else(|| RiskError::MissingStream(primary.measure.clone()))?;
    if stream.len() != mask.len() {
        return Err(RiskError::LengthMismatch {
            measure: primary.measure.clone(),
            expected: mask.len(),
            found: stream.len(),
        });
    }
    Ok(runs
        .into_iter()
        .map(|run| {
            let mut peak = run.start;
            let mut best = f64::NEG_INFINITY;
            for (i, &v) in stream.samples.iter().enumerate().take(run.end + 1).skip(run.start) {
                let m = primary.comparator.margin(v);
                if mask[i] && m > best {
                    best = m;
                    peak = i;
                }
            }
            let peak_value = stream.samples[peak];
            Incident {
                rule_id: rule.id.clone(),
                label: rule.label.clone(),
                region: rule.region,
                severity: grade_severity(peak_value, rule),
                start_frame: run.start,
                end_frame: run.end,
                peak_frame: peak,
                start_s: run.start as f64 / frame_rate,
                end_s: (run.end + 1) as f64 / frame_rate,
                duration_s: run.len() as f64 / frame_rate,
                measure: primary.measure.clone(),
                unit: primary.unit,
                peak_value,
                margin: primary.comparator.relative_margin(peak_value),
                bridged: run.bridged.iter().map(|&(a, b)| [a, b]).collect(),
            }
        })
        .collect())
}
