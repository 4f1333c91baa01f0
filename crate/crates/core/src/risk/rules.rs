//! Declarative threshold rules over metric streams.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::RiskError;
use crate::stream::{StreamSet, Unit};

const DEFAULT_RULES: &str = include_str!("../../data/default_rules.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Region {
    #[serde(rename = "ankle_l")]
    AnkleL,
    #[serde(rename = "ankle_r")]
    AnkleR,
    #[serde(rename = "hip_l")]
    HipL,
    #[serde(rename = "hip_r")]
    HipR,
    #[serde(rename = "knee_l")]
    KneeL,
    #[serde(rename = "knee_r")]
    KneeR,
    #[serde(rename = "trunk")]
    Trunk,
}

impl Region {
    /// All regions, sorted by name.
    pub const ALL: [Region; 7] = [
        Region::AnkleL,
        Region::AnkleR,
        Region::HipL,
        Region::HipR,
        Region::KneeL,
        Region::KneeR,
        Region::Trunk,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Region::AnkleL => "ankle_l",
            Region::AnkleR => "ankle_r",
            Region::HipL => "hip_l",
            Region::HipR => "hip_r",
            Region::KneeL => "knee_l",
            Region::KneeR => "knee_r",
            Region::Trunk => "trunk",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Comparator {
    Gt { value: f64 },
    Ge { value: f64 },
    Lt { value: f64 },
    Le { value: f64 },
    InRange { low: f64, high: f64 },
    OutOfRange { low: f64, high: f64 },
}

impl Comparator {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Comparator::Gt { value } => v > value,
            Comparator::Ge { value } => v >= value,
            Comparator::Lt { value } => v < value,
            Comparator::Le { value } => v <= value,
            Comparator::InRange { low, high } => (low..=high).contains(&v),
            Comparator::OutOfRange { low, high } => v < low || v > high,
        }
    }

    /// Signed distance past the threshold; positive when the value is
    /// beyond it (or inside the band, for `in_range`).
    pub fn margin(&self, v: f64) -> f64 {
        match *self {
            Comparator::Gt { value } | Comparator::Ge { value } => v - value,
            Comparator::Lt { value } | Comparator::Le { value } => value - v,
            Comparator::InRange { low, high } => (v - low).min(high - v),
            Comparator::OutOfRange { low, high } => (low - v).max(v - high),
        }
    }

    /// Margin normalized by the violated threshold magnitude, or by the band
    /// width for `in_range`. A zero threshold normalizes by 1.
    pub fn relative_margin(&self, v: f64) -> f64 {
        let rel = |diff: f64, t: f64| diff.abs() / if t == 0.0 { 1.0 } else { t.abs() };
        match *self {
            Comparator::Gt { value }
            | Comparator::Ge { value }
            | Comparator::Lt { value }
            | Comparator::Le { value } => rel(v - value, value),
            Comparator::InRange { low, high } => (v - low).min(high - v).abs() / (high - low),
            Comparator::OutOfRange { low, high } => {
                if v > high {
                    rel(v - high, high)
                } else {
                    rel(low - v, low)
                }
            }
        }
    }

    fn validate(&self) -> Result<(), String> {
        match *self {
            Comparator::Gt { value }
            | Comparator::Ge { value }
            | Comparator::Lt { value }
            | Comparator::Le { value }
                if !value.is_finite() =>
            {
                Err("threshold must be finite".into())
            }
            Comparator::InRange { low, high } | Comparator::OutOfRange { low, high } => {
                if !(low.is_finite() && high.is_finite()) {
                    Err("range bounds must be finite".into())
                } else if low >= high {
                    Err(format!("range requires low < high, got [{low}, {high}]"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub measure: String,
    #[serde(flatten)]
    pub comparator: Comparator,
    pub unit: Unit,
}

impl Condition {
    pub fn new(measure: impl Into<String>, comparator: Comparator, unit: Unit) -> Self {
        Self {
            measure: measure.into(),
            comparator,
            unit,
        }
    }
}

/// Relative-margin cut points for severity grading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grading {
    /// Margins up to this fraction grade as low.
    pub low: f64,
    /// Margins up to this fraction grade as medium; anything above is high.
    pub medium: f64,
}

impl Default for Grading {
    fn default() -> Self {
        Self {
            low: 0.10,
            medium: 0.25,
        }
    }
}

fn default_min_duration() -> f64 {
    0.05
}

fn default_merge_gap() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskRule {
    pub id: String,
    pub label: String,
    pub region: Region,
    pub conditions: Vec<Condition>,
    /// Index of the condition used for peak selection and grading.
    #[serde(default)]
    pub primary: usize,
    #[serde(default = "default_min_duration")]
    pub min_duration_s: f64,
    #[serde(default = "default_merge_gap")]
    pub merge_gap_s: f64,
    #[serde(default)]
    pub grading: Grading,
}

impl RiskRule {
    pub fn primary_condition(&self) -> &Condition {
        &self.conditions[self.primary]
    }

    pub fn validate(&self, path: &str) -> Result<(), RiskError> {
        let invalid = |p: String, message: String| RiskError::InvalidRule { path: p, message };
        if self.id.is_empty() {
            return Err(invalid(path.to_owned(), "rule id is empty".into()));
        }
        if self.conditions.is_empty() {
            return Err(invalid(
                path.to_owned(),
                format!("rule `{}` has no conditions", self.id),
            ));
        }
        for (i, c) in self.conditions.iter().enumerate() {
            c.comparator
                .validate()
                .map_err(|m| invalid(format!("{path}.conditions[{i}]"), m))?;
        }
        if self.primary >= self.conditions.len() {
            return Err(invalid(
                format!("{path}.primary"),
                format!(
                    "index {} out of range for {} conditions",
                    self.primary,
                    self.conditions.len()
                ),
            ));
        }
        if !(self.min_duration_s.is_finite() && self.min_duration_s >= 0.0) {
            return Err(invalid(format!("{path}.min_duration_s"), "must be non-negative".into()));
        }
        if !(self.merge_gap_s.is_finite() && self.merge_gap_s >= 0.0) {
            return Err(invalid(format!("{path}.merge_gap_s"), "must be non-negative".into()));
        }
        let g = self.grading;
        if !(g.low.is_finite() && g.medium.is_finite() && 0.0 <= g.low && g.low <= g.medium) {
            return Err(invalid(format!("{path}.grading"), "requires 0 <= low <= medium".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSet {
    pub rules: Vec<RiskRule>,
}

impl RuleSet {
    pub fn new(rules: Vec<RiskRule>) -> Result<Self, RiskError> {
        let set = Self { rules };
        set.validate()?;
        Ok(set)
    }

    pub fn default_rules() -> Self {
        Self::from_json(DEFAULT_RULES).expect("shipped rule set is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, RiskError> {
        let set: RuleSet = serde_json::from_str(text).map_err(|e| RiskError::RuleFile {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        set.validate()?;
        Ok(set)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("rule set serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<(), RiskError> {
        let mut ids = HashSet::new();
        for (i, r) in self.rules.iter().enumerate() {
            let path = format!("rules[{i}]");
            r.validate(&path)?;
            if !ids.insert(r.id.as_str()) {
                return Err(RiskError::InvalidRule {
                    path,
                    message: format!("duplicate rule id `{}`", r.id),
                });
            }
        }
        Ok(())
    }

    /// Check every condition against the available streams.
    pub fn validate_against(&self, streams: &StreamSet) -> Result<(), RiskError> {
        for (i, r) in self.rules.iter().enumerate() {
            for (j, c) in r.conditions.iter().enumerate() {
                let path = format!("rules[{i}].conditions[{j}]");
                let s = streams.get(&c.measure).ok_or_else(|| RiskError::InvalidRule {
                    path: path.clone(),
                    message: format!("measure `{}` is not an available stream", c.measure),
                })?;
                if s.unit != c.unit {
                    return Err(RiskError::InvalidRule {
                        path,
                        message: format!("unit `{}` does not match stream unit `{}`", c.unit, s.unit),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Per-frame AND of all rule conditions.
pub fn evaluate_rule(streams: &StreamSet, rule: &RiskRule) -> Result<Vec<bool>, RiskError> {
    let mut mask: Option<Vec<bool>> = None;
    for c in &rule.conditions {
        let s = streams
            .get(&c.measure)
            .ok_or_else(|| RiskError::MissingStream(c.measure.clone()))?;
        if s.unit != c.unit {
            return Err(RiskError::UnitMismatch {
                measure: c.measure.clone(),
                expected: c.unit,
                found: s.unit,
            });
        }
        match &mut mask {
            None => mask = Some(s.samples.iter().map(|v| c.comparator.holds(*v)).collect()),
            Some(m) => {
                if m.len() != s.len() {
                    return Err(RiskError::LengthMismatch {
                        measure: c.measure.clone(),
                        expected: m.len(),
                        found: s.len(),
                    });
                }
                for (flag, v) in m.iter_mut().zip(&s.samples) {
                    *flag = *flag && c.comparator.holds(*v);
                }
            }
        }
    }
    Ok(mask.unwrap_or_default())
}
