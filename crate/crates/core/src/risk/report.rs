use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::incidents::{Incident, Severity};
use super::rules::Region;
use crate::format::serialize_sig6;
use crate::stream::StreamSet;

/// Stress score saturates once severity weights reach this sum.
pub const STRESS_NORMALIZER: f64 = 2.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeverityCounts {
    pub low: usize,
    pub medium: usize,
    pub high: usize,
}

impl SeverityCounts {
    pub fn total(&self) -> usize {
        self.low + self.medium + self.high
    }

    fn add(&mut self, s: Severity) {
        match s {
            Severity::Low => self.low += 1,
            Severity::Medium => self.medium += 1,
            Severity::High => self.high += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub distribution: BTreeMap<Region, SeverityCounts>,
    pub stress_scores: BTreeMap<Region, f64>,
}

/// Severity histogram and stress score per region. Every region in
/// `regions` appears, zero-filled when it has no incidents.
pub fn aggregate(incidents: &[Incident], regions: &[Region]) -> Aggregate {
    let mut distribution: BTreeMap<Region, SeverityCounts> =
        regions.iter().map(|r| (*r, SeverityCounts::default())).collect();
    let mut weights: BTreeMap<Region, f64> = regions.iter().map(|r| (*r, 0.0)).collect();
    for inc in incidents {
        distribution.entry(inc.region).or_default().add(inc.severity);
        *weights.entry(inc.region).or_default() += inc.severity.weight();
    }
    let stress_scores = weights
        .into_iter()
        .map(|(r, w)| (r, (w / STRESS_NORMALIZER).min(1.0)))
        .collect();
    Aggregate {
        distribution,
        stress_scores,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub source: String,
    #[serde(serialize_with = "serialize_sig6")]
    pub frame_rate_hz: f64,
    pub frame_count: usize,
    #[serde(serialize_with = "serialize_sig6")]
    pub duration_s: f64,
    #[serde(serialize_with = "serialize_sig6")]
    pub body_mass_kg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub incidents: usize,
    pub low: usize,
    pub medium: usize,
    pub high: usize,
    pub max_severity: Option<Severity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub session: SessionInfo,
    pub incidents: Vec<Incident>,
    pub distribution: BTreeMap<Region, SeverityCounts>,
    #[serde(serialize_with = "serialize_scores")]
    pub stress_scores: BTreeMap<Region, f64>,
    pub totals: Totals,
}

fn serialize_scores<S: serde::Serializer>(m: &BTreeMap<Region, f64>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_map(m.iter().map(|(k, v)| (k, crate::format::sig6(*v))))
}

impl RiskReport {
    /// Pretty JSON with stable key order and six-significant-digit floats.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Assemble the session report. Incidents are ordered by start time, then
/// region name, then rule id.
pub fn build_report(
    mut session: SessionInfo,
    streams: &StreamSet,
    mut incidents: Vec<Incident>,
    aggregates: Aggregate,
) -> RiskReport {
    if let Some(s) = streams.iter().next() {
        session.frame_count = s.len();
    }
    incidents.sort_by(|a, b| {
        a.start_frame
            .cmp(&b.start_frame)
            .then_with(|| a.region.as_str().cmp(b.region.as_str()))
            .then_with(|| a.rule_id.cmp(&b.rule_id))
    });
    let mut counts = SeverityCounts::default();
    for inc in &incidents {
        counts.add(inc.severity);
    }
    let totals = Totals {
        incidents: incidents.len(),
        low: counts.low,
        medium: counts.medium,
        high: counts.high,
        max_severity: incidents.iter().map(|i| i.severity).max(),
    };
    RiskReport {
        session,
        incidents,
        distribution: aggregates.distribution,
        stress_scores: aggregates.stress_scores,
        totals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::Unit;

    fn incident(region: Region, severity: Severity, start: usize, id: &str) -> Incident {
        Incident {
            rule_id: id.into(),
            label: id.into(),
            region,
            severity,
            start_frame: start,
            end_frame: start + 3,
            peak_frame: start,
            start_s: start as f64 / 30.0,
            end_s: (start + 4) as f64 / 30.0,
            duration_s: 4.0 / 30.0,
            measure: "m".into(),
            unit: Unit::Deg,
            peak_value: 1.0,
            margin: 0.5,
            bridged: vec![],
        }
    }

    fn session() -> SessionInfo {
        SessionInfo {
            source: "s.bvh".into(),
            frame_rate_hz: 30.0,
            frame_count: 0,
            duration_s: 1.0,
            body_mass_kg: 70.0,
        }
    }

    #[test]
    fn no_incidents_means_zero_scores() {
        let agg = aggregate(&[], &Region::ALL);
        assert!(agg.distribution.values().all(|c| c.total() == 0));
        assert!(agg.stress_scores.values().all(|s| *s == 0.0));
        let report = build_report(session(), &StreamSet::default(), vec![], agg);
        assert_eq!(report.totals.incidents, 0);
        assert_eq!(report.totals.max_severity, None);
    }

    #[test]
    fn high_incidents_accumulate_and_cap() {
        let one = aggregate(&[incident(Region::AnkleL, Severity::High, 0, "r")], &Region::ALL);
        assert_eq!(one.stress_scores[&Region::AnkleL], 0.5);
        assert_eq!(one.stress_scores[&Region::KneeL], 0.0);
        let three: Vec<_> = (0..3)
            .map(|i| incident(Region::AnkleL, Severity::High, i * 10, "r"))
            .collect();
        assert_eq!(aggregate(&three, &Region::ALL).stress_scores[&Region::AnkleL], 1.0);
    }

    #[test]
    fn equal_starts_sort_by_region_name() {
        let incs = vec![
            incident(Region::KneeL, Severity::Low, 5, "b"),
            incident(Region::AnkleR, Severity::Medium, 5, "a"),
            incident(Region::Trunk, Severity::High, 1, "c"),
        ];
        let agg = aggregate(&incs, &Region::ALL);
        let report = build_report(session(), &StreamSet::default(), incs, agg);
        let order: Vec<_> = report.incidents.iter().map(|i| i.region).collect();
        assert_eq!(order, vec![Region::Trunk, Region::AnkleR, Region::KneeL]);
        assert_eq!(report.totals.max_severity, Some(Severity::High));
        let hist: usize = report.distribution.values().map(|c| c.total()).sum();
        assert_eq!(hist, report.totals.incidents);
    }

    #[test]
    fn serialization_is_stable() {
        let incs = vec![incident(Region::KneeL, Severity::Low, 5, "b")];
        let agg = aggregate(&incs, &Region::ALL);
        let a = build_report(session(), &StreamSet::default(), incs.clone(), agg.clone()).to_json();
        let b = build_report(session(), &StreamSet::default(), incs, agg).to_json();
        assert_eq!(a, b);
        assert!(a.contains("\"start_s\": 0.166667"));
    }
}
