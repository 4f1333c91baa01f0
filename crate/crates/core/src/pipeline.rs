//! End-to-end orchestration shared by the CLI, the service and the C API.

use std::path::Path;

use crate::dynamics::{self, ContactParams, ContactState, SegmentTable};
use crate::error::Result;
use crate::kinematics::{self, BindingTable, GlobalPose};
use crate::motion::Motion;
use crate::risk::{self, Incident, Region, RiskReport, RuleSet, SessionInfo};
use crate::signal::{self, FilterSpec};
use crate::stream::{MetricStream, StreamSet};

/// Rule, binding and segment tables for a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Assets {
    pub rules: RuleSet,
    pub bindings: BindingTable,
    pub segments: SegmentTable,
}

impl Default for Assets {
    fn default() -> Self {
        Self {
            rules: RuleSet::default_rules(),
            bindings: BindingTable::default_table(),
            segments: SegmentTable::default_table(),
        }
    }
}

/// Numeric session parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub body_mass_kg: f64,
    pub filter: FilterSpec,
    pub contact: ContactParams,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            body_mass_kg: crate::config::DEFAULT_BODY_MASS_KG,
            filter: FilterSpec::default(),
            contact: ContactParams::default(),
        }
    }
}

/// Everything upstream of the risk layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Kinematics {
    pub poses: Vec<GlobalPose>,
    pub contact: ContactState,
    pub streams: StreamSet,
}

fn derived_id(measure: &str, suffix: &str) -> String {
    format!("{}_{suffix}", measure.strip_suffix("_deg").unwrap_or(measure))
}

/// Angle stream plus velocity and acceleration of its smoothed version.
/// Sequences too short to filter are differentiated unsmoothed; a single
/// frame yields zero rates.
fn angle_family(angle: MetricStream, filter: &FilterSpec) -> Result<[MetricStream; 3]> {
    let n = angle.len();
    let base = if n >= filter.min_len() {
        signal::smooth(&angle, filter)?
    } else {
        log::warn!(
            "{}: {n} samples, skipping smoothing (needs {})",
            angle.measure,
            filter.min_len()
        );
        angle.clone()
    };
    let (mut vel, mut acc) = if n >= 2 {
        let v = signal::differentiate(&base)?;
        let a = signal::differentiate(&v)?;
        (v, a)
    } else {
        let zero = |u| MetricStream::new(angle.measure.clone(), u, angle.frame_rate, vec![0.0; n]);
        (zero(crate::Unit::DegPerSec), zero(crate::Unit::DegPerSec2))
    };
    vel.measure = derived_id(&angle.measure, "vel");
    acc.measure = derived_id(&angle.measure, "acc");
    Ok([angle, vel, acc])
}

/// Angles, angular rates and joint loads for a motion. Stream order:
/// angle, `_vel`, `_acc` per binding, then `_load_n`/`_load_bw` per load
/// joint.
pub fn compute_kinematics(motion: &Motion, assets: &Assets, settings: &Settings) -> Result<Kinematics> {
    let (skeleton, seq) = (&motion.skeleton, &motion.sequence);
    let rate = seq.frame_rate();
    settings.filter.validate(rate)?;
    let poses = kinematics::forward_kinematics_sequence(skeleton, seq)?;

    let mut streams = StreamSet::default();
    for angle in kinematics::extract_all_streams(skeleton, seq, assets.bindings.bindings())? {
        for s in angle_family(angle, &settings.filter)? {
            streams.push(s);
        }
    }

    let model = dynamics::segment_parameters(skeleton, settings.body_mass_kg, &assets.segments)?;
    let contact =
        dynamics::detect_contact_from_poses(skeleton, &poses, rate, &assets.segments.feet, &settings.contact)?;
    for s in dynamics::joint_load_streams(
        skeleton,
        &poses,
        rate,
        &model,
        &contact,
        &assets.segments.load_joints,
        &settings.filter,
    )? {
        streams.push(s);
    }
    debug_assert!(streams.iter().all(|s| s.len() == seq.len() && s.is_finite()));
    Ok(Kinematics {
        poses,
        contact,
        streams,
    })
}

/// Evaluate every rule and assemble the report.
pub fn assess(streams: &StreamSet, rules: &RuleSet, session: SessionInfo) -> Result<RiskReport> {
    rules.validate()?;
    rules.validate_against(streams)?;
    let mut incidents: Vec<Incident> = Vec::new();
    for rule in &rules.rules {
        let mask = risk::evaluate_rule(streams, rule)?;
        incidents.extend(risk::detect_incidents(&mask, rule, session.frame_rate_hz, streams)?);
    }
    let agg = risk::aggregate(&incidents, &Region::ALL);
    Ok(risk::build_report(session, streams, incidents, agg))
}

/// Base name of a source path, or the text itself when it has none.
pub fn source_name(source: &str) -> String {
    Path::new(source)
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| source.to_owned())
}

/// A completed analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub motion: Motion,
    pub settings: Settings,
    pub kinematics: Kinematics,
    pub rules: RuleSet,
    pub report: RiskReport,
}

impl Analysis {
    pub fn run(source: &str, motion: Motion, assets: &Assets, settings: &Settings) -> Result<Self> {
        let kinematics = compute_kinematics(&motion, assets, settings)?;
        let seq = &motion.sequence;
        let session = SessionInfo {
            source: source_name(source),
            frame_rate_hz: seq.frame_rate(),
            frame_count: seq.len(),
            duration_s: seq.len() as f64 / seq.frame_rate(),
            body_mass_kg: settings.body_mass_kg,
        };
        let report = assess(&kinematics.streams, &assets.rules, session)?;
        Ok(Self {
            motion,
            settings: *settings,
            kinematics,
            rules: assets.rules.clone(),
            report,
        })
    }

    /// Same streams, new rules: only the risk layer is recomputed.
    pub fn reevaluate(&self, rules: RuleSet) -> Result<Self> {
        let report = assess(&self.kinematics.streams, &rules, self.report.session.clone())?;
        Ok(Self {
            rules,
            report,
            ..self.clone()
        })
    }

    pub fn streams(&self) -> &StreamSet {
        &self.kinematics.streams
    }
}
