//! Anatomical measures as signed Euler components of a joint's local rotation.
//!
//! Default rig convention: Y up, the subject faces +Z, and +X points to the
//! subject's left. The shipped table decomposes in `XYZ` order so that
//! flexion/extension is the first angle, axial rotation the middle one and
//! abduction/adduction the last.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::euler::{self, AxisOrder};
use super::KinematicsError;
use crate::motion::{PoseSequence, Skeleton};
use crate::stream::{MetricStream, Unit};

const DEFAULT_TABLE: &str = include_str!("../../data/default_bindings.json");

/// Maps a measure id to one Euler component of one joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnatomicalBinding {
    pub measure: String,
    pub joint: String,
    pub order: AxisOrder,
    pub component: usize,
    pub sign: f64,
    #[serde(default)]
    pub neutral_offset_deg: f64,
}

impl AnatomicalBinding {
    /// Anatomical value for a raw Euler triple.
    pub fn apply(&self, angles: [f64; 3]) -> f64 {
        self.sign * angles[self.component] - self.neutral_offset_deg
    }

    fn validate(&self, path: &str) -> Result<(), KinematicsError> {
        let invalid = |message: String| KinematicsError::InvalidBinding {
            path: path.to_owned(),
            message,
        };
        if self.measure.is_empty() {
            return Err(invalid("measure id is empty".into()));
        }
        if self.component > 2 {
            return Err(invalid(format!("component must be 0, 1 or 2, got {}", self.component)));
        }
        if self.sign != 1.0 && self.sign != -1.0 {
            return Err(invalid(format!("sign must be +1 or -1, got {}", self.sign)));
        }
        if !self.neutral_offset_deg.is_finite() {
            return Err(invalid("neutral offset must be finite".into()));
        }
        Ok(())
    }
}

/// Ordered, validated list of bindings with unique measure ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableDoc", into = "TableDoc")]
pub struct BindingTable {
    bindings: Vec<AnatomicalBinding>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableDoc {
    bindings: Vec<AnatomicalBinding>,
}

impl TryFrom<TableDoc> for BindingTable {
    type Error = KinematicsError;

    fn try_from(doc: TableDoc) -> Result<Self, Self::Error> {
        BindingTable::new(doc.bindings)
    }
}

impl From<BindingTable> for TableDoc {
    fn from(t: BindingTable) -> Self {
        TableDoc { bindings: t.bindings }
    }
}

impl BindingTable {
    pub fn new(bindings: Vec<AnatomicalBinding>) -> Result<Self, KinematicsError> {
        let mut seen = HashSet::new();
        for (i, b) in bindings.iter().enumerate() {
            let path = format!("bindings[{i}]");
            b.validate(&path)?;
            if !seen.insert(b.measure.as_str()) {
                return Err(KinematicsError::InvalidBinding {
                    path,
                    message: format!("measure `{}` is bound more than once", b.measure),
                });
            }
        }
        Ok(Self { bindings })
    }

    /// The shipped ankle/knee/hip/trunk table for the default rig.
    pub fn default_table() -> Self {
        Self::from_json(DEFAULT_TABLE).expect("shipped binding table is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, KinematicsError> {
        let doc: TableDoc = serde_json::from_str(text).map_err(|e| KinematicsError::BindingFile {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::new(doc.bindings)
    }

    pub fn bindings(&self) -> &[AnatomicalBinding] {
        &self.bindings
    }

    pub fn get(&self, measure: &str) -> Result<&AnatomicalBinding, KinematicsError> {
        self.bindings
            .iter()
            .find(|b| b.measure == measure)
            .ok_or_else(|| KinematicsError::UnknownMeasure(measure.to_owned()))
    }

    /// Stream for a measure id from this table.
    pub fn stream(
        &self,
        skeleton: &Skeleton,
        seq: &PoseSequence,
        measure: &str,
    ) -> Result<MetricStream, KinematicsError> {
        anatomical_angle_stream(skeleton, seq, self.get(measure)?)
    }
}

/// Per-frame anatomical angle (degrees) of the binding's joint.
pub fn anatomical_angle_stream(
    skeleton: &Skeleton,
    seq: &PoseSequence,
    binding: &AnatomicalBinding,
) -> Result<MetricStream, KinematicsError> {
    let joint = skeleton
        .index_of(&binding.joint)
        .ok_or_else(|| KinematicsError::UnknownJoint(binding.joint.clone()))?;
    if seq.joint_count() != skeleton.len() {
        return Err(KinematicsError::JointCountMismatch {
            expected: skeleton.len(),
            found: seq.joint_count(),
        });
    }
    let samples: Vec<f64> = seq
        .frames()
        .iter()
        .map(|f| binding.apply(euler::decompose(&f.rotations[joint], binding.order)))
        .collect();
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(KinematicsError::NonFinite(binding.measure.clone()));
    }
    Ok(MetricStream::new(
        binding.measure.clone(),
        Unit::Deg,
        seq.frame_rate(),
        samples,
    ))
}

/// One angle stream per binding, in binding order.
pub fn extract_all_streams(
    skeleton: &Skeleton,
    seq: &PoseSequence,
    bindings: &[AnatomicalBinding],
) -> Result<Vec<MetricStream>, KinematicsError> {
    bindings
        .iter()
        .map(|b| anatomical_angle_stream(skeleton, seq, b))
        .collect()
}
