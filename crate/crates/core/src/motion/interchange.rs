//! JSON pose interchange document.
//!
//! ```json
//! {
//!   "skeleton": { "joints": [ { "name": "Hips", "parent": null, "offset_m": [0, 0, 0] } ] },
//!   "frame_rate_hz": 30.0,
//!   "frames": [ { "root_translation_m": [0, 0.95, 0], "rotations": [[1, 0, 0, 0]] } ]
//! }
//! ```
//!
//! Quaternions are `(w, x, y, z)` and are normalized on read. A joint may
//! carry an optional `channel_order` used when converting to mocap text.

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::{Channel, Frame, JointDef, Motion, MotionError, PoseSequence, Skeleton, DEGENERATE_NORM};
use crate::kinematics::euler::AxisOrder;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    skeleton: SkeletonDoc,
    frame_rate_hz: f64,
    frames: Vec<FrameDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SkeletonDoc {
    joints: Vec<JointDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointDoc {
    name: String,
    parent: Option<usize>,
    offset_m: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    channel_order: Option<AxisOrder>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameDoc {
    root_translation_m: [f64; 3],
    rotations: Vec<[f64; 4]>,
}

pub fn parse_pose_interchange(text: &str) -> Result<Motion, MotionError> {
    let doc: Document = serde_json::from_str(text).map_err(|e| MotionError::Schema {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let joints = doc
        .skeleton
        .joints
        .into_iter()
        .map(|j| {
            let order = j.channel_order.unwrap_or_default();
            JointDef {
                channels: Channel::default_layout(j.parent.is_none(), order),
                name: j.name,
                parent: j.parent,
                offset: Vector3::from(j.offset_m),
                channel_order: order,
            }
        })
        .collect();
    let skeleton = Skeleton::new(joints)?;

    let mut frames = Vec::with_capacity(doc.frames.len());
    for (fi, f) in doc.frames.into_iter().enumerate() {
        if f.rotations.len() != skeleton.len() {
            return Err(MotionError::JointCountMismatch {
                frame: fi,
                expected: skeleton.len(),
                found: f.rotations.len(),
            });
        }
        let rotations = f
            .rotations
            .iter()
            .enumerate()
            .map(|(ji, &[w, x, y, z])| {
                let q = Quaternion::new(w, x, y, z);
                let norm = q.norm();
                if !norm.is_finite() || norm < DEGENERATE_NORM {
                    return Err(MotionError::DegenerateRotation {
                        frame: fi,
                        joint: ji,
                        norm,
                    });
                }
                Ok(UnitQuaternion::new_normalize(q))
            })
            .collect::<Result<Vec<_>, _>>()?;
        frames.push(Frame {
            root_translation: Vector3::from(f.root_translation_m),
            rotations,
        });
    }
    let sequence = PoseSequence::new(doc.frame_rate_hz, frames)?;
    Motion::new(skeleton, sequence)
}

pub fn serialize_pose_interchange(skeleton: &Skeleton, seq: &PoseSequence) -> Result<String, MotionError> {
    if seq.joint_count() != skeleton.len() {
        return Err(MotionError::JointCountMismatch {
            frame: 0,
            expected: skeleton.len(),
            found: seq.joint_count(),
        });
    }
    let doc = Document {
        skeleton: SkeletonDoc {
            joints: skeleton
                .joints()
                .iter()
                .map(|j| JointDoc {
                    name: j.name.clone(),
                    parent: j.parent,
                    offset_m: j.offset.into(),
                    channel_order: Some(j.channel_order),
                })
                .collect(),
        },
        frame_rate_hz: seq.frame_rate(),
        frames: seq
            .frames()
            .iter()
            .map(|f| FrameDoc {
                root_translation_m: f.root_translation.into(),
                rotations: f
                    .rotations
                    .iter()
                    .map(|q| {
                        let q = q.quaternion();
                        [q.w, q.i, q.j, q.k]
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("interchange document serializes");
    text.push('\n');
    Ok(text)
}
