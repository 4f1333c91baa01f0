//! Motion input: skeleton hierarchy plus a dense pose sequence.
//!
//! Two text formats are supported: the two-section hierarchical mocap
//! format ([`mocap`]) and a JSON pose interchange document
//! ([`interchange`]). Both produce a validated [`Motion`].

pub mod interchange;
pub mod mocap;
mod resample;

use nalgebra::{UnitQuaternion, Vector3};
use thiserror::Error;

use crate::kinematics::euler::AxisOrder;

pub use interchange::{parse_pose_interchange, serialize_pose_interchange};
pub use mocap::{parse_mocap_text, serialize_mocap_text, DEFAULT_SCALE};
pub use resample::resample;

/// Quaternions shorter than this cannot be normalized safely.
pub const DEGENERATE_NORM: f64 = 1e-3;

#[derive(Debug, Error, PartialEq)]
pub enum MotionError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: expected {expected} channel values, found {found}")]
    ChannelCountMismatch { line: usize, expected: usize, found: usize },
    #[error("line {line}: header declares {declared} frames, found {found}")]
    FrameCountMismatch { line: usize, declared: usize, found: usize },
    #[error("line {line}: frame time must be positive, got {value}")]
    InvalidFrameTime { line: usize, value: f64 },
    #[error("line {line}, column {column}: {message}")]
    Schema {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("frame {frame}, joint {joint}: degenerate rotation (norm {norm:e})")]
    DegenerateRotation { frame: usize, joint: usize, norm: f64 },
    #[error("frame {frame}: expected {expected} rotations, found {found}")]
    JointCountMismatch {
        frame: usize,
        expected: usize,
        found: usize,
    },
    #[error("invalid skeleton: {0}")]
    InvalidSkeleton(String),
    #[error("frame rate must be positive and finite, got {0}")]
    InvalidRate(f64),
    #[error("scale must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("pose sequence has no frames")]
    EmptySequence,
}

impl MotionError {
    /// Source line for errors raised while reading text, if known.
    pub fn line(&self) -> Option<usize> {
        match self {
            MotionError::Syntax { line, .. }
            | MotionError::ChannelCountMismatch { line, .. }
            | MotionError::FrameCountMismatch { line, .. }
            | MotionError::InvalidFrameTime { line, .. }
            | MotionError::Schema { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// A single animated channel declared in mocap text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Xposition,
    Yposition,
    Zposition,
    Xrotation,
    Yrotation,
    Zrotation,
}

impl Channel {
    pub fn parse(token: &str) -> Option<Channel> {
        Some(match token.to_ascii_lowercase().as_str() {
            "xposition" => Channel::Xposition,
            "yposition" => Channel::Yposition,
            "zposition" => Channel::Zposition,
            "xrotation" => Channel::Xrotation,
            "yrotation" => Channel::Yrotation,
            "zrotation" => Channel::Zrotation,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Xposition => "Xposition",
            Channel::Yposition => "Yposition",
            Channel::Zposition => "Zposition",
            Channel::Xrotation => "Xrotation",
            Channel::Yrotation => "Yrotation",
            Channel::Zrotation => "Zrotation",
        }
    }

    pub fn is_rotation(self) -> bool {
        matches!(self, Channel::Xrotation | Channel::Yrotation | Channel::Zrotation)
    }

    /// Axis index 0..3 for either kind of channel.
    pub fn axis_index(self) -> usize {
        match self {
            Channel::Xposition | Channel::Xrotation => 0,
            Channel::Yposition | Channel::Yrotation => 1,
            Channel::Zposition | Channel::Zrotation => 2,
        }
    }

    fn rotation_for(order: AxisOrder) -> [Channel; 3] {
        use crate::kinematics::euler::Axis;
        order.axes().map(|a| match a {
            Axis::X => Channel::Xrotation,
            Axis::Y => Channel::Yrotation,
            Axis::Z => Channel::Zrotation,
        })
    }

    /// Default layout used when a skeleton is built without mocap channel
    /// declarations: root gets positions plus rotations, others rotations only.
    pub fn default_layout(is_root: bool, order: AxisOrder) -> Vec<Channel> {
        let mut channels = Vec::with_capacity(6);
        if is_root {
            channels.extend([Channel::Xposition, Channel::Yposition, Channel::Zposition]);
        }
        channels.extend(Channel::rotation_for(order));
        channels
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointDef {
    pub name: String,
    pub parent: Option<usize>,
    /// Offset from the parent joint, meters, in the parent's local frame.
    pub offset: Vector3<f64>,
    /// Intrinsic Euler order of this joint's rotation channels.
    pub channel_order: AxisOrder,
    /// Channel layout as declared in mocap text; empty for end sites.
    pub channels: Vec<Channel>,
}

impl JointDef {
    pub fn new(name: impl Into<String>, parent: Option<usize>, offset: [f64; 3]) -> Self {
        let order = AxisOrder::default();
        Self {
            name: name.into(),
            parent,
            offset: Vector3::from(offset),
            channel_order: order,
            channels: Channel::default_layout(parent.is_none(), order),
        }
    }

    pub fn is_end_site(&self) -> bool {
        self.channels.is_empty()
    }
}

/// Named joint hierarchy in topological order.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    joints: Vec<JointDef>,
}

impl Skeleton {
    pub fn new(joints: Vec<JointDef>) -> Result<Self, MotionError> {
        let roots = joints.iter().filter(|j| j.parent.is_none()).count();
        if roots != 1 {
            return Err(MotionError::InvalidSkeleton(format!(
                "expected exactly one root joint, found {roots}"
            )));
        }
        let mut names = std::collections::HashSet::new();
        for (idx, joint) in joints.iter().enumerate() {
            if let Some(p) = joint.parent {
                if p >= idx {
                    return Err(MotionError::InvalidSkeleton(format!(
                        "joint `{}` (index {idx}) has parent {p}, which is not an earlier joint",
                        joint.name
                    )));
                }
            }
            if joint.name.is_empty() {
                return Err(MotionError::InvalidSkeleton(format!("joint {idx} has an empty name")));
            }
            if !names.insert(joint.name.as_str()) {
                return Err(MotionError::InvalidSkeleton(format!(
                    "duplicate joint name `{}`",
                    joint.name
                )));
            }
            if !joint.offset.iter().all(|v| v.is_finite()) {
                return Err(MotionError::InvalidSkeleton(format!(
                    "joint `{}` has a non-finite offset",
                    joint.name
                )));
            }
        }
        Ok(Self { joints })
    }

    pub fn joints(&self) -> &[JointDef] {
        &self.joints
    }

    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }

    pub fn joint(&self, idx: usize) -> &JointDef {
        &self.joints[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j.name == name)
    }

    pub fn children(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        self.joints
            .iter()
            .enumerate()
            .filter(move |(_, j)| j.parent == Some(idx))
            .map(|(i, _)| i)
    }

    /// True if `joint` is `ancestor` or lies below it in the hierarchy.
    pub fn is_descendant_or_self(&self, joint: usize, ancestor: usize) -> bool {
        let mut cur = Some(joint);
        while let Some(c) = cur {
            if c == ancestor {
                return true;
            }
            cur = self.joints[c].parent;
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    /// World position of the root joint, meters.
    pub root_translation: Vector3<f64>,
    /// Local rotation of each joint relative to its parent.
    pub rotations: Vec<UnitQuaternion<f64>>,
}

impl Frame {
    pub fn identity(joint_count: usize) -> Self {
        Self {
            root_translation: Vector3::zeros(),
            rotations: vec![UnitQuaternion::identity(); joint_count],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseSequence {
    frame_rate: f64,
    frames: Vec<Frame>,
}

impl PoseSequence {
    pub fn new(frame_rate: f64, frames: Vec<Frame>) -> Result<Self, MotionError> {
        if !(frame_rate.is_finite() && frame_rate > 0.0) {
            return Err(MotionError::InvalidRate(frame_rate));
        }
        let Some(first) = frames.first() else {
            return Err(MotionError::EmptySequence);
        };
        let expected = first.rotations.len();
        for (idx, frame) in frames.iter().enumerate() {
            if frame.rotations.len() != expected {
                return Err(MotionError::JointCountMismatch {
                    frame: idx,
                    expected,
                    found: frame.rotations.len(),
                });
            }
            if !frame.root_translation.iter().all(|v| v.is_finite()) {
                return Err(MotionError::Invalid {
                    path: format!("frames[{idx}]"),
                    message: "non-finite root translation".into(),
                });
            }
        }
        Ok(Self { frame_rate, frames })
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn duration(&self) -> f64 {
        (self.frames.len() - 1) as f64 / self.frame_rate
    }

    pub fn joint_count(&self) -> usize {
        self.frames[0].rotations.len()
    }
}

/// A skeleton together with a pose sequence whose frames match it.
#[derive(Debug, Clone, PartialEq)]
pub struct Motion {
    pub skeleton: Skeleton,
    pub sequence: PoseSequence,
}

impl Motion {
    pub fn new(skeleton: Skeleton, sequence: PoseSequence) -> Result<Self, MotionError> {
        if sequence.joint_count() != skeleton.len() {
            return Err(MotionError::JointCountMismatch {
                frame: 0,
                expected: skeleton.len(),
                found: sequence.joint_count(),
            });
        }
        Ok(Self { skeleton, sequence })
    }
}

/// Input formats understood by [`parse_motion`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionFormat {
    Mocap,
    Interchange,
}

impl MotionFormat {
    /// Guess from content: mocap text starts with the `HIERARCHY` keyword.
    pub fn detect(text: &str) -> MotionFormat {
        if text.trim_start().starts_with('{') {
            MotionFormat::Interchange
        } else {
            MotionFormat::Mocap
        }
    }

    pub fn from_extension(path: &std::path::Path) -> Option<MotionFormat> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "bvh" => Some(MotionFormat::Mocap),
            "json" => Some(MotionFormat::Interchange),
            _ => None,
        }
    }
}

/// Parse either supported format. `scale` only applies to mocap text.
pub fn parse_motion(text: &str, format: MotionFormat, scale: f64) -> Result<Motion, MotionError> {
    match format {
        MotionFormat::Mocap => parse_mocap_text(text, scale),
        MotionFormat::Interchange => parse_pose_interchange(text),
    }
}
