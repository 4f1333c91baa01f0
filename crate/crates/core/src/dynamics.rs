//! Rigid-segment, quasi-static joint load estimation.
//!
//! Segment centers of mass come from forward kinematics; their
//! accelerations are the filtered second derivative of position. A joint
//! on a limb in ground contact carries a share of the whole-body load
//! `m_total * |a_com - g|`; a swinging limb's joint carries the inertial and
//! gravitational load of the segments distal to it.

use std::collections::HashSet;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{forward_kinematics_sequence, GlobalPose, KinematicsError};
use crate::motion::{PoseSequence, Skeleton};
use crate::signal::{self, FilterSpec, SignalError};
use crate::stream::{MetricStream, Unit};

pub const GRAVITY: f64 = 9.81;

const DEFAULT_TABLE: &str = include_str!("../data/default_segments.json");

pub fn gravity() -> Vector3<f64> {
    Vector3::new(0.0, -GRAVITY, 0.0)
}

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("body mass must be positive and finite, got {0}")]
    NonPositiveMass(f64),
    #[error("{role} references joint `{joint}`, which is not in the skeleton")]
    MissingJoint { role: String, joint: String },
    #[error("{path}: {message}")]
    InvalidTable { path: String, message: String },
    #[error("segment table line {line}, column {column}: {message}")]
    TableFile {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("expected {expected} frames, found {found}")]
    FrameCountMismatch { expected: usize, found: usize },
    #[error("unknown load joint `{0}`")]
    UnknownJoint(String),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentDef {
    pub segment: String,
    pub proximal: String,
    pub distal: String,
    pub mass_fraction: f64,
    /// Center-of-mass position from the proximal joint, as a fraction of length.
    pub com_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Feet {
    pub left: String,
    pub right: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadJoint {
    /// Stream prefix, e.g. `left_ankle` yields `left_ankle_load_n`.
    pub id: String,
    pub joint: String,
    pub side: Side,
}

/// Anthropometric table plus the joints used for contact and load output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentTable {
    pub segments: Vec<SegmentDef>,
    pub feet: Feet,
    pub load_joints: Vec<LoadJoint>,
}

impl SegmentTable {
    pub fn default_table() -> Self {
        Self::from_json(DEFAULT_TABLE).expect("shipped segment table is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, DynamicsError> {
        let table: SegmentTable = serde_json::from_str(text).map_err(|e| DynamicsError::TableFile {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let invalid = |path: String, message: String| DynamicsError::InvalidTable { path, message };
        if self.segments.is_empty() {
            return Err(invalid("segments".into(), "no segments".into()));
        }
        let mut names = HashSet::new();
        for (i, s) in self.segments.iter().enumerate() {
            let path = format!("segments[{i}]");
            if !(s.mass_fraction.is_finite() && s.mass_fraction > 0.0) {
                return Err(invalid(
                    path,
                    format!("mass_fraction must be positive, got {}", s.mass_fraction),
                ));
            }
            if !(0.0..=1.0).contains(&s.com_ratio) {
                return Err(invalid(
                    path,
                    format!("com_ratio must lie in [0, 1], got {}", s.com_ratio),
                ));
            }
            if !names.insert(s.segment.as_str()) {
                return Err(invalid(path, format!("duplicate segment `{}`", s.segment)));
            }
        }
        let total: f64 = self.segments.iter().map(|s| s.mass_fraction).sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(invalid(
                "segments".into(),
                format!("mass fractions sum to {total}, expected 1"),
            ));
        }
        let mut ids = HashSet::new();
        for (i, j) in self.load_joints.iter().enumerate() {
            if !ids.insert(j.id.as_str()) {
                return Err(invalid(format!("load_joints[{i}]"), format!("duplicate id `{}`", j.id)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub name: String,
    pub proximal: usize,
    pub distal: usize,
    pub mass_fraction: f64,
    pub mass_kg: f64,
    pub com_ratio: f64,
}

/// Segment masses resolved against a skeleton.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentModel {
    pub segments: Vec<Segment>,
    pub body_mass_kg: f64,
}

impl SegmentModel {
    pub fn total_mass(&self) -> f64 {
        self.segments.iter().map(|s| s.mass_kg).sum()
    }

    pub fn body_weight(&self) -> f64 {
        self.body_mass_kg * GRAVITY
    }
}

fn resolve(skeleton: &Skeleton, role: &str, joint: &str) -> Result<usize, DynamicsError> {
    skeleton.index_of(joint).ok_or_else(|| DynamicsError::MissingJoint {
        role: role.to_owned(),
        joint: joint.to_owned(),
    })
}

/// Resolve the table against `skeleton`; each segment mass is
/// `mass_fraction * body_mass_kg`.
pub fn segment_parameters(
    skeleton: &Skeleton,
    body_mass_kg: f64,
    table: &SegmentTable,
) -> Result<SegmentModel, DynamicsError> {
    if !(body_mass_kg.is_finite() && body_mass_kg > 0.0) {
        return Err(DynamicsError::NonPositiveMass(body_mass_kg));
    }
    table.validate()?;
    let segments = table
        .segments
        .iter()
        .map(|s| {
            let role = format!("segment `{}`", s.segment);
            Ok(Segment {
                name: s.segment.clone(),
                proximal: resolve(skeleton, &role, &s.proximal)?,
                distal: resolve(skeleton, &role, &s.distal)?,
                mass_fraction: s.mass_fraction,
                mass_kg: s.mass_fraction * body_mass_kg,
                com_ratio: s.com_ratio,
            })
        })
        .collect::<Result<Vec<_>, DynamicsError>>()?;
    Ok(SegmentModel { segments, body_mass_kg })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContactParams {
    pub height_tolerance_m: f64,
    pub speed_tolerance_mps: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        Self {
            height_tolerance_m: 0.05,
            speed_tolerance_mps: 0.2,
        }
    }
}

/// Per-frame foot contact flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContactState {
    pub left: Vec<bool>,
    pub right: Vec<bool>,
}

impl ContactState {
    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    pub fn side(&self, side: Side) -> &[bool] {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn feet_down(&self, frame: usize) -> usize {
        self.left[frame] as usize + self.right[frame] as usize
    }
}

/// 3-sample majority vote with edge replication.
pub fn median3(flags: &[bool]) -> Vec<bool> {
    let n = flags.len();
    (0..n)
        .map(|i| {
            let prev = flags[i.saturating_sub(1)];
            let next = flags[(i + 1).min(n - 1)];
            (prev as u8 + flags[i] as u8 + next as u8) >= 2
        })
        .collect()
}

pub fn detect_contact(
    skeleton: &Skeleton,
    seq: &PoseSequence,
    feet: &Feet,
    params: &ContactParams,
) -> Result<ContactState, DynamicsError> {
    let poses = forward_kinematics_sequence(skeleton, seq)?;
    detect_contact_from_poses(skeleton, &poses, seq.frame_rate(), feet, params)
}

/// A foot is down when its height is within tolerance of the lowest foot
/// height in the sequence and its vertical speed is below tolerance.
pub fn detect_contact_from_poses(
    skeleton: &Skeleton,
    poses: &[GlobalPose],
    rate: f64,
    feet: &Feet,
    params: &ContactParams,
) -> Result<ContactState, DynamicsError> {
    let left = resolve(skeleton, "left foot", &feet.left)?;
    let right = resolve(skeleton, "right foot", &feet.right)?;
    let heights = |j: usize| poses.iter().map(|p| p.positions[j].y).collect::<Vec<f64>>();
    let (hl, hr) = (heights(left), heights(right));
    let floor = hl.iter().chain(&hr).copied().fold(f64::INFINITY, f64::min);
    let flags = |h: &[f64]| -> Result<Vec<bool>, DynamicsError> {
        let speed = if h.len() >= 2 {
            signal::derivative(h, rate)?
        } else {
            vec![0.0; h.len()]
        };
        let raw: Vec<bool> = h
            .iter()
            .zip(&speed)
            .map(|(y, v)| y - floor <= params.height_tolerance_m && v.abs() < params.speed_tolerance_mps)
            .collect();
        Ok(median3(&raw))
    };
    Ok(ContactState {
        left: flags(&hl)?,
        right: flags(&hr)?,
    })
}

/// Filtered second derivative of a 3D trajectory: differentiate twice,
/// then low-pass the acceleration when the series is long enough.
fn acceleration(track: &[Vector3<f64>], rate: f64, filter: &FilterSpec) -> Result<Vec<Vector3<f64>>, DynamicsError> {
    let n = track.len();
    if n < 2 {
        return Ok(vec![Vector3::zeros(); n]);
    }
    let mut axes = [Vec::new(), Vec::new(), Vec::new()];
    for (k, axis) in axes.iter_mut().enumerate() {
        let x: Vec<f64> = track.iter().map(|p| p[k]).collect();
        let acc = signal::derivative(&signal::derivative(&x, rate)?, rate)?;
        *axis = if n >= filter.min_len() {
            signal::filtfilt(&acc, rate, filter)?
        } else {
            acc
        };
    }
    Ok((0..n)
        .map(|i| Vector3::new(axes[0][i], axes[1][i], axes[2][i]))
        .collect())
}

/// Per-segment center-of-mass accelerations, indexed `[segment][frame]`.
pub fn segment_accelerations(
    model: &SegmentModel,
    poses: &[GlobalPose],
    rate: f64,
    filter: &FilterSpec,
) -> Result<Vec<Vec<Vector3<f64>>>, DynamicsError> {
    model
        .segments
        .iter()
        .map(|s| {
            let track: Vec<Vector3<f64>> = poses
                .iter()
                .map(|p| p.positions[s.proximal].lerp(&p.positions[s.distal], s.com_ratio))
                .collect();
            acceleration(&track, rate, filter)
        })
        .collect()
}

/// Load streams for every configured joint: `<id>_load_n` (N) followed by
/// `<id>_load_bw` (body-weight multiples).
pub fn joint_load_streams(
    skeleton: &Skeleton,
    poses: &[GlobalPose],
    rate: f64,
    model: &SegmentModel,
    contact: &ContactState,
    load_joints: &[LoadJoint],
    filter: &FilterSpec,
) -> Result<Vec<MetricStream>, DynamicsError> {
    if contact.len() != poses.len() || contact.right.len() != poses.len() {
        return Err(DynamicsError::FrameCountMismatch {
            expected: poses.len(),
            found: contact.len(),
        });
    }
    let n = poses.len();
    let g = gravity();
    let acc = segment_accelerations(model, poses, rate, filter)?;
    let total = model.total_mass();
    let com_acc: Vec<Vector3<f64>> = (0..n)
        .map(|i| {
            model
                .segments
                .iter()
                .zip(&acc)
                .map(|(s, a)| a[i] * s.mass_kg)
                .sum::<Vector3<f64>>()
                / total
        })
        .collect();

    let mut out = Vec::with_capacity(2 * load_joints.len());
    for lj in load_joints {
        let joint = skeleton
            .index_of(&lj.joint)
            .ok_or_else(|| DynamicsError::UnknownJoint(lj.joint.clone()))?;
        let distal: Vec<usize> = model
            .segments
            .iter()
            .enumerate()
            .filter(|(_, s)| skeleton.is_descendant_or_self(s.proximal, joint))
            .map(|(k, _)| k)
            .collect();
        let stance = contact.side(lj.side);
        let newtons: Vec<f64> = (0..n)
            .map(|i| {
                if stance[i] {
                    total * (com_acc[i] - g).norm() / contact.feet_down(i) as f64
                } else {
                    distal
                        .iter()
                        .map(|&k| (acc[k][i] - g) * model.segments[k].mass_kg)
                        .sum::<Vector3<f64>>()
                        .norm()
                }
            })
            .collect();
        let bw: Vec<f64> = newtons.iter().map(|f| f / model.body_weight()).collect();
        out.push(MetricStream::new(
            format!("{}_load_n", lj.id),
            Unit::Newton,
            rate,
            newtons,
        ));
        out.push(MetricStream::new(
            format!("{}_load_bw", lj.id),
            Unit::BodyWeight,
            rate,
            bw,
        ));
    }
    Ok(out)
}

/// Convenience wrapper computing forward kinematics internally.
pub fn joint_load_stream(
    skeleton: &Skeleton,
    seq: &PoseSequence,
    model: &SegmentModel,
    contact: &ContactState,
    load_joint: &LoadJoint,
    filter: &FilterSpec,
) -> Result<(MetricStream, MetricStream), DynamicsError> {
    let poses = forward_kinematics_sequence(skeleton, seq)?;
    let mut s = joint_load_streams(
        skeleton,
        &poses,
        seq.frame_rate(),
        model,
        contact,
        std::slice::from_ref(load_joint),
        filter,
    )?;
    let bw = s.pop().expect("two streams");
    let n = s.pop().expect("two streams");
    Ok((n, bw))
}
