//! Forward kinematics and anatomical joint-angle extraction.

pub mod anatomy;
pub mod euler;
mod fk;

use thiserror::Error;

pub use anatomy::{anatomical_angle_stream, extract_all_streams, AnatomicalBinding, BindingTable};
pub use euler::{from_euler, to_euler, Axis, AxisOrder};
pub use fk::{forward_kinematics, forward_kinematics_sequence, GlobalPose};

#[derive(Debug, Error, PartialEq)]
pub enum KinematicsError {
    #[error("frame has {found} rotations but the skeleton has {expected} joints")]
    JointCountMismatch { expected: usize, found: usize },
    #[error("quaternion is not unit length (norm {norm})")]
    NonUnitQuaternion { norm: f64 },
    #[error("unknown joint `{0}`")]
    UnknownJoint(String),
    #[error("unknown measure `{0}`")]
    UnknownMeasure(String),
    #[error("{path}: {message}")]
    InvalidBinding { path: String, message: String },
    #[error("binding table line {line}, column {column}: {message}")]
    BindingFile {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("measure `{0}` produced a non-finite sample")]
    NonFinite(String),
}
