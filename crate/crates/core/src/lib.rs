//! Motion-risk analysis: ingest 3D pose sequences, derive joint-angle,
//! angular-rate and joint-load streams, evaluate injury-risk rules, and
//! segment the results into graded incidents.
//!
//! The pipeline is split by stage:
//!
//! - [`motion`]: mocap text and pose interchange parsing, resampling, serialization
//! - [`kinematics`]: forward kinematics, Euler decomposition, anatomical angle streams
//! - [`signal`]: zero-phase smoothing and finite-difference derivatives
//! - [`dynamics`]: segment masses, foot contact, quasi-static joint loads
//! - [`risk`]: rule evaluation, incident segmentation, grading and reports
//! - [`pipeline`] and [`report`]: orchestration and file exports
//! - `service`: HTTP interface (behind the `service` feature)

pub mod config;
pub mod dynamics;
pub mod error;
pub mod format;
pub mod kinematics;
pub mod motion;
pub mod pipeline;
pub mod report;
pub mod risk;
#[cfg(feature = "service")]
pub mod service;
pub mod signal;
pub mod stream;

pub use error::{Error, Result};
pub use motion::{Motion, PoseSequence, Skeleton};
pub use stream::{MetricStream, Unit};
