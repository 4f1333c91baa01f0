//! Full-body rig and the three shipped motion fixtures. Shared by the
//! fixture generator example and the integration tests.

#![allow(dead_code)]

use motion_risk::kinematics::{from_euler, AxisOrder};
use motion_risk::motion::{Channel, Frame, JointDef, PoseSequence};
use motion_risk::{Motion, Skeleton};
use nalgebra::Vector3;

pub const SCALE: f64 = 0.01;
pub const HIP_HEIGHT_CM: f64 = 95.0;

fn joint(name: &str, parent: usize, cm: [f64; 3]) -> JointDef {
    JointDef::new(name, Some(parent), cm.map(|v| v * SCALE))
}

fn end_site(parent_name: &str, parent: usize, cm: [f64; 3]) -> JointDef {
    JointDef {
        channels: Vec::<Channel>::new(),
        ..joint(&format!("{parent_name}_end"), parent, cm)
    }
}

/// Y-up rig facing +Z, +X toward the subject's left. Offsets in cm.
pub fn skeleton() -> Skeleton {
    let mut j = vec![JointDef::new("Hips", None, [0.0; 3])];
    let mut add = |d: JointDef| {
        j.push(d);
        j.len() - 1
    };
    let spine = add(joint("Spine", 0, [0.0, 10.0, 0.0]));
    let neck = add(joint("Neck", spine, [0.0, 40.0, 0.0]));
    let head = add(joint("Head", neck, [0.0, 10.0, 0.0]));
    add(end_site("Head", head, [0.0, 20.0, 0.0]));
    for (side, sx) in [("Left", 1.0), ("Right", -1.0)] {
        let arm = add(joint(&format!("{side}Arm"), neck, [18.0 * sx, -2.0, 0.0]));
        let fore = add(joint(&format!("{side}ForeArm"), arm, [0.0, -28.0, 0.0]));
        let hand = add(joint(&format!("{side}Hand"), fore, [0.0, -25.0, 0.0]));
        add(end_site(&format!("{side}Hand"), hand, [0.0, -18.0, 0.0]));
    }
    for (side, sx) in [("Left", 1.0), ("Right", -1.0)] {
        let up = add(joint(&format!("{side}UpLeg"), 0, [9.0 * sx, -5.0, 0.0]));
        let leg = add(joint(&format!("{side}Leg"), up, [0.0, -42.0, 0.0]));
        let foot = add(joint(&format!("{side}Foot"), leg, [0.0, -42.0, 0.0]));
        add(end_site(&format!("{side}Foot"), foot, [0.0, -6.0, 14.0]));
    }
    Skeleton::new(j).expect("rig is valid")
}

/// Frame with the named joints set to XYZ intrinsic angles in degrees.
pub fn frame(sk: &Skeleton, rotations: &[(&str, [f64; 3])]) -> Frame {
    let mut f = Frame::identity(sk.len());
    f.root_translation = Vector3::new(0.0, HIP_HEIGHT_CM * SCALE, 0.0);
    for (name, angles) in rotations {
        let idx = sk.index_of(name).expect("rig joint");
        f.rotations[idx] = from_euler(*angles, AxisOrder::XYZ);
    }
    f
}

fn motion(rate: f64, frames: Vec<Frame>) -> Motion {
    let sk = skeleton();
    Motion::new(sk, PoseSequence::new(rate, frames).expect("fixture sequence")).expect("fixture motion")
}

/// Two seconds of motionless standing at 30 Hz.
pub fn neutral_standing() -> Motion {
    let sk = skeleton();
    motion(30.0, (0..60).map(|_| frame(&sk, &[])).collect())
}

pub const ACHILLES_PEAK_DEG: f64 = 52.0;
pub const ACHILLES_KNEE_DEG: f64 = 22.5;

/// Left ankle dorsiflexion swept 0 to 52 degrees and back over two
/// seconds at 60 Hz, left knee held at 22.5 degrees of flexion.
pub fn achilles_sweep() -> Motion {
    let sk = skeleton();
    let n = 121;
    let frames = (0..n)
        .map(|i| {
            let s = (std::f64::consts::PI * i as f64 / (n - 1) as f64).sin();
            // dorsiflexion is the negated X component for the ankle binding
            frame(
                &sk,
                &[
                    ("LeftLeg", [ACHILLES_KNEE_DEG, 0.0, 0.0]),
                    ("LeftFoot", [-ACHILLES_PEAK_DEG * s, 0.0, 0.0]),
                ],
            )
        })
        .collect();
    motion(60.0, frames)
}

pub const ACL_FLEXION_DEG: f64 = 74.0;
pub const ACL_ABDUCTION_DEG: f64 = 95.0;
pub const ACL_INTERNAL_ROTATION_DEG: f64 = 67.0;
/// Frames at which the left knee sits at the full collapse angles.
pub const ACL_HOLD: std::ops::RangeInclusive<usize> = 30..=69;

/// Left knee eases into 74/95/67 degrees of flexion, abduction and
/// internal rotation, holds, and releases. 90 frames at 60 Hz.
pub fn acl_collapse() -> Motion {
    let sk = skeleton();
    let smooth = |x: f64| x * x * (3.0 - 2.0 * x);
    let frames = (0..90usize)
        .map(|i| {
            let s = if i < 30 {
                smooth(i as f64 / 30.0)
            } else if i < 70 {
                1.0
            } else {
                smooth((89 - i) as f64 / 20.0)
            };
            let knee = [
                ACL_FLEXION_DEG * s,
                -ACL_INTERNAL_ROTATION_DEG * s,
                ACL_ABDUCTION_DEG * s,
            ];
            frame(&sk, &[("LeftLeg", knee)])
        })
        .collect();
    motion(60.0, frames)
}

pub type Fixture = (&'static str, fn() -> Motion);

pub const FIXTURES: [Fixture; 3] = [
    ("neutral_standing", neutral_standing),
    ("achilles_sweep", achilles_sweep),
    ("acl_collapse", acl_collapse),
];

pub fn fixture_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}
