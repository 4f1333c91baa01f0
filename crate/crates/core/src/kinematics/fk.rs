use nalgebra::{UnitQuaternion, Vector3};

use super::KinematicsError;
use crate::motion::{Frame, PoseSequence, Skeleton};

/// World-space joint positions (meters) and orientations for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalPose {
    pub positions: Vec<Vector3<f64>>,
    pub orientations: Vec<UnitQuaternion<f64>>,
}

/// Walk the hierarchy root-first: each joint sits at its parent's position
/// plus the parent's world orientation applied to the joint offset.
pub fn forward_kinematics(skeleton: &Skeleton, frame: &Frame) -> Result<GlobalPose, KinematicsError> {
    let n = skeleton.len();
    if frame.rotations.len() != n {
        return Err(KinematicsError::JointCountMismatch {
            expected: n,
            found: frame.rotations.len(),
        });
    }
    let mut positions = Vec::with_capacity(n);
    let mut orientations = Vec::with_capacity(n);
    for (idx, joint) in skeleton.joints().iter().enumerate() {
        let local = frame.rotations[idx];
        match joint.parent {
            None => {
                positions.push(frame.root_translation);
                orientations.push(local);
            }
            Some(p) => {
                let parent_rot: UnitQuaternion<f64> = orientations[p];
                positions.push(positions[p] + parent_rot * joint.offset);
                orientations.push(parent_rot * local);
            }
        }
    }
    Ok(GlobalPose {
        positions,
        orientations,
    })
}

pub fn forward_kinematics_sequence(
    skeleton: &Skeleton,
    seq: &PoseSequence,
) -> Result<Vec<GlobalPose>, KinematicsError> {
    seq.frames().iter().map(|f| forward_kinematics(skeleton, f)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::euler::Axis;
    use crate::motion::JointDef;

    fn chain() -> Skeleton {
        Skeleton::new(vec![
            JointDef::new("root", None, [0.0; 3]),
            JointDef::new("a", Some(0), [1.0, 0.0, 0.0]),
            JointDef::new("b", Some(1), [1.0, 0.0, 0.0]),
        ])
        .unwrap()
    }

    fn assert_close(a: &Vector3<f64>, b: [f64; 3]) {
        assert!((a - Vector3::from(b)).norm() < 1e-12, "{a:?} vs {b:?}");
    }

    #[test]
    fn identity_chain_accumulates_offsets() {
        let pose = forward_kinematics(&chain(), &Frame::identity(3)).unwrap();
        assert_close(&pose.positions[0], [0.0, 0.0, 0.0]);
        assert_close(&pose.positions[1], [1.0, 0.0, 0.0]);
        assert_close(&pose.positions[2], [2.0, 0.0, 0.0]);
    }

    #[test]
    fn root_yaw_rotates_the_chain() {
        let mut frame = Frame::identity(3);
        frame.rotations[0] = Axis::Z.rotation(90.0);
        let pose = forward_kinematics(&chain(), &frame).unwrap();
        assert_close(&pose.positions[1], [0.0, 1.0, 0.0]);
        assert_close(&pose.positions[2], [0.0, 2.0, 0.0]);
    }

    #[test]
    fn root_translation_shifts_everything() {
        let mut frame = Frame::identity(3);
        frame.root_translation = Vector3::new(0.0, 0.0, 5.0);
        let pose = forward_kinematics(&chain(), &frame).unwrap();
        assert_close(&pose.positions[2], [2.0, 0.0, 5.0]);
    }

    #[test]
    fn joint_count_mismatch() {
        assert_eq!(
            forward_kinematics(&chain(), &Frame::identity(2)).unwrap_err(),
            KinematicsError::JointCountMismatch { expected: 3, found: 2 }
        );
    }
}
