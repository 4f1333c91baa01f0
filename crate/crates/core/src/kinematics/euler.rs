//! Tait-Bryan decomposition of unit quaternions for all six axis orders.
//!
//! Angles are intrinsic: for order `(i, j, k)` the rotation is
//! `R_i(a) * R_j(b) * R_k(c)`. The middle angle lies in `[-90, 90]` degrees.
//! At gimbal lock the third angle is set to exactly zero and the whole
//! residual rotation is carried by the first.

use nalgebra::{Matrix3, Quaternion, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use super::KinematicsError;

/// Tolerance on `|q| - 1` accepted by [`to_euler`].
pub const UNIT_NORM_TOLERANCE: f64 = 1e-6;

/// Below this value of `cos(middle)` the decomposition is treated as locked.
const GIMBAL_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn unit_vector(self) -> Unit<Vector3<f64>> {
        match self {
            Axis::X => Vector3::x_axis(),
            Axis::Y => Vector3::y_axis(),
            Axis::Z => Vector3::z_axis(),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    /// Rotation about this axis by `degrees`.
    pub fn rotation(self, degrees: f64) -> UnitQuaternion<f64> {
        UnitQuaternion::from_axis_angle(&self.unit_vector(), degrees.to_radians())
    }
}

/// Permutation of the three rotation axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum AxisOrder {
    XYZ,
    XZY,
    YXZ,
    YZX,
    #[default]
    ZXY,
    ZYX,
}

impl AxisOrder {
    pub const ALL: [AxisOrder; 6] = [
        AxisOrder::XYZ,
        AxisOrder::XZY,
        AxisOrder::YXZ,
        AxisOrder::YZX,
        AxisOrder::ZXY,
        AxisOrder::ZYX,
    ];

    pub fn axes(self) -> [Axis; 3] {
        use Axis::*;
        match self {
            AxisOrder::XYZ => [X, Y, Z],
            AxisOrder::XZY => [X, Z, Y],
            AxisOrder::YXZ => [Y, X, Z],
            AxisOrder::YZX => [Y, Z, X],
            AxisOrder::ZXY => [Z, X, Y],
            AxisOrder::ZYX => [Z, Y, X],
        }
    }

    pub fn from_axes(axes: [Axis; 3]) -> Option<AxisOrder> {
        AxisOrder::ALL.into_iter().find(|o| o.axes() == axes)
    }

    /// +1 for cyclic permutations of XYZ, -1 otherwise.
    fn parity(self) -> f64 {
        match self {
            AxisOrder::XYZ | AxisOrder::YZX | AxisOrder::ZXY => 1.0,
            _ => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AxisOrder::XYZ => "XYZ",
            AxisOrder::XZY => "XZY",
            AxisOrder::YXZ => "YXZ",
            AxisOrder::YZX => "YZX",
            AxisOrder::ZXY => "ZXY",
            AxisOrder::ZYX => "ZYX",
        }
    }
}

impl fmt::Display for AxisOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AxisOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AxisOrder::ALL
            .into_iter()
            .find(|o| o.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown axis order `{s}` (expected a permutation of XYZ)"))
    }
}

impl TryFrom<String> for AxisOrder {
    type Error = String;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<AxisOrder> for String {
    fn from(value: AxisOrder) -> Self {
        value.as_str().to_owned()
    }
}

/// Compose intrinsic rotations `angles_deg[0..3]` about the axes of `order`.
pub fn from_euler(angles_deg: [f64; 3], order: AxisOrder) -> UnitQuaternion<f64> {
    let [a, b, c] = order.axes();
    a.rotation(angles_deg[0]) * b.rotation(angles_deg[1]) * c.rotation(angles_deg[2])
}

/// Decompose `q` into intrinsic angles (degrees) for `order`.
///
/// Fails if `q` is not unit length within [`UNIT_NORM_TOLERANCE`].
pub fn to_euler(q: &Quaternion<f64>, order: AxisOrder) -> Result<[f64; 3], KinematicsError> {
    let norm = q.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
        return Err(KinematicsError::NonUnitQuaternion { norm });
    }
    Ok(decompose(&UnitQuaternion::new_normalize(*q), order))
}

/// Infallible decomposition for quaternions already known to be unit length.
pub fn decompose(q: &UnitQuaternion<f64>, order: AxisOrder) -> [f64; 3] {
    let m: Matrix3<f64> = *q.to_rotation_matrix().matrix();
    let [i, j, k] = order.axes().map(Axis::index);
    let s = order.parity();

    let cos_mid = m[(i, i)].hypot(m[(i, j)]);
    let middle = (s * m[(i, k)]).atan2(cos_mid);
    let (first, third) = if cos_mid < GIMBAL_EPSILON {
        ((s * m[(k, j)]).atan2(m[(j, j)]), 0.0)
    } else {
        ((-s * m[(j, k)]).atan2(m[(k, k)]), (-s * m[(i, j)]).atan2(m[(i, i)]))
    };
    [first.to_degrees(), middle.to_degrees(), third.to_degrees()]
}

/// Sign-agnostic rotation angle (radians) between two unit quaternions.
pub fn angular_distance(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>) -> f64 {
    let d = a.inverse() * b;
    let v = d.quaternion().imag().norm();
    2.0 * v.atan2(d.quaternion().w.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(w: f64, x: f64, y: f64, z: f64) -> Quaternion<f64> {
        Quaternion::new(w, x, y, z)
    }

    #[test]
    fn identity_decomposes_to_zero_for_every_order() {
        for order in AxisOrder::ALL {
            let e = to_euler(&q(1.0, 0.0, 0.0, 0.0), order).unwrap();
            assert_eq!(e.map(|v| v.abs()), [0.0, 0.0, 0.0], "{order}");
        }
    }

    #[test]
    fn quarter_turn_about_x() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let e = to_euler(&q(h, h, 0.0, 0.0), AxisOrder::XYZ).unwrap();
        assert!((e[0] - 90.0).abs() < 1e-9);
        assert!(e[1].abs() < 1e-9 && e[2].abs() < 1e-9);
    }

    #[test]
    fn exact_gimbal_lock_zeroes_third_angle() {
        for order in AxisOrder::ALL {
            for mid in [90.0, -90.0] {
                let rot = from_euler([30.0, mid, 25.0], order);
                let e = decompose(&rot, order);
                assert_eq!(e[2], 0.0, "{order} {mid}");
                assert!((e[1] - mid).abs() < 1e-6);
                let back = from_euler(e, order);
                assert!(angular_distance(&rot, &back) < 1e-7);
            }
        }
    }

    #[test]
    fn rejects_non_unit_input() {
        let err = to_euler(&q(0.9, 0.0, 0.0, 0.0), AxisOrder::XYZ).unwrap_err();
        assert!(matches!(err, KinematicsError::NonUnitQuaternion { .. }));
    }

    #[test]
    fn parses_orders_case_insensitively() {
        assert_eq!("zxy".parse::<AxisOrder>().unwrap(), AxisOrder::ZXY);
        assert!("XXY".parse::<AxisOrder>().is_err());
    }

    proptest! {
        #[test]
        fn single_axis_angles_are_recovered(deg in -179.0f64..179.0, order_idx in 0usize..6, slot in 0usize..3) {
            let order = AxisOrder::ALL[order_idx];
            let mut angles = [0.0; 3];
            // middle slot is limited to its principal range
            angles[slot] = if slot == 1 { deg / 2.0 } else { deg };
            let e = decompose(&from_euler(angles, order), order);
            for n in 0..3 {
                prop_assert!((e[n] - angles[n]).abs() < 1e-7, "{:?} vs {:?}", e, angles);
            }
        }

        #[test]
        fn recomposition_matches(w in -1.0f64..1.0, x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0, order_idx in 0usize..6) {
            let raw = q(w, x, y, z);
            prop_assume!(raw.norm() > 1e-3);
            let unit = UnitQuaternion::new_normalize(raw);
            let order = AxisOrder::ALL[order_idx];
            let back = from_euler(decompose(&unit, order), order);
            prop_assert!(angular_distance(&unit, &back) < 1e-6);
        }
    }
}
