use nalgebra::UnitQuaternion;

use super::{Frame, MotionError, PoseSequence};

/// Resample onto a uniform grid at `target_rate`, starting at the first
/// frame. Root translation is interpolated linearly, rotations by
/// shortest-arc slerp. The output never runs past the source duration and
/// falls short of it by less than one output period.
pub fn resample(seq: &PoseSequence, target_rate: f64) -> Result<PoseSequence, MotionError> {
    if !(target_rate.is_finite() && target_rate > 0.0) {
        return Err(MotionError::InvalidRate(target_rate));
    }
    if target_rate == seq.frame_rate() {
        return Ok(seq.clone());
    }
    let src = seq.frames();
    let duration = seq.duration();
    let count = (duration * target_rate + 1e-9).floor() as usize + 1;
    let frames = (0..count)
        .map(|k| {
            let pos = (k as f64 / target_rate) * seq.frame_rate();
            let lo = (pos.floor() as usize).min(src.len() - 1);
            let hi = (lo + 1).min(src.len() - 1);
            let u = (pos - lo as f64).clamp(0.0, 1.0);
            if u == 0.0 || lo == hi {
                return src[lo].clone();
            }
            interpolate(&src[lo], &src[hi], u)
        })
        .collect();
    PoseSequence::new(target_rate, frames)
}

fn interpolate(a: &Frame, b: &Frame, u: f64) -> Frame {
    Frame {
        root_translation: a.root_translation.lerp(&b.root_translation, u),
        rotations: a
            .rotations
            .iter()
            .zip(&b.rotations)
            .map(|(qa, qb)| slerp_shortest(qa, qb, u))
            .collect(),
    }
}

pub(crate) fn slerp_shortest(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>, u: f64) -> UnitQuaternion<f64> {
    let qa = a.into_inner();
    let mut qb = b.into_inner();
    let mut dot = qa.dot(&qb);
    if dot < 0.0 {
        qb = -qb;
        dot = -dot;
    }
    if dot > 0.9995 {
        return UnitQuaternion::new_normalize(qa.lerp(&qb, u));
    }
    let theta = dot.clamp(-1.0, 1.0).acos();
    let sin = theta.sin();
    let wa = ((1.0 - u) * theta).sin() / sin;
    let wb = (u * theta).sin() / sin;
    UnitQuaternion::new_normalize(qa * wa + qb * wb)
}
