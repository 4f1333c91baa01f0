mod common;

use common::{malformed, rig};
use motion_risk::kinematics::euler::angular_distance;
use motion_risk::motion::{parse_mocap_text, parse_pose_interchange, serialize_mocap_text, serialize_pose_interchange};
use motion_risk::Motion;

#[test]
fn corpus_is_rejected_with_the_expected_lines() {
    let cases = malformed::cases();
    assert!(cases.len() >= 15);
    for (name, text, line) in cases {
        let outcome = std::panic::catch_unwind(|| parse_mocap_text(&text, 0.01));
        let err = match outcome {
            Ok(Err(e)) => e,
            Ok(Ok(_)) => panic!("{name}: accepted"),
            Err(_) => panic!("{name}: panicked"),
        };
        assert_eq!(err.line(), Some(line), "{name}: {err}");
        assert!(err.to_string().starts_with(&format!("line {line}")), "{name}: {err}");
    }
}

#[test]
fn corpus_base_text_is_valid() {
    let m = parse_mocap_text(malformed::VALID, 0.01).unwrap();
    assert_eq!(m.skeleton.len(), 3);
    assert_eq!(m.sequence.len(), 2);
}

fn assert_motion_close(a: &Motion, b: &Motion) {
    assert_eq!(a.skeleton.len(), b.skeleton.len());
    for (ja, jb) in a.skeleton.joints().iter().zip(b.skeleton.joints()) {
        assert_eq!(ja.name, jb.name);
        assert_eq!(ja.parent, jb.parent);
        assert!((ja.offset - jb.offset).norm() < 1e-6, "{}", ja.name);
    }
    assert!((a.sequence.frame_rate() - b.sequence.frame_rate()).abs() < 1e-6);
    for (fa, fb) in a.sequence.frames().iter().zip(b.sequence.frames()) {
        assert!((fa.root_translation - fb.root_translation).norm() < 1e-6);
        for (qa, qb) in fa.rotations.iter().zip(&fb.rotations) {
            assert!(angular_distance(qa, qb) < 1e-6);
        }
    }
}

#[test]
fn shipped_fixtures_round_trip_through_mocap_text() {
    for (name, _) in rig::FIXTURES {
        let text = std::fs::read_to_string(rig::fixture_dir().join(format!("{name}.bvh"))).unwrap();
        let m = parse_mocap_text(&text, rig::SCALE).unwrap();
        let again = serialize_mocap_text(&m.skeleton, &m.sequence, rig::SCALE).unwrap();
        assert_eq!(again, text, "{name}: serialization is not a fixed point");
        assert_motion_close(&m, &parse_mocap_text(&again, rig::SCALE).unwrap());
    }
}

#[test]
fn shipped_fixtures_match_the_generator() {
    for (name, build) in rig::FIXTURES {
        let text = std::fs::read_to_string(rig::fixture_dir().join(format!("{name}.bvh"))).unwrap();
        let m = build();
        assert_eq!(
            serialize_mocap_text(&m.skeleton, &m.sequence, rig::SCALE).unwrap(),
            text,
            "{name}"
        );
        assert_motion_close(&m, &parse_mocap_text(&text, rig::SCALE).unwrap());
    }
}

#[test]
fn fixtures_round_trip_through_interchange() {
    for (_, build) in rig::FIXTURES {
        let m = build();
        let doc = serialize_pose_interchange(&m.skeleton, &m.sequence).unwrap();
        assert_motion_close(&m, &parse_pose_interchange(&doc).unwrap());
    }
}

#[test]
fn interchange_schema_errors_are_positional() {
    let err = parse_pose_interchange(
        "{\"skeleton\": {\"joints\": []},\n \"frame_rate_hz\": 30,\n \"frames\": [], \"extra\": 1}",
    )
    .unwrap_err();
    assert_eq!(err.line(), Some(3), "{err}");
}
