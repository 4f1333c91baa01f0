mod common;

use std::f64::consts::PI;

use common::rig;
use motion_risk::pipeline::{Analysis, Assets, Settings};
use motion_risk::signal::FilterSpec;
use motion_risk::{Motion, PoseSequence};

const AMPLITUDE_M: f64 = 0.05;
const FREQ_HZ: f64 = 2.0;
const MASS_KG: f64 = 70.0;

/// Whole body bobbing vertically on the left foot, right leg lifted.
fn bobbing(rate: f64) -> Motion {
    let sk = rig::skeleton();
    let frames = (0..(2.0 * rate) as usize)
        .map(|i| {
            let t = i as f64 / rate;
            let mut f = rig::frame(
                &sk,
                &[("RightUpLeg", [-60.0, 0.0, 0.0]), ("RightLeg", [60.0, 0.0, 0.0])],
            );
            f.root_translation.y += AMPLITUDE_M * (2.0 * PI * FREQ_HZ * t).cos();
            f
        })
        .collect();
    Motion::new(sk, PoseSequence::new(rate, frames).unwrap()).unwrap()
}

fn peak_left_ankle(rate: f64, filter: FilterSpec) -> f64 {
    let settings = Settings {
        body_mass_kg: MASS_KG,
        filter,
        ..Settings::default()
    };
    let a = Analysis::run("bob", bobbing(rate), &Assets::default(), &settings).unwrap();
    let contact = a.kinematics.contact.left.clone();
    assert!(contact.iter().any(|c| *c), "left foot never planted");
    assert!(
        a.kinematics.contact.right.iter().all(|c| !c),
        "right foot should stay lifted"
    );
    a.streams()
        .get("left_ankle_load_n")
        .unwrap()
        .samples
        .iter()
        .zip(&contact)
        .filter(|(_, c)| **c)
        .map(|(v, _)| *v)
        .fold(0.0, f64::max)
}

fn analytic_peak() -> f64 {
    MASS_KG * (9.81 + AMPLITUDE_M * (2.0 * PI * FREQ_HZ).powi(2))
}

#[test]
fn analytic_peak_value() {
    assert!((analytic_peak() - 1239.4).abs() < 0.1, "{}", analytic_peak());
}

#[test]
fn oscillating_com_peak_load_matches_analytic_acceleration() {
    let peak = peak_left_ankle(
        200.0,
        FilterSpec {
            cutoff_hz: 20.0,
            order: 4,
        },
    );
    let want = analytic_peak();
    assert!((peak - want).abs() / want < 0.005, "peak {peak} vs {want}");
}

#[test]
fn default_filter_attenuates_the_peak_slightly() {
    let peak = peak_left_ankle(100.0, FilterSpec::default());
    let want = analytic_peak();
    assert!(peak < want && (want - peak) / want < 0.02, "peak {peak} vs {want}");
}
