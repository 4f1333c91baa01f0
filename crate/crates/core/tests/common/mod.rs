#![allow(dead_code)]

pub mod malformed;
pub mod rig;

use motion_risk::motion::parse_mocap_text;
use motion_risk::pipeline::{Analysis, Assets, Settings};

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(rig::fixture_dir().join(format!("{name}.bvh"))).expect("shipped fixture")
}

/// Full pipeline on a shipped fixture with default tables and settings.
pub fn analyze_fixture(name: &str) -> Analysis {
    let motion = parse_mocap_text(&fixture_text(name), rig::SCALE).expect("fixture parses");
    Analysis::run(&format!("{name}.bvh"), motion, &Assets::default(), &Settings::default()).expect("fixture analyzes")
}

pub fn golden_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{name}.report.json"))
}
