mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{golden_path, rig};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_motion-risk"));
    c.env_remove(motion_risk::config::CONFIG_ENV);
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixture(name: &str) -> String {
    rig::fixture_dir()
        .join(format!("{name}.bvh"))
        .to_string_lossy()
        .into_owned()
}

fn analyze(name: &str, out: &Path) -> Output {
    run(&[
        "analyze",
        "--in",
        &fixture(name),
        "--mass",
        "70",
        "--out",
        out.to_str().unwrap(),
    ])
}

#[test]
fn neutral_standing_has_no_incidents() {
    let dir = tempfile::tempdir().unwrap();
    let o = analyze("neutral_standing", dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["totals"]["incidents"], 0);
    let incidents = std::fs::read_to_string(dir.path().join("incidents.csv")).unwrap();
    assert_eq!(incidents.lines().count(), 1);
}

#[test]
fn achilles_sweep_flags_dorsiflexion_past_forty() {
    let dir = tempfile::tempdir().unwrap();
    let o = analyze("achilles_sweep", dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let hits: Vec<&serde_json::Value> = report["incidents"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|i| i["label"] == "achilles_overload")
        .collect();
    assert!(!hits.is_empty());
    assert!(hits.iter().all(|i| i["peak_value"].as_f64().unwrap() >= 40.0));
}

#[test]
fn outputs_match_golden_and_repeat_byte_for_byte() {
    for (name, _) in rig::FIXTURES {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        assert!(analyze(name, a.path()).status.success());
        assert!(analyze(name, b.path()).status.success());
        for file in ["report.json", "streams.csv", "incidents.csv"] {
            let x = std::fs::read(a.path().join(file)).unwrap();
            assert_eq!(x, std::fs::read(b.path().join(file)).unwrap(), "{name}/{file}");
        }
        let golden = std::fs::read_to_string(golden_path(name)).unwrap();
        assert_eq!(
            std::fs::read_to_string(a.path().join("report.json")).unwrap(),
            golden,
            "{name}"
        );
    }
}

#[test]
fn missing_rule_file_fails_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "analyze",
        "-i",
        &fixture("neutral_standing"),
        "-r",
        "/no/such/rules.json",
        "-o",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("/no/such/rules.json"), "{}", stderr(&o));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn malformed_input_reports_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.bvh");
    std::fs::write(&bad, common::malformed::VALID.replace("Frames: 2", "Frames: 10")).unwrap();
    let out = dir.path().join("out");
    let o = run(&["analyze", "--in", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    let msg = stderr(&o);
    assert!(msg.contains("bad.bvh: line 17"), "{msg}");
    assert!(!out.exists());
}

#[test]
fn invalid_rule_file_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("rules.json");
    std::fs::write(&rules, "{\"rules\": [\n  {\"id\": \"x\"}\n]}").unwrap();
    let o = run(&[
        "analyze",
        "-i",
        &fixture("neutral_standing"),
        "-r",
        rules.to_str().unwrap(),
        "-o",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("rules.json: rule set line 2"), "{}", stderr(&o));
}

#[test]
fn config_file_from_env_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("session.toml");
    std::fs::write(
        &cfg,
        format!(
            "input = {:?}\nbody_mass_kg = 80.0\nout = \"out\"\n",
            fixture("neutral_standing")
        ),
    )
    .unwrap();
    let o = bin()
        .args(["analyze"])
        .env(motion_risk::config::CONFIG_ENV, &cfg)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let report = std::fs::read_to_string(dir.path().join("out/report.json")).unwrap();
    assert!(report.contains("\"body_mass_kg\": 80.0"));

    let o = bin()
        .args(["analyze", "--mass", "60"])
        .env(motion_risk::config::CONFIG_ENV, &cfg)
        .output()
        .unwrap();
    assert!(o.status.success());
    let report = std::fs::read_to_string(dir.path().join("out/report.json")).unwrap();
    assert!(report.contains("\"body_mass_kg\": 60.0"));
}

#[test]
fn convert_round_trips_between_formats() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("a.json");
    let bvh = dir.path().join("b.bvh");
    assert!(run(&[
        "convert",
        "--in",
        &fixture("acl_collapse"),
        "--out",
        json.to_str().unwrap()
    ])
    .status
    .success());
    assert!(run(&[
        "convert",
        "-i",
        json.to_str().unwrap(),
        "-o",
        bvh.to_str().unwrap(),
        "-s",
        "0.01"
    ])
    .status
    .success());
    let original = motion_risk::motion::parse_mocap_text(&common::fixture_text("acl_collapse"), 0.01).unwrap();
    let back = motion_risk::motion::parse_mocap_text(&std::fs::read_to_string(&bvh).unwrap(), 0.01).unwrap();
    assert_eq!(original.skeleton.len(), back.skeleton.len());
    for (a, b) in original.sequence.frames().iter().zip(back.sequence.frames()) {
        for (qa, qb) in a.rotations.iter().zip(&b.rotations) {
            assert!(motion_risk::kinematics::euler::angular_distance(qa, qb) < 1e-6);
        }
    }
    let o = run(&[
        "convert",
        "-i",
        &fixture("acl_collapse"),
        "-o",
        dir.path().join("c.txt").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
}

#[test]
fn export_writes_selected_streams() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = run(&[
        "export",
        "--in",
        &fixture("achilles_sweep"),
        "--out",
        out.to_str().unwrap(),
        "--measures",
        "left_ankle_dorsiflexion_deg,left_ankle_load_bw",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "time_s,left_ankle_dorsiflexion_deg (deg),left_ankle_load_bw (BW)"
    );
    assert_eq!(text.lines().count(), 122);
    let o = run(&[
        "export",
        "-i",
        &fixture("achilles_sweep"),
        "-o",
        out.to_str().unwrap(),
        "-M",
        "nope",
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unknown measure `nope`"));
}

#[test]
fn serve_strict_rejects_port_zero() {
    let o = run(&["serve", "--port", "0", "--strict"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("port 0"), "{}", stderr(&o));
}

#[test]
fn serve_fails_when_the_port_is_taken() {
    let taken = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    let o = run(&["serve", "--port", &port]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("cannot bind"), "{}", stderr(&o));
}
