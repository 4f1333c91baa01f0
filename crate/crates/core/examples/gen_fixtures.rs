//! Regenerate the shipped `.bvh` fixtures: `cargo run --example gen_fixtures`.

#[path = "../tests/common/rig.rs"]
mod rig;

use motion_risk::motion::serialize_mocap_text;

fn main() -> anyhow::Result<()> {
    let dir = rig::fixture_dir();
    std::fs::create_dir_all(&dir)?;
    for (name, build) in rig::FIXTURES {
        let m = build();
        let text = serialize_mocap_text(&m.skeleton, &m.sequence, rig::SCALE)?;
        let path = dir.join(format!("{name}.bvh"));
        std::fs::write(&path, text)?;
        println!("wrote {} ({} frames)", path.display(), m.sequence.len());
    }
    Ok(())
}
