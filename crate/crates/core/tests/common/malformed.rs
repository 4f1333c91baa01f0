//! Malformed mocap text cases: (name, text, line the error must cite).

#![allow(dead_code)]

pub const VALID: &str = "HIERARCHY
ROOT root
{
\tOFFSET 0 0 0
\tCHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation
\tJOINT a
\t{
\t\tOFFSET 100 0 0
\t\tCHANNELS 3 Zrotation Xrotation Yrotation
\t\tEnd Site
\t\t{
\t\t\tOFFSET 100 0 0
\t\t}
\t}
}
MOTION
Frames: 2
Frame Time: 0.5
0 0 0 0 0 0 0 0 0
0 0 0 90 0 0 0 0 0
";

fn edit(from: &str, to: &str) -> String {
    assert!(VALID.contains(from), "{from}");
    VALID.replacen(from, to, 1)
}

fn deep_nesting(depth: usize) -> String {
    let mut s = String::from("HIERARCHY\nROOT r\n{\nOFFSET 0 0 0\nCHANNELS 3 Zrotation Xrotation Yrotation\n");
    for i in 0..depth {
        s.push_str(&format!(
            "JOINT j{i}\n{{\nOFFSET 0 1 0\nCHANNELS 3 Zrotation Xrotation Yrotation\n"
        ));
    }
    s
}

pub fn cases() -> Vec<(&'static str, String, usize)> {
    vec![
        ("empty input", String::new(), 1),
        ("missing hierarchy keyword", VALID.replacen("HIERARCHY\n", "", 1), 1),
        ("root without name", edit("ROOT root", "ROOT"), 4),
        ("offset with two values", edit("\tOFFSET 0 0 0", "\tOFFSET 0 0"), 5),
        (
            "offset not numeric",
            edit("OFFSET 100 0 0\n\t\tCHANNELS", "OFFSET 100 x 0\n\t\tCHANNELS"),
            8,
        ),
        (
            "channel count exceeds names",
            edit(
                "CHANNELS 3 Zrotation Xrotation Yrotation",
                "CHANNELS 3 Zrotation Xrotation",
            ),
            10,
        ),
        (
            "unknown channel",
            edit(
                "CHANNELS 3 Zrotation Xrotation Yrotation",
                "CHANNELS 3 Zrotation Xrotation Wrotation",
            ),
            9,
        ),
        (
            "position channel off root",
            edit(
                "CHANNELS 3 Zrotation Xrotation Yrotation",
                "CHANNELS 3 Xposition Xrotation Yrotation",
            ),
            9,
        ),
        ("unclosed joint", edit("\t}\n}\nMOTION", "\t}\nMOTION"), 15),
        ("stray closing brace", edit("}\nMOTION", "}\n}\nMOTION"), 16),
        (
            "second root",
            edit(
                "}\nMOTION",
                "}\nROOT b\n{\nOFFSET 0 0 0\nCHANNELS 3 Zrotation Xrotation Yrotation\n}\nMOTION",
            ),
            16,
        ),
        (
            "missing motion section",
            VALID[..VALID.find("MOTION").unwrap()].to_owned(),
            15,
        ),
        ("frame count not a number", edit("Frames: 2", "Frames: two"), 17),
        ("zero frames", edit("Frames: 2", "Frames: 0"), 17),
        ("more frames declared than rows", edit("Frames: 2", "Frames: 3"), 17),
        ("fewer frames declared than rows", edit("Frames: 2", "Frames: 1"), 17),
        ("zero frame time", edit("Frame Time: 0.5", "Frame Time: 0"), 18),
        ("negative frame time", edit("Frame Time: 0.5", "Frame Time: -0.01"), 18),
        ("row too short", edit("0 0 0 90 0 0 0 0 0", "0 0 0 90 0 0 0 0"), 20),
        ("row too long", edit("0 0 0 90 0 0 0 0 0", "0 0 0 90 0 0 0 0 0 0"), 20),
        (
            "row value not numeric",
            edit("0 0 0 90 0 0 0 0 0", "0 0 0 ninety 0 0 0 0 0"),
            20,
        ),
        (
            "row value not finite",
            edit("0 0 0 90 0 0 0 0 0", "0 0 0 inf 0 0 0 0 0"),
            20,
        ),
        (
            "end site with channels",
            edit(
                "\t\t\tOFFSET 100 0 0\n",
                "\t\t\tOFFSET 100 0 0\n\t\t\tCHANNELS 1 Xrotation\n",
            ),
            13,
        ),
        ("duplicate joint name", edit("JOINT a", "JOINT root"), 6),
        ("nesting too deep", deep_nesting(400), 1031),
    ]
}
