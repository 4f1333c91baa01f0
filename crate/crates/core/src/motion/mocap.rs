//! Hierarchical mocap text: a `HIERARCHY` section of nested joints with
//! offsets and channel declarations, followed by a `MOTION` section with
//! one whitespace-separated row of channel values per frame.
//!
//! Rotation channels are intrinsic Euler angles in degrees, applied in
//! declaration order. Position channels are accepted on the root only.
//! `End Site` blocks become zero-channel joints named `<parent>_end`.

use std::collections::HashSet;
use std::fmt::Write as _;

use nalgebra::{UnitQuaternion, Vector3};

use super::{Channel, Frame, JointDef, Motion, MotionError, PoseSequence, Skeleton};
use crate::kinematics::euler::{self, Axis, AxisOrder};

/// Meters per file unit when the caller does not override it.
pub const DEFAULT_SCALE: f64 = 0.01;

const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    line: usize,
}

struct RawJoint {
    name: String,
    parent: Option<usize>,
    offset: [f64; 3],
    channels: Vec<Channel>,
    order: AxisOrder,
}

struct HierarchyParser<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
    eof_line: usize,
    joints: Vec<RawJoint>,
    names: HashSet<String>,
}

fn syntax(line: usize, message: impl Into<String>) -> MotionError {
    MotionError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_number(tok: Token<'_>) -> Result<f64, MotionError> {
    match tok.text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(syntax(
            tok.line,
            format!("expected a finite number, found `{}`", tok.text),
        )),
    }
}

impl<'a> HierarchyParser<'a> {
    fn next(&mut self, what: &str) -> Result<Token<'a>, MotionError> {
        let tok = self
            .tokens
            .get(self.pos)
            .copied()
            .ok_or_else(|| syntax(self.eof_line, format!("unexpected end of hierarchy, expected {what}")))?;
        self.pos += 1;
        Ok(tok)
    }

    fn expect(&mut self, keyword: &str) -> Result<Token<'a>, MotionError> {
        let tok = self.next(&format!("`{keyword}`"))?;
        if tok.text != keyword {
            return Err(syntax(tok.line, format!("expected `{keyword}`, found `{}`", tok.text)));
        }
        Ok(tok)
    }

    fn offset(&mut self) -> Result<[f64; 3], MotionError> {
        Ok([
            parse_number(self.next("offset x")?)?,
            parse_number(self.next("offset y")?)?,
            parse_number(self.next("offset z")?)?,
        ])
    }

    fn register_name(&mut self, name: String, line: usize) -> Result<String, MotionError> {
        if !self.names.insert(name.clone()) {
            return Err(syntax(line, format!("duplicate joint name `{name}`")));
        }
        Ok(name)
    }

    fn channels(&mut self, is_root: bool) -> Result<(Vec<Channel>, AxisOrder), MotionError> {
        let count_tok = self.next("channel count")?;
        let count: usize = count_tok
            .text
            .parse()
            .map_err(|_| syntax(count_tok.line, format!("invalid channel count `{}`", count_tok.text)))?;
        if count > 6 {
            return Err(syntax(
                count_tok.line,
                format!("at most 6 channels per joint, found {count}"),
            ));
        }
        let mut channels = Vec::with_capacity(count);
        for _ in 0..count {
            let tok = self.next("channel name")?;
            let ch =
                Channel::parse(tok.text).ok_or_else(|| syntax(tok.line, format!("unknown channel `{}`", tok.text)))?;
            if channels.contains(&ch) {
                return Err(syntax(tok.line, format!("channel `{}` declared twice", tok.text)));
            }
            if !ch.is_rotation() && !is_root {
                return Err(syntax(
                    tok.line,
                    "position channels are only supported on the root joint",
                ));
            }
            channels.push(ch);
        }
        let axes: Vec<Axis> = channels
            .iter()
            .filter(|c| c.is_rotation())
            .map(|c| [Axis::X, Axis::Y, Axis::Z][c.axis_index()])
            .collect();
        let order = match axes.len() {
            0 => AxisOrder::default(),
            3 => AxisOrder::from_axes([axes[0], axes[1], axes[2]]).expect("distinct axes"),
            n => {
                return Err(syntax(
                    count_tok.line,
                    format!("expected 0 or 3 rotation channels, found {n}"),
                ))
            }
        };
        Ok((channels, order))
    }

    fn joint_body(&mut self, name: String, parent: Option<usize>, depth: usize) -> Result<(), MotionError> {
        let open = self.expect("{")?;
        if depth > MAX_DEPTH {
            return Err(syntax(open.line, "joint nesting too deep"));
        }
        let idx = self.joints.len();
        self.joints.push(RawJoint {
            name,
            parent,
            offset: [0.0; 3],
            channels: Vec::new(),
            order: AxisOrder::default(),
        });
        let mut seen_offset = false;
        let mut seen_channels = false;
        loop {
            let tok = self.next("`}`")?;
            match tok.text {
                "OFFSET" => {
                    if seen_offset {
                        return Err(syntax(tok.line, "OFFSET declared twice"));
                    }
                    seen_offset = true;
                    self.joints[idx].offset = self.offset()?;
                }
                "CHANNELS" => {
                    if seen_channels {
                        return Err(syntax(tok.line, "CHANNELS declared twice"));
                    }
                    seen_channels = true;
                    let (channels, order) = self.channels(parent.is_none())?;
                    self.joints[idx].channels = channels;
                    self.joints[idx].order = order;
                }
                "JOINT" => {
                    let name_tok = self.next("joint name")?;
                    let name = self.register_name(name_tok.text.to_owned(), name_tok.line)?;
                    self.joint_body(name, Some(idx), depth + 1)?;
                }
                "End" => {
                    self.expect("Site")?;
                    self.end_site(idx)?;
                }
                "}" => {
                    if !seen_offset {
                        return Err(syntax(
                            tok.line,
                            format!("joint `{}` has no OFFSET", self.joints[idx].name),
                        ));
                    }
                    return Ok(());
                }
                other => return Err(syntax(tok.line, format!("unexpected token `{other}` in joint body"))),
            }
        }
    }

    fn end_site(&mut self, parent: usize) -> Result<(), MotionError> {
        let open = self.expect("{")?;
        self.expect("OFFSET")?;
        let offset = self.offset()?;
        self.expect("}")?;
        let base = format!("{}_end", self.joints[parent].name);
        let mut name = base.clone();
        let mut n = 1;
        while self.names.contains(&name) {
            n += 1;
            name = format!("{base}{n}");
        }
        let name = self.register_name(name, open.line)?;
        self.joints.push(RawJoint {
            name,
            parent: Some(parent),
            offset,
            channels: Vec::new(),
            order: AxisOrder::default(),
        });
        Ok(())
    }
}

/// Parse mocap text. Offsets and root positions are multiplied by `scale`
/// (meters per file unit).
pub fn parse_mocap_text(text: &str, scale: f64) -> Result<Motion, MotionError> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(MotionError::InvalidScale(scale));
    }
    let lines: Vec<&str> = text.lines().collect();
    let mut tokens = Vec::new();
    let mut motion_idx = None;
    for (idx, line) in lines.iter().enumerate() {
        let mut words = line.split_whitespace().peekable();
        if words.peek() == Some(&"MOTION") {
            motion_idx = Some(idx);
            break;
        }
        tokens.extend(words.map(|text| Token { text, line: idx + 1 }));
    }
    let eof_line = lines.len().max(1);

    let mut parser = HierarchyParser {
        tokens,
        pos: 0,
        eof_line: motion_idx.map_or(eof_line, |i| i + 1),
        joints: Vec::new(),
        names: HashSet::new(),
    };
    parser.expect("HIERARCHY")?;
    parser.expect("ROOT")?;
    let name_tok = parser.next("root name")?;
    let root_name = parser.register_name(name_tok.text.to_owned(), name_tok.line)?;
    parser.joint_body(root_name, None, 0)?;
    if let Some(tok) = parser.tokens.get(parser.pos) {
        let message = if tok.text == "ROOT" {
            "multiple ROOT joints are not supported".to_owned()
        } else {
            format!("unexpected token `{}` after root joint", tok.text)
        };
        return Err(syntax(tok.line, message));
    }
    let motion_idx = motion_idx.ok_or_else(|| syntax(eof_line, "missing MOTION section"))?;

    let raw = parser.joints;
    let channel_total: usize = raw.iter().map(|j| j.channels.len()).sum();

    // motion header
    let mut rest = lines
        .iter()
        .enumerate()
        .skip(motion_idx + 1)
        .map(|(i, l)| (i + 1, *l))
        .filter(|(_, l)| !l.trim().is_empty());
    let (frames_line, frames_text) = rest
        .next()
        .ok_or_else(|| syntax(motion_idx + 1, "missing `Frames:` line"))?;
    let declared = header_value(frames_text, "Frames", frames_line)?;
    let declared: usize = declared
        .parse()
        .map_err(|_| syntax(frames_line, format!("invalid frame count `{declared}`")))?;
    if declared == 0 {
        return Err(syntax(frames_line, "motion section declares no frames"));
    }
    let (time_line, time_text) = rest
        .next()
        .ok_or_else(|| syntax(frames_line, "missing `Frame Time:` line"))?;
    let frame_time_text = header_value(time_text, "Frame Time", time_line)?;
    let frame_time = parse_number(Token {
        text: frame_time_text,
        line: time_line,
    })?;
    if frame_time <= 0.0 {
        return Err(MotionError::InvalidFrameTime {
            line: time_line,
            value: frame_time,
        });
    }

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(declared);
    for (line, text) in rest {
        let values = text
            .split_whitespace()
            .map(|t| parse_number(Token { text: t, line }))
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != channel_total {
            return Err(MotionError::ChannelCountMismatch {
                line,
                expected: channel_total,
                found: values.len(),
            });
        }
        rows.push(values);
    }
    if rows.len() != declared {
        return Err(MotionError::FrameCountMismatch {
            line: frames_line,
            declared,
            found: rows.len(),
        });
    }

    let joints: Vec<JointDef> = raw
        .iter()
        .map(|r| JointDef {
            name: r.name.clone(),
            parent: r.parent,
            offset: Vector3::from(r.offset) * scale,
            channel_order: r.order,
            channels: r.channels.clone(),
        })
        .collect();
    let skeleton = Skeleton::new(joints)?;

    let root_offset = Vector3::from(raw[0].offset);
    let frames = rows
        .iter()
        .map(|row| {
            let mut cursor = 0;
            let mut translation = root_offset;
            let mut rotations = Vec::with_capacity(raw.len());
            for joint in &raw {
                let values = &row[cursor..cursor + joint.channels.len()];
                cursor += joint.channels.len();
                let mut angles = Vec::with_capacity(3);
                for (ch, v) in joint.channels.iter().zip(values) {
                    if ch.is_rotation() {
                        angles.push(*v);
                    } else {
                        translation[ch.axis_index()] += v;
                    }
                }
                rotations.push(match angles.as_slice() {
                    [a, b, c] => euler::from_euler([*a, *b, *c], joint.order),
                    _ => UnitQuaternion::identity(),
                });
            }
            Frame {
                root_translation: translation * scale,
                rotations,
            }
        })
        .collect();
    let sequence = PoseSequence::new(1.0 / frame_time, frames)?;
    Motion::new(skeleton, sequence)
}

/// Value after `key:` on a motion header line.
fn header_value<'a>(text: &'a str, key: &str, line: usize) -> Result<&'a str, MotionError> {
    let trimmed = text.trim();
    let rest = trimmed
        .strip_prefix(key)
        .map(str::trim_start)
        .and_then(|r| r.strip_prefix(':'))
        .ok_or_else(|| syntax(line, format!("expected `{key}:`, found `{trimmed}`")))?;
    let mut words = rest.split_whitespace();
    let value = words
        .next()
        .ok_or_else(|| syntax(line, format!("missing value after `{key}:`")))?;
    if let Some(extra) = words.next() {
        return Err(syntax(line, format!("unexpected `{extra}` after `{key}:` value")));
    }
    Ok(value)
}

fn fmt6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_owned()
    } else {
        s
    }
}

/// Serialize to mocap text. Joints are written in depth-first order, which
/// is the order [`parse_mocap_text`] reads them back in.
pub fn serialize_mocap_text(skeleton: &Skeleton, seq: &PoseSequence, scale: f64) -> Result<String, MotionError> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(MotionError::InvalidScale(scale));
    }
    if seq.joint_count() != skeleton.len() {
        return Err(MotionError::JointCountMismatch {
            frame: 0,
            expected: skeleton.len(),
            found: seq.joint_count(),
        });
    }
    let root = skeleton
        .joints()
        .iter()
        .position(|j| j.parent.is_none())
        .expect("validated skeleton has a root");

    let mut order = Vec::with_capacity(skeleton.len());
    let mut out = String::from("HIERARCHY\n");
    write_joint(skeleton, root, 0, scale, &mut order, &mut out);

    let _ = writeln!(out, "MOTION");
    let _ = writeln!(out, "Frames: {}", seq.len());
    let _ = writeln!(out, "Frame Time: {}", 1.0 / seq.frame_rate());
    let root_offset = skeleton.joint(root).offset;
    for frame in seq.frames() {
        let mut values: Vec<String> = Vec::new();
        for &idx in &order {
            let joint = skeleton.joint(idx);
            if joint.channels.is_empty() {
                continue;
            }
            let angles = euler::decompose(&frame.rotations[idx], joint.channel_order);
            let mut rot = angles.iter();
            for ch in &joint.channels {
                let v = if ch.is_rotation() {
                    *rot.next().expect("three rotation channels")
                } else {
                    let axis = ch.axis_index();
                    (frame.root_translation[axis] - root_offset[axis]) / scale
                };
                values.push(fmt6(v));
            }
        }
        out.push_str(&values.join(" "));
        out.push('\n');
    }
    Ok(out)
}

fn write_joint(skeleton: &Skeleton, idx: usize, depth: usize, scale: f64, order: &mut Vec<usize>, out: &mut String) {
    let joint = skeleton.joint(idx);
    let pad = "\t".repeat(depth);
    let children: Vec<usize> = skeleton.children(idx).collect();
    let offset = joint.offset / scale;
    let offset = format!("{} {} {}", fmt6(offset.x), fmt6(offset.y), fmt6(offset.z));
    order.push(idx);
    if joint.parent.is_some() && joint.channels.is_empty() && children.is_empty() {
        let _ = writeln!(out, "{pad}End Site");
        let _ = writeln!(out, "{pad}{{");
        let _ = writeln!(out, "{pad}\tOFFSET {offset}");
        let _ = writeln!(out, "{pad}}}");
        return;
    }
    let keyword = if joint.parent.is_none() { "ROOT" } else { "JOINT" };
    let _ = writeln!(out, "{pad}{keyword} {}", joint.name);
    let _ = writeln!(out, "{pad}{{");
    let _ = writeln!(out, "{pad}\tOFFSET {offset}");
    let names: Vec<&str> = joint.channels.iter().map(|c| c.as_str()).collect();
    let _ = writeln!(out, "{pad}\tCHANNELS {} {}", names.len(), names.join(" "));
    for child in children {
        write_joint(skeleton, child, depth + 1, scale, order, out);
    }
    let _ = writeln!(out, "{pad}}}");
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_JOINT: &str = "HIERARCHY
ROOT Hips
{
\tOFFSET 0 0 0
\tCHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation
\tJOINT Knee
\t{
\t\tOFFSET 1 0 0
\t\tCHANNELS 3 Zrotation Xrotation Yrotation
\t\tEnd Site
\t\t{
\t\t\tOFFSET 0 -1 0
\t\t}
\t}
}
MOTION
Frames: 2
Frame Time: 0.008333
0 0 0 0 0 0 0 0 0
1 2 3 0 90 0 10 20 30
";

    #[test]
    fn parses_hand_built_fixture() {
        let m = parse_mocap_text(TWO_JOINT, 0.01).unwrap();
        assert_eq!(m.skeleton.len(), 3);
        let knee = m.skeleton.joint(1);
        assert_eq!(knee.name, "Knee");
        assert!((knee.offset - Vector3::new(0.01, 0.0, 0.0)).norm() < 1e-15);
        assert_eq!(knee.channel_order, AxisOrder::ZXY);
        assert_eq!(m.skeleton.joint(2).name, "Knee_end");
        assert!(m.skeleton.joint(2).is_end_site());
        assert!((m.sequence.frame_rate() - 120.0048).abs() < 1e-4);
        assert_eq!(m.sequence.len(), 2);
        let f1 = &m.sequence.frames()[1];
        assert!((f1.root_translation - Vector3::new(0.01, 0.02, 0.03)).norm() < 1e-15);
    }

    #[test]
    fn zero_channels_give_identity_rotations() {
        let m = parse_mocap_text(TWO_JOINT, 0.01).unwrap();
        for q in &m.sequence.frames()[0].rotations {
            assert_eq!(*q, UnitQuaternion::identity());
        }
    }

    #[test]
    fn short_motion_section_is_rejected_with_header_line() {
        let mut text = String::from(
            "HIERARCHY\nROOT r\n{\nOFFSET 0 0 0\nCHANNELS 3 Zrotation Xrotation Yrotation\n}\nMOTION\nFrames: 10\nFrame Time: 0.1\n",
        );
        for _ in 0..9 {
            text.push_str("0 0 0\n");
        }
        let err = parse_mocap_text(&text, 0.01).unwrap_err();
        assert_eq!(
            err,
            MotionError::FrameCountMismatch {
                line: 8,
                declared: 10,
                found: 9
            }
        );
    }

    #[test]
    fn quarter_turn_about_first_channel_serializes_as_ninety() {
        let m = parse_mocap_text(TWO_JOINT, 0.01).unwrap();
        let mut frames = m.sequence.frames().to_vec();
        frames[0].rotations[1] = Axis::Z.rotation(90.0);
        let seq = PoseSequence::new(m.sequence.frame_rate(), frames).unwrap();
        let text = serialize_mocap_text(&m.skeleton, &seq, 0.01).unwrap();
        let row = text.lines().rev().nth(1).unwrap();
        let values: Vec<&str> = row.split_whitespace().collect();
        assert_eq!(&values[6..9], &["90.000000", "0.000000", "0.000000"]);
        assert_eq!(&values[3..6], &["0.000000", "0.000000", "0.000000"]);
    }

    #[test]
    fn round_trip_preserves_fixture() {
        let m = parse_mocap_text(TWO_JOINT, 0.01).unwrap();
        let text = serialize_mocap_text(&m.skeleton, &m.sequence, 0.01).unwrap();
        let back = parse_mocap_text(&text, 0.01).unwrap();
        assert_eq!(back.skeleton.len(), m.skeleton.len());
        for (a, b) in m.skeleton.joints().iter().zip(back.skeleton.joints()) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.channels, b.channels);
            assert!((a.offset - b.offset).norm() < 1e-6);
        }
        for (fa, fb) in m.sequence.frames().iter().zip(back.sequence.frames()) {
            assert!((fa.root_translation - fb.root_translation).norm() < 1e-6);
            for (qa, qb) in fa.rotations.iter().zip(&fb.rotations) {
                assert!(euler::angular_distance(qa, qb) < 1e-6);
            }
        }
        assert!((m.sequence.frame_rate() - back.sequence.frame_rate()).abs() < 1e-6);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = TWO_JOINT.replace("OFFSET 1 0 0", "OFFSET 1 zero 0");
        let err = parse_mocap_text(&bad, 0.01).unwrap_err();
        assert_eq!(err.line(), Some(8));
        let bad = TWO_JOINT.replace("Frame Time: 0.008333", "Frame Time: 0");
        assert!(matches!(
            parse_mocap_text(&bad, 0.01).unwrap_err(),
            MotionError::InvalidFrameTime { line: 18, .. }
        ));
        let bad = TWO_JOINT.replace("1 2 3 0 90 0 10 20 30", "1 2 3 0 90 0 10 20");
        assert!(matches!(
            parse_mocap_text(&bad, 0.01).unwrap_err(),
            MotionError::ChannelCountMismatch {
                line: 20,
                expected: 9,
                found: 8
            }
        ));
    }
}
