//! Text annotation records, one grasp per line.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;

use crate::contact_repr::CompactGrasp;
use crate::error::{Error, Result};
use crate::geom::{OrientedPoint3, RigidTransform3};
use crate::hand::{JointConfig, FINGER_COUNT};
use crate::synth::GraspAnnotation;

/// Header written at the top of every annotation file.
pub const ANNOTATION_HEADER: &str = "\
# contact-grasp annotations v1
# one grasp per line, space separated:
#   object_id pose[16, row-major 4x4] spread inner1 inner2 inner3
#   3 x (contact px py pz nx ny nz) 3 x (projection x y) anchor epsilon sampled
";

const FIELDS: usize = 1 + 16 + 4 + 18 + 6 + 3;

/// Tolerance when re-reading stored pose rotations.
const POSE_TOLERANCE: f64 = 1e-9;

/// One record line, without the trailing newline.
pub fn format_annotation(a: &GraspAnnotation) -> String {
    let mut s = a.object_id.clone();
    let mut put = |x: f64| {
        let _ = write!(s, " {x:?}");
    };
    for x in a.pose.to_row_major() {
        put(x);
    }
    put(a.joints.spread);
    for q in a.joints.inner {
        put(q);
    }
    for c in &a.contacts {
        for x in c.position.iter().chain(c.normal.iter()) {
            put(*x);
        }
    }
    for g in &a.compact {
        put(g.x);
        put(g.y);
    }
    let _ = write!(s, " {} {:?} {}", a.anchor, a.epsilon, a.epsilon_sampled as u8);
    s
}

pub fn format_annotations(annotations: &[GraspAnnotation]) -> String {
    let mut s = String::from(ANNOTATION_HEADER);
    for a in annotations {
        s.push_str(&format_annotation(a));
        s.push('\n');
    }
    s
}

/// Compact grasp anchored at finger `f` (1-based) of a joint configuration.
pub fn compact_from_joints(f: usize, x: f64, y: f64, q: &JointConfig<f64>) -> CompactGrasp<f64> {
    let others: Vec<f64> = (0..FINGER_COUNT).filter(|&i| i != f - 1).map(|i| q.inner[i]).collect();
    CompactGrasp { finger: f, x, y, theta_ms: q.spread, theta_m: q.inner[f - 1], theta_s1: others[0], theta_s2: others[1] }
}

fn parse_line(line: &str) -> std::result::Result<GraspAnnotation, String> {
    let tok: Vec<&str> = line.split_whitespace().collect();
    if tok.len() != FIELDS {
        return Err(format!("expected {FIELDS} fields, found {}", tok.len()));
    }
    let num = |i: usize| -> std::result::Result<f64, String> {
        tok[i].parse::<f64>().map_err(|_| format!("field {} is not a number: {:?}", i + 1, tok[i]))
    };
    let nums: Vec<f64> = (1..FIELDS - 3).map(num).collect::<std::result::Result<_, _>>()?;
    if nums.iter().any(|x| !x.is_finite()) {
        return Err("non-finite value".into());
    }
    let pose = RigidTransform3::from_row_major(&nums[0..16], POSE_TOLERANCE).map_err(|e| e.to_string())?;
    let joints = JointConfig { spread: nums[16], inner: [nums[17], nums[18], nums[19]] };
    let mut contacts = [OrientedPoint3 { position: Vector3::zeros(), normal: Vector3::z() }; FINGER_COUNT];
    for (f, c) in contacts.iter_mut().enumerate() {
        let o = 20 + 6 * f;
        *c = OrientedPoint3::new(
            Vector3::new(nums[o], nums[o + 1], nums[o + 2]),
            Vector3::new(nums[o + 3], nums[o + 4], nums[o + 5]),
        )
        .map_err(|e| format!("contact {}: {e}", f + 1))?;
    }
    let compact: [CompactGrasp<f64>; FINGER_COUNT] =
        std::array::from_fn(|f| compact_from_joints(f + 1, nums[38 + 2 * f], nums[39 + 2 * f], &joints));
    let anchor: usize = tok[FIELDS - 3].parse().map_err(|_| format!("bad anchor {:?}", tok[FIELDS - 3]))?;
    if !(1..=FINGER_COUNT).contains(&anchor) {
        return Err(format!("anchor finger {anchor} out of range"));
    }
    let epsilon = num(FIELDS - 2)?;
    let epsilon_sampled = match tok[FIELDS - 1] {
        "0" => false,
        "1" => true,
        t => return Err(format!("bad sampled flag {t:?}")),
    };
    Ok(GraspAnnotation { object_id: tok[0].to_string(), pose, joints, contacts, compact, anchor, epsilon, epsilon_sampled })
}

/// Parses annotation text; blank lines and `#` comments are skipped.
pub fn parse_annotations(text: &str, path: &Path) -> Result<Vec<GraspAnnotation>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(parse_line(line).map_err(|m| Error::parse(path, i + 1, m))?);
    }
    Ok(out)
}

pub fn write_annotations(path: &Path, annotations: &[GraspAnnotation]) -> Result<()> {
    if let Some(a) = annotations.iter().find(|a| a.object_id.is_empty() || a.object_id.contains(char::is_whitespace)) {
        return Err(Error::Format(format!("object id {:?} must be non-empty without whitespace", a.object_id)));
    }
    std::fs::write(path, format_annotations(annotations)).map_err(|e| Error::io(path, e))
}

pub fn read_annotations(path: &Path) -> Result<Vec<GraspAnnotation>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_annotations(&text, path)
}
