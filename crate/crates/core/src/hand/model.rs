use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geom::{mesh_io, primitives, RigidTransform3, TriangleMesh};

/// Description file shipped with the crate.
pub const DEFAULT_HAND: &str = include_str!("../../assets/barrett_like.hand");

pub const FINGER_COUNT: usize = 3;

/// Finger ids are 1-based, as in the hand documentation.
pub fn check_finger(finger: usize) -> Result<usize> {
    if (1..=FINGER_COUNT).contains(&finger) {
        Ok(finger - 1)
    } else {
        Err(Error::InvalidFinger(finger))
    }
}

/// Collision geometry, each mesh in its own link frame.
#[derive(Clone, Debug)]
pub struct LinkMeshes {
    /// Palm frame.
    pub palm: TriangleMesh,
    /// Inner link frame (x along the link, joint axis z).
    pub inner: TriangleMesh,
    /// Outer link frame, from the outer joint to the fingertip circle center.
    pub outer: TriangleMesh,
    /// Outer link frame, centered on the fingertip circle center.
    pub tip: TriangleMesh,
}

/// Three-finger hand with one spread joint and coupled outer joints.
///
/// Immutable after loading; all kinematic constants live here.
#[derive(Clone, Debug)]
pub struct HandModel {
    pub name: String,
    /// Palm to finger root frame, per finger.
    pub bases: [RigidTransform3<f64>; FINGER_COUNT],
    /// Multiplier of the spread angle per finger (0 for a fixed finger).
    pub spread_signs: [f64; FINGER_COUNT],
    pub inner_link_length: f64,
    pub outer_link_length: f64,
    /// Outer joint angle is `coupling * inner + outer_offset`.
    pub coupling: f64,
    pub outer_offset: f64,
    /// Fingertip circle radius `r`.
    pub fingertip_radius: f64,
    /// Length of the fingertip vector, circle center to outer joint.
    pub fingertip_vector_length: f64,
    /// Angle of the fixed roll `R_0` about the outer-joint z axis.
    pub fingertip_roll: f64,
    pub spread_range: [f64; 2],
    pub inner_range: [f64; 2],
    pub link_half_thickness: f64,
    pub palm_size: Vector3<f64>,
    pub palm_center: Vector3<f64>,
    pub meshes: LinkMeshes,
}

impl HandModel {
    /// The built-in BarrettHand-like model.
    pub fn barrett_like() -> Self {
        Self::parse(DEFAULT_HAND, None).expect("built-in hand description is valid")
    }

    /// Loads a description file; relative mesh paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_with_origin(&text, Some(path))
    }

    /// Parses description text. `base_dir` resolves mesh paths.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let origin = base_dir.map(|d| d.join("hand"));
        Self::parse_with_origin(text, origin.as_deref())
    }

    fn parse_with_origin(text: &str, file: Option<&Path>) -> Result<Self> {
        let shown = file.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("<hand>"));
        let kv = KeyValues::parse(text, &shown)?;
        let mut bases = [RigidTransform3::identity(); FINGER_COUNT];
        let mut spread_signs = [0.0; FINGER_COUNT];
        for f in 0..FINGER_COUNT {
            let key = format!("finger{}.base", f + 1);
            let m = kv.floats(&key, 16)?;
            bases[f] = RigidTransform3::from_row_major(&m, 1e-6)
                .map_err(|e| kv.error(&key, e.to_string()))?
                .renormalized();
            spread_signs[f] = kv.scalar(&format!("finger{}.spread_sign", f + 1))?;
        }
        let range = |key: &str| -> Result<[f64; 2]> {
            let v = kv.floats(key, 2)?;
            Ok([v[0], v[1]])
        };
        let vec3 = |key: &str| -> Result<Vector3<f64>> {
            let v = kv.floats(key, 3)?;
            Ok(Vector3::new(v[0], v[1], v[2]))
        };
        let mut hand = HandModel {
            name: kv.get("name").map(|(_, v)| v.to_string()).unwrap_or_else(|| "hand".into()),
            bases,
            spread_signs,
            inner_link_length: kv.scalar("inner_link_length")?,
            outer_link_length: kv.scalar("outer_link_length")?,
            coupling: kv.scalar("coupling")?,
            outer_offset: kv.scalar_or("outer_offset", 0.0)?,
            fingertip_radius: kv.scalar("fingertip_radius")?,
            fingertip_vector_length: kv.scalar("fingertip_vector_length")?,
            fingertip_roll: kv.scalar_or("fingertip_roll", 0.0)?,
            spread_range: range("spread_range")?,
            inner_range: range("inner_range")?,
            link_half_thickness: kv.scalar("link_half_thickness")?,
            palm_size: vec3("palm_size")?,
            palm_center: vec3("palm_center")?,
            meshes: LinkMeshes {
                palm: TriangleMesh::empty(),
                inner: TriangleMesh::empty(),
                outer: TriangleMesh::empty(),
                tip: TriangleMesh::empty(),
            },
        };
        hand.meshes = hand.default_meshes();
        let dir = file.and_then(Path::parent);
        for (key, slot) in [
            ("palm_mesh", &mut hand.meshes.palm),
            ("inner_mesh", &mut hand.meshes.inner),
            ("outer_mesh", &mut hand.meshes.outer),
            ("tip_mesh", &mut hand.meshes.tip),
        ] {
            if let Some((_, rel)) = kv.get(key) {
                let path = dir.map_or_else(|| PathBuf::from(rel), |d| d.join(rel));
                *slot = mesh_io::load_mesh(&path, 1.0)?;
            }
        }
        hand.validate()?;
        Ok(hand)
    }

    /// Checks every model invariant.
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::invalid("hand model", reason));
        let positive = [
            ("inner_link_length", self.inner_link_length),
            ("outer_link_length", self.outer_link_length),
            ("fingertip_radius", self.fingertip_radius),
            ("fingertip_vector_length", self.fingertip_vector_length),
            ("link_half_thickness", self.link_half_thickness),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.coupling > 0.0 && self.coupling <= 1.0) {
            return bad(format!("coupling must lie in (0, 1], got {}", self.coupling));
        }
        for (name, r) in [("spread_range", self.spread_range), ("inner_range", self.inner_range)] {
            if !(r[0] < r[1]) || !r[0].is_finite() || !r[1].is_finite() {
                return bad(format!("{name} [{}, {}] is empty", r[0], r[1]));
            }
        }
        if !self.outer_offset.is_finite() || !self.fingertip_roll.is_finite() {
            return bad("non-finite angle".into());
        }
        for (f, b) in self.bases.iter().enumerate() {
            if !b.is_valid(1e-9) {
                return bad(format!("finger{} base is not a rigid transform", f + 1));
            }
        }
        for (name, m) in [
            ("palm", &self.meshes.palm),
            ("inner", &self.meshes.inner),
            ("outer", &self.meshes.outer),
            ("tip", &self.meshes.tip),
        ] {
            if m.is_empty() || !m.watertight_report().is_watertight() {
                return bad(format!("{name} collision mesh is not watertight"));
            }
        }
        Ok(())
    }

    /// Boxes for the palm and links, a sphere for the fingertip.
    fn default_meshes(&self) -> LinkMeshes {
        let h = self.link_half_thickness;
        let palm = primitives::cuboid(self.palm_size)
            .transformed(&RigidTransform3::from_translation(self.palm_center));
        let inner = primitives::cuboid(Vector3::new(self.inner_link_length, 2.0 * h, 2.0 * h))
            .transformed(&RigidTransform3::from_translation(Vector3::new(self.inner_link_length / 2.0, 0.0, 0.0)));
        let lv = self.fingertip_vector_length;
        let dir = self.tip_direction_outer();
        let outer = primitives::cuboid(Vector3::new(lv, 2.0 * h, 2.0 * h)).transformed(
            &(RigidTransform3::rot_z(-self.fingertip_roll)
                * RigidTransform3::from_translation(Vector3::new(lv / 2.0, 0.0, 0.0))),
        );
        let tip = primitives::icosphere(self.fingertip_radius, 2)
            .transformed(&RigidTransform3::from_translation(dir * lv));
        LinkMeshes { palm, inner, outer, tip }
    }

    /// Unit direction from the outer joint to the fingertip circle center,
    /// in the outer link frame.
    pub fn tip_direction_outer(&self) -> Vector3<f64> {
        Vector3::new(self.fingertip_roll.cos(), -self.fingertip_roll.sin(), 0.0)
    }

    /// Distance from the palm to the fully extended fingertip surface.
    pub fn standoff(&self) -> f64 {
        self.inner_link_length + self.outer_link_length
    }
}

/// `key = value` lines with `#` comments.
struct KeyValues<'a> {
    path: &'a Path,
    entries: BTreeMap<String, (usize, String)>,
}

impl<'a> KeyValues<'a> {
    fn parse(text: &str, path: &'a Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, i + 1, format!("expected `key = value`, found {line:?}")))?;
            let k = k.trim().to_string();
            if entries.insert(k.clone(), (i + 1, v.trim().to_string())).is_some() {
                return Err(Error::parse(path, i + 1, format!("duplicate key {k:?}")));
            }
        }
        Ok(Self { path, entries })
    }

    fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.entries.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn error(&self, key: &str, msg: String) -> Error {
        let line = self.get(key).map_or(0, |(l, _)| l);
        Error::parse(self.path, line, format!("{key}: {msg}"))
    }

    fn floats(&self, key: &str, n: usize) -> Result<Vec<f64>> {
        let (line, v) = self.get(key).ok_or_else(|| Error::parse(self.path, 0, format!("missing key {key:?}")))?;
        let vals = v
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| Error::parse(self.path, line, format!("{key}: bad number {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != n {
            return Err(Error::parse(self.path, line, format!("{key}: expected {n} values, found {}", vals.len())));
        }
        Ok(vals)
    }

    fn scalar(&self, key: &str) -> Result<f64> {
        Ok(self.floats(key, 1)?[0])
    }

    fn scalar_or(&self, key: &str, default: f64) -> Result<f64> {
        if self.get(key).is_some() {
            self.scalar(key)
        } else {
            Ok(default)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_model_loads() {
        let h = HandModel::barrett_like();
        assert_eq!(h.inner_link_length, 0.07);
        assert_eq!(h.outer_link_length, 0.058);
        assert!((h.coupling - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(h.fingertip_radius, 0.012);
        assert_eq!(h.spread_signs, [1.0, -1.0, 0.0]);
        assert!((h.inner_range[1] - 7.0 * std::f64::consts::PI / 9.0).abs() < 1e-15);
        assert!((h.spread_range[1] - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let bad = DEFAULT_HAND.replace("coupling = 0.3333333333333333", "coupling = abc");
        let err = HandModel::parse(&bad, None).unwrap_err();
        assert!(err.to_string().contains("coupling"), "{err}");
        let bad = DEFAULT_HAND.replace("fingertip_radius = 0.012", "fingertip_radius = -1");
        assert!(HandModel::parse(&bad, None).is_err());
        let bad = DEFAULT_HAND.replace("inner_range = 0.0 2.443460952792061", "inner_range = 1 0");
        assert!(HandModel::parse(&bad, None).is_err());
    }

    #[test]
    fn check_finger_ids() {
        assert_eq!(check_finger(1).unwrap(), 0);
        assert_eq!(check_finger(3).unwrap(), 2);
        assert!(matches!(check_finger(0), Err(Error::InvalidFinger(0))));
        assert!(check_finger(4).is_err());
    }
}
