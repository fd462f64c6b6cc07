//! Text manifests: object registries, scenes and captures.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geom::mesh_io::load_mesh;
use crate::geom::RigidTransform3;
use crate::labels::{BinSpec, LabelSpecs};
use crate::scene::{ObjectModel, Scene, SceneObject, VirtualCamera};

const POSE_TOLERANCE: f64 = 1e-9;

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new("")).join(p)
    }
}

/// Absolute form of `p` (without resolving symlinks), or `p` itself if that fails.
pub fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

/// `p` as written in a manifest at `manifest`: a bare file name when both
/// share a directory, otherwise an absolute path.
pub fn relative_to(manifest: &Path, p: &Path) -> PathBuf {
    let (m, a) = (absolute(manifest), absolute(p));
    match (m.parent(), a.parent(), a.file_name()) {
        (Some(dm), Some(da), Some(name)) if dm == da => PathBuf::from(name),
        _ => a,
    }
}

fn check_id(id: &str) -> Result<()> {
    if id.is_empty() || id.contains(char::is_whitespace) || id.contains('@') {
        return Err(Error::Format(format!("object id {id:?} must be non-empty, without whitespace or '@'")));
    }
    Ok(())
}

/// An `id path [scale]` line of an object registry.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectEntry {
    pub id: String,
    pub path: PathBuf,
    pub scale: f64,
}

impl ObjectEntry {
    pub fn load(&self) -> Result<ObjectModel> {
        Ok(ObjectModel::new(self.id.clone(), self.path.clone(), self.scale, load_mesh(&self.path, self.scale)?))
    }
}

/// Parses an object registry; relative mesh paths are taken relative to `path`'s directory.
pub fn parse_objects(text: &str, path: &Path) -> Result<Vec<ObjectEntry>> {
    let mut out: Vec<ObjectEntry> = Vec::new();
    for (ln, line) in lines(text) {
        let tok: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&tok.len()) {
            return Err(Error::parse(path, ln, "expected `id path [scale]`"));
        }
        check_id(tok[0]).map_err(|e| Error::parse(path, ln, e.to_string()))?;
        if out.iter().any(|o| o.id == tok[0]) {
            return Err(Error::parse(path, ln, format!("duplicate object id {:?}", tok[0])));
        }
        let scale = match tok.get(2) {
            Some(s) => s.parse::<f64>().map_err(|_| Error::parse(path, ln, format!("bad scale {s:?}")))?,
            None => 1.0,
        };
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::parse(path, ln, format!("scale {scale} must be positive")));
        }
        out.push(ObjectEntry { id: tok[0].to_string(), path: resolve(path, tok[1]), scale });
    }
    Ok(out)
}

pub fn read_objects(path: &Path) -> Result<Vec<ObjectEntry>> {
    parse_objects(&read_text(path)?, path)
}

fn floats(tok: &[&str], path: &Path, ln: usize) -> Result<Vec<f64>> {
    tok.iter()
        .map(|t| match t.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(Error::parse(path, ln, format!("bad number {t:?}"))),
        })
        .collect()
}

fn put_pose(s: &mut String, pose: &RigidTransform3<f64>) {
    for x in pose.to_row_major() {
        let _ = write!(s, " {x:?}");
    }
}

/// Scene manifest: one `object <id> <scale> <pose[16]> <mesh path>` line per object.
pub fn format_scene(scene: &Scene) -> Result<String> {
    let mut s = String::from("# contact-grasp scene v1\n# object <id> <scale> <pose: 16 values, row-major 4x4> <mesh path>\n");
    for o in &scene.objects {
        check_id(&o.model.id)?;
        let _ = write!(s, "object {} {:?}", o.model.id, o.model.scale);
        put_pose(&mut s, &o.pose);
        let _ = writeln!(s, " {}", absolute(&o.model.path).display());
    }
    Ok(s)
}

/// Parses a scene manifest and loads its meshes.
pub fn parse_scene(text: &str, path: &Path) -> Result<Scene> {
    let mut scene = Scene::default();
    let mut cache: Vec<ObjectModel> = Vec::new();
    for (ln, line) in lines(text) {
        let tok: Vec<&str> = line.splitn(20, ' ').collect();
        if tok.len() != 20 || tok[0] != "object" {
            return Err(Error::parse(path, ln, "expected `object <id> <scale> <16 pose values> <path>`"));
        }
        let v = floats(&tok[2..19], path, ln)?;
        let pose = RigidTransform3::from_row_major(&v[1..17], POSE_TOLERANCE).map_err(|e| Error::parse(path, ln, e.to_string()))?;
        let (id, scale, mesh_path) = (tok[1], v[0], resolve(path, tok[19]));
        let model = match cache.iter().find(|m| m.id == id && m.scale == scale && m.path == mesh_path) {
            Some(m) => m.clone(),
            None => {
                let m = ObjectModel::new(id, mesh_path, scale, load_mesh(&resolve(path, tok[19]), scale)?);
                cache.push(m.clone());
                m
            }
        };
        scene.objects.push(SceneObject { model, pose });
    }
    Ok(scene)
}

pub fn write_scene(path: &Path, scene: &Scene) -> Result<()> {
    write_text(path, &format_scene(scene)?)
}

pub fn read_scene(path: &Path) -> Result<Scene> {
    parse_scene(&read_text(path)?, path)
}

/// Files and parameters of one rendered capture. Data file names are
/// relative to the manifest.
#[derive(Clone, Debug, PartialEq)]
pub struct CaptureManifest {
    pub scene: PathBuf,
    pub camera: VirtualCamera,
    pub depth: PathBuf,
    pub annotations: PathBuf,
    pub labels: PathBuf,
    /// Hand description, or `None` for the built-in hand.
    pub hand: Option<PathBuf>,
    /// Quality threshold the annotations were synthesized with.
    pub tau: f64,
    pub label_radius: f64,
    pub specs: LabelSpecs,
}

pub fn format_capture(c: &CaptureManifest) -> String {
    let mut s = String::from("# contact-grasp capture v1\n");
    let _ = writeln!(s, "scene {}", c.scene.display());
    let cam = &c.camera;
    let _ = write!(s, "camera {:?} {:?} {:?} {:?} {} {}", cam.fx, cam.fy, cam.cx, cam.cy, cam.width, cam.height);
    put_pose(&mut s, &cam.pose);
    s.push('\n');
    let _ = writeln!(s, "depth {}", c.depth.display());
    let _ = writeln!(s, "annotations {}", c.annotations.display());
    let _ = writeln!(s, "labels {}", c.labels.display());
    match &c.hand {
        Some(h) => {
            let _ = writeln!(s, "hand {}", h.display());
        }
        None => s.push_str("hand builtin\n"),
    }
    let _ = writeln!(s, "tau {:?}", c.tau);
    let _ = writeln!(s, "label_radius {:?}", c.label_radius);
    for (name, b) in ["main", "spread", "support1", "support2"].iter().zip(c.specs.ordered()) {
        let _ = writeln!(s, "bins {name} {:?} {:?} {}", b.lo, b.hi, b.n_bins);
    }
    s
}

/// Parses a capture manifest; paths are resolved against `path`'s directory.
pub fn parse_capture(text: &str, path: &Path) -> Result<CaptureManifest> {
    let (mut scene, mut camera, mut depth, mut annotations, mut labels, mut hand, mut radius) =
        (None, None, None, None, None, None, None);
    let mut tau = None;
    let mut bins: [Option<BinSpec>; 4] = [None; 4];
    for (ln, line) in lines(text) {
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        let bad = |m: String| Error::parse(path, ln, m);
        match key {
            "scene" => scene = Some(resolve(path, rest)),
            "depth" => depth = Some(resolve(path, rest)),
            "annotations" => annotations = Some(resolve(path, rest)),
            "labels" => labels = Some(resolve(path, rest)),
            "hand" => hand = Some(if rest == "builtin" { None } else { Some(resolve(path, rest)) }),
            "tau" => tau = Some(floats(&[rest], path, ln)?[0]),
            "label_radius" => radius = Some(floats(&[rest], path, ln)?[0]),
            "camera" => {
                let tok: Vec<&str> = rest.split_whitespace().collect();
                if tok.len() != 22 {
                    return Err(bad(format!("camera needs 22 values, found {}", tok.len())));
                }
                let f = floats(&tok[0..4], path, ln)?;
                let (w, h) = (
                    tok[4].parse::<u32>().map_err(|_| bad("bad width".into()))?,
                    tok[5].parse::<u32>().map_err(|_| bad("bad height".into()))?,
                );
                let pose = RigidTransform3::from_row_major(&floats(&tok[6..], path, ln)?, POSE_TOLERANCE)
                    .map_err(|e| bad(e.to_string()))?;
                camera = Some(VirtualCamera::new(f[0], f[1], f[2], f[3], w, h, pose).map_err(|e| bad(e.to_string()))?);
            }
            "bins" => {
                let tok: Vec<&str> = rest.split_whitespace().collect();
                let slot = ["main", "spread", "support1", "support2"].iter().position(|n| tok.first() == Some(n));
                let (Some(slot), 4) = (slot, tok.len()) else {
                    return Err(bad("expected `bins <main|spread|support1|support2> lo hi n`".into()));
                };
                let f = floats(&tok[1..3], path, ln)?;
                let n = tok[3].parse::<usize>().map_err(|_| bad(format!("bad bin count {:?}", tok[3])))?;
                bins[slot] = Some(BinSpec::new(f[0], f[1], n).map_err(|e| bad(e.to_string()))?);
            }
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
    }
    let missing = |k: &str| Error::parse(path, 0, format!("missing `{k}` entry"));
    let specs = match bins {
        [Some(main), Some(spread), Some(s1), Some(s2)] => LabelSpecs { main, spread, support: [s1, s2] },
        _ => return Err(missing("bins")),
    };
    Ok(CaptureManifest {
        scene: scene.ok_or_else(|| missing("scene"))?,
        camera: camera.ok_or_else(|| missing("camera"))?,
        depth: depth.ok_or_else(|| missing("depth"))?,
        annotations: annotations.ok_or_else(|| missing("annotations"))?,
        labels: labels.ok_or_else(|| missing("labels"))?,
        hand: hand.ok_or_else(|| missing("hand"))?,
        tau: tau.ok_or_else(|| missing("tau"))?,
        label_radius: radius.ok_or_else(|| missing("label_radius"))?,
        specs,
    })
}

pub fn read_capture(path: &Path) -> Result<CaptureManifest> {
    parse_capture(&read_text(path)?, path)
}

pub fn write_capture(path: &Path, c: &CaptureManifest) -> Result<()> {
    write_text(path, &format_capture(c))
}
