//! End-to-end dataset generation and the capture validator.
//!
//! Every stage takes its randomness from one seed: synthesis shuffles its
//! samples with it, scene `s` is placed with `derive(seed, PLACEMENT, s)`,
//! capture `c` uses camera index `c` and downsampling index `c`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::formats::{
    self, absolute, read_annotations, read_capture, read_depth, read_labels, read_scene, relative_to, CaptureManifest,
    ObjectEntry,
};
use crate::geom::{PointCloud, TriangleMesh};
use crate::hand::{HandModel, FINGER_COUNT};
use crate::labels::{label_points, LabelSpecs, PointLabel, LABEL_RADIUS, SENTINEL_BIN};
use crate::scene::{
    depth_to_cloud, downsample, filter_grasps, place_objects, render_depth, to_camera_frame, DepthMap, FilterConfig,
    ObjectModel, PlacementConfig, Scene, VirtualCamera,
};
use crate::seed;
use crate::synth::{check_annotation, check_decode, synthesize_object, GraspAnnotation, SynthesisConfig};

/// Largest allowed distance from a captured point to the scene surface, meters.
pub const SURFACE_GAP: f64 = 1e-4;
/// Default size of the down-sampled capture cloud.
pub const CLOUD_POINTS: usize = 20_000;

/// Scene instance id `<object id>@<index in scene>` used in capture annotations.
pub fn instance_id(id: &str, index: usize) -> String {
    format!("{id}@{index}")
}

/// Inverse of [`instance_id`].
pub fn split_instance(s: &str) -> Option<(&str, usize)> {
    let (id, k) = s.rsplit_once('@')?;
    Some((id, k.parse().ok()?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaptureConfig {
    pub filter: FilterConfig,
    pub cloud_points: usize,
    pub label_radius: f64,
    pub specs: LabelSpecs,
}

impl Default for CaptureConfig {
    fn default() -> Self {
        Self {
            filter: FilterConfig::default(),
            cloud_points: CLOUD_POINTS,
            label_radius: LABEL_RADIUS,
            specs: LabelSpecs::default(),
        }
    }
}

/// One rendered view with camera-frame annotations and per-point labels.
#[derive(Clone, Debug)]
pub struct Capture {
    pub camera: VirtualCamera,
    pub depth: DepthMap,
    pub cloud: PointCloud,
    pub annotations: Vec<GraspAnnotation>,
    pub labels: Vec<PointLabel>,
}

/// Renders `scene`, filters each object's object-frame `grasps` against the
/// scene, moves the survivors into the camera frame and labels the cloud.
pub fn capture_scene(
    scene: &Scene,
    camera: &VirtualCamera,
    grasps: &BTreeMap<String, Vec<GraspAnnotation>>,
    hand: &HandModel,
    config: &CaptureConfig,
    downsample_seed: u64,
) -> Result<Capture> {
    camera.validate()?;
    let depth = render_depth(scene, camera);
    let cloud = downsample(&depth_to_cloud(&depth, camera), config.cloud_points, downsample_seed);
    let mut annotations = Vec::new();
    for (k, obj) in scene.objects.iter().enumerate() {
        let Some(anns) = grasps.get(&obj.model.id) else { continue };
        let kept = filter_grasps(scene, k, anns, hand, &config.filter)?;
        for mut a in to_camera_frame(camera, &kept, hand)? {
            a.object_id = instance_id(&obj.model.id, k);
            annotations.push(a);
        }
    }
    let labels = label_points(&cloud, &annotations, config.label_radius, &config.specs)?;
    Ok(Capture { camera: camera.clone(), depth, cloud, annotations, labels })
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Manifest path of the capture written at `prefix`.
pub fn capture_manifest_path(prefix: &Path) -> PathBuf {
    with_suffix(prefix, ".capture")
}

/// Writes `<prefix>.depth`, `.grasps`, `.labels` and the `.capture` manifest,
/// returning the manifest path.
pub fn write_capture(
    prefix: &Path,
    capture: &Capture,
    scene_path: &Path,
    hand_path: Option<&Path>,
    tau: f64,
    config: &CaptureConfig,
) -> Result<PathBuf> {
    let manifest = capture_manifest_path(prefix);
    let (depth, grasps, labels) = (with_suffix(prefix, ".depth"), with_suffix(prefix, ".grasps"), with_suffix(prefix, ".labels"));
    formats::write_depth(&depth, &capture.depth)?;
    formats::write_annotations(&grasps, &capture.annotations)?;
    formats::write_labels(&labels, &capture.cloud, &capture.labels)?;
    let m = CaptureManifest {
        scene: relative_to(&manifest, scene_path),
        camera: capture.camera.clone(),
        depth: relative_to(&manifest, &depth),
        annotations: relative_to(&manifest, &grasps),
        labels: relative_to(&manifest, &labels),
        hand: hand_path.map(absolute),
        tau,
        label_radius: config.label_radius,
        specs: config.specs,
    };
    formats::write_capture(&manifest, &m)?;
    Ok(manifest)
}

/// Up to this many messages are kept per check; the rest are counted.
const MAX_REPORTED: usize = 20;

struct Violations {
    list: Vec<String>,
    suppressed: usize,
}

impl Violations {
    fn push(&mut self, msg: String) {
        if self.list.len() < MAX_REPORTED {
            self.list.push(msg);
        } else {
            self.suppressed += 1;
        }
    }

    fn finish(mut self) -> Vec<String> {
        if self.suppressed > 0 {
            self.list.push(format!("... and {} more violations", self.suppressed));
        }
        self.list
    }
}

fn check_depth(depth: &DepthMap, camera: &VirtualCamera, world: &TriangleMesh, out: &mut Violations) {
    if (depth.width, depth.height) != (camera.width, camera.height) {
        out.push(format!("depth: {}×{} image for a {}×{} camera", depth.width, depth.height, camera.width, camera.height));
        return;
    }
    let bad: Vec<(u32, u32, f64)> = (0..depth.height)
        .into_par_iter()
        .flat_map_iter(|v| {
            (0..depth.width).filter_map(move |u| {
                let d = depth.get(u, v);
                if d == 0.0 {
                    return None;
                }
                if !(d.is_finite() && d > 0.0) {
                    return Some((u, v, f64::NAN));
                }
                let p = camera.pose.apply_point(&camera.back_project(u as f64, v as f64, d));
                let gap = world.min_distance(&p);
                (gap > SURFACE_GAP).then_some((u, v, gap))
            })
        })
        .collect();
    for (u, v, gap) in bad {
        out.push(format!("depth[{u},{v}]: back-projects {gap:e} m from the scene"));
    }
}

fn check_labels(
    cloud: &PointCloud,
    labels: &[PointLabel],
    m: &CaptureManifest,
    world: &TriangleMesh,
    out: &mut Violations,
) {
    let specs = m.specs.ordered();
    for (i, (p, l)) in cloud.points.iter().zip(labels).enumerate() {
        let w = m.camera.pose.apply_point(&p.position);
        let gap = world.min_distance(&w);
        if !(gap <= SURFACE_GAP) {
            out.push(format!("labels[{i}].position: {gap:e} m from the scene"));
        }
        if !((p.normal.norm() - 1.0).abs() <= 1e-5) {
            out.push(format!("labels[{i}].normal: norm {}", p.normal.norm()));
        }
        if !l.graspable {
            if l.finger != 0 || l.joints.iter().any(|j| j.0 != SENTINEL_BIN) {
                out.push(format!("labels[{i}].finger: non-graspable point without sentinel targets"));
            }
            continue;
        }
        if !(1..=FINGER_COUNT as u8).contains(&l.finger) {
            out.push(format!("labels[{i}].finger: {} is not a finger id", l.finger));
        }
        if !(l.x * l.x + l.y * l.y <= 1.0 + 1e-5) {
            out.push(format!("labels[{i}].xy: ({}, {}) outside the unit disk", l.x, l.y));
        }
        for (k, (&(bin, res), spec)) in l.joints.iter().zip(&specs).enumerate() {
            if bin as usize >= spec.n_bins {
                out.push(format!("labels[{i}].joints[{k}].bin: {bin} out of {} bins", spec.n_bins));
            }
            if !(-0.5..0.5).contains(&res) {
                out.push(format!("labels[{i}].joints[{k}].res: {res} outside [-0.5, 0.5)"));
            }
        }
    }
}

/// Re-checks every invariant of the capture described by `manifest`.
///
/// Unreadable or malformed files are errors; violated invariants are
/// returned as messages naming the offending field.
pub fn validate_capture(manifest: &Path) -> Result<Vec<String>> {
    let m = read_capture(manifest)?;
    let hand = match &m.hand {
        Some(p) => HandModel::load(p)?,
        None => HandModel::barrett_like(),
    };
    let scene = read_scene(&m.scene)?;
    let depth = read_depth(&m.depth)?;
    let annotations = read_annotations(&m.annotations)?;
    let (cloud, labels) = read_labels(&m.labels)?;
    let meshes = scene.world_meshes();
    let world = TriangleMesh::merge(meshes.iter());

    let mut out = Violations { list: Vec::new(), suppressed: 0 };
    for v in scene.check() {
        out.push(format!("scene: {v}"));
    }
    check_depth(&depth, &m.camera, &world, &mut out);
    for (i, a) in annotations.iter().enumerate() {
        let Some((id, k)) = split_instance(&a.object_id) else {
            out.push(format!("annotations[{i}].object_id: {:?} is not an instance id", a.object_id));
            continue;
        };
        match scene.objects.get(k) {
            Some(o) if o.model.id == id => {
                for v in check_decode(a, &hand) {
                    out.push(format!("annotations[{i}] (camera frame): {v}"));
                }
                match a.transformed(&m.camera.pose, &hand) {
                    Ok(w) => {
                        for v in check_annotation(&w, &meshes[k], &hand, m.tau) {
                            out.push(format!("annotations[{i}]: {v}"));
                        }
                    }
                    Err(e) => out.push(format!("annotations[{i}]: {e}")),
                }
            }
            _ => out.push(format!("annotations[{i}].object_id: {:?} does not match the scene", a.object_id)),
        }
    }
    check_labels(&cloud, &labels, &m, &world, &mut out);
    Ok(out.finish())
}

/// Parameters of a full dataset run.
#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub seed: u64,
    pub synthesis: SynthesisConfig,
    pub placement: PlacementConfig,
    pub capture: CaptureConfig,
    pub scenes: usize,
    pub objects_per_scene: usize,
    pub views_per_scene: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            synthesis: SynthesisConfig::default(),
            placement: PlacementConfig::default(),
            capture: CaptureConfig::default(),
            scenes: 1,
            objects_per_scene: 3,
            views_per_scene: 1,
        }
    }
}

impl PipelineConfig {
    /// `key value` pairs of every parameter, in a fixed order.
    pub fn params(&self) -> Vec<(String, String)> {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let s = &self.synthesis;
        let c = &self.capture;
        let mut p: Vec<(&str, String)> = vec![
            ("seed", self.seed.to_string()),
            ("depths", list(&s.space.depths)),
            ("rolls", list(&s.space.rolls)),
            ("spreads", list(&s.space.spreads)),
            ("mu", format!("{:?}", s.friction.mu)),
            ("cone_edges", s.friction.edges.to_string()),
            ("torque_scale", "mesh".into()),
            ("tau", format!("{:?}", s.tau)),
            ("target_count", s.target_count.to_string()),
            ("voxel", format!("{:?}", s.voxel)),
            ("scenes", self.scenes.to_string()),
            ("objects_per_scene", self.objects_per_scene.to_string()),
            ("views_per_scene", self.views_per_scene.to_string()),
            ("placement_clearance", format!("{:?}", self.placement.clearance)),
            ("table_half_extent", format!("{:?}", self.placement.table_half_extent)),
            ("filter_clearance", format!("{:?}", c.filter.min_clearance)),
            ("retreat", format!("{:?}x{}", c.filter.retreat_distance, c.filter.retreat_steps)),
            ("camera", "random".into()),
            ("cloud_points", c.cloud_points.to_string()),
            ("label_radius", format!("{:?}", c.label_radius)),
        ];
        for (name, b) in ["bins_main", "bins_spread", "bins_support1", "bins_support2"].iter().zip(c.specs.ordered()) {
            p.push((name, format!("{:?},{:?},{}", b.lo, b.hi, b.n_bins)));
        }
        p.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

/// Everything a dataset run produced.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetManifest {
    pub params: Vec<(String, String)>,
    pub objects: Vec<ObjectEntry>,
    /// Object id and its annotation file.
    pub annotations: Vec<(String, PathBuf)>,
    pub scenes: Vec<PathBuf>,
    /// Capture manifests.
    pub captures: Vec<PathBuf>,
}

impl DatasetManifest {
    /// Text form; paths are written relative to `dir` when they lie inside it.
    pub fn format(&self, dir: &Path) -> String {
        let rel = |p: &Path| p.strip_prefix(dir).unwrap_or(p).display().to_string();
        let mut s = String::from("# contact-grasp dataset v1\n");
        for (k, v) in &self.params {
            let _ = writeln!(s, "param {k} {v}");
        }
        for o in &self.objects {
            let _ = writeln!(s, "object {} {:?} {}", o.id, o.scale, absolute(&o.path).display());
        }
        for (id, p) in &self.annotations {
            let _ = writeln!(s, "annotations {id} {}", rel(p));
        }
        for p in &self.scenes {
            let _ = writeln!(s, "scene {}", rel(p));
        }
        for p in &self.captures {
            let _ = writeln!(s, "capture {}", rel(p));
        }
        s
    }

    /// Referenced files that do not exist.
    pub fn missing_files(&self) -> Vec<PathBuf> {
        let all = self.objects.iter().map(|o| &o.path).chain(self.annotations.iter().map(|a| &a.1));
        all.chain(&self.scenes).chain(&self.captures).filter(|p| !p.exists()).cloned().collect()
    }
}

/// File name of the dataset manifest inside the output directory.
pub const DATASET_MANIFEST: &str = "dataset.manifest";

/// Runs synthesis for every object, then places, renders and labels
/// `config.scenes` scenes, writing everything into `out_dir`.
pub fn run_pipeline(objects: &[ObjectEntry], hand: &HandModel, config: &PipelineConfig, out_dir: &Path) -> Result<DatasetManifest> {
    if objects.is_empty() {
        return Err(Error::invalid("object registry", "no objects"));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let models: Vec<ObjectModel> = objects.iter().map(ObjectEntry::load).collect::<Result<_>>()?;
    let synthesis = SynthesisConfig { seed: config.seed, ..config.synthesis.clone() };
    let mut grasps = BTreeMap::new();
    let mut annotation_files = Vec::new();
    for m in &models {
        let report = synthesize_object(&m.mesh, hand, &synthesis, &m.id)?;
        let path = out_dir.join(format!("{}.grasps", m.id));
        formats::write_annotations(&path, &report.annotations)?;
        annotation_files.push((m.id.clone(), path));
        grasps.insert(m.id.clone(), report.annotations);
    }
    let mut scenes = Vec::new();
    let mut captures = Vec::new();
    for s in 0..config.scenes {
        let scene_seed = seed::derive(config.seed, seed::stream::PLACEMENT, s as u64);
        let scene = place_objects(&models, config.objects_per_scene, scene_seed, &config.placement);
        let scene_path = out_dir.join(format!("scene_{s:03}.scene"));
        formats::write_scene(&scene_path, &scene)?;
        for v in 0..config.views_per_scene {
            let index = (s * config.views_per_scene + v) as u64;
            let camera = VirtualCamera::random(config.seed, index);
            let ds = seed::derive(config.seed, seed::stream::DOWNSAMPLE, index);
            let capture = capture_scene(&scene, &camera, &grasps, hand, &config.capture, ds)?;
            let prefix = out_dir.join(format!("scene_{s:03}_view_{v:02}"));
            captures.push(write_capture(&prefix, &capture, &scene_path, None, synthesis.tau, &config.capture)?);
        }
        scenes.push(scene_path);
    }
    let manifest = DatasetManifest {
        params: config.params(),
        objects: objects.to_vec(),
        annotations: annotation_files,
        scenes,
        captures,
    };
    let path = out_dir.join(DATASET_MANIFEST);
    std::fs::write(&path, manifest.format(out_dir)).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
