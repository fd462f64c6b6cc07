//! `contact-grasp`: command-line front end of the dataset pipeline.

mod camera_spec;

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use contact_grasp::formats::{self, read_annotations, read_objects, write_annotations, write_scene};
use contact_grasp::geom::mesh_io::{load_mesh, save_off};
use contact_grasp::geom::primitives;
use contact_grasp::hand::HandModel;
use contact_grasp::pipeline::{self, capture_manifest_path, CaptureConfig, PipelineConfig};
use contact_grasp::quality::{
    epsilon_quality_detailed, epsilon_sampling_oracle, grasp_wrenches, FrictionModel, QualityMethod, Wrench,
};
use contact_grasp::scene::{place_objects, PlacementConfig};
use contact_grasp::synth::{check_annotation, synthesize_object, torque_normalization, SynthesisConfig};
use nalgebra::{Vector3, Vector6};

const AFTER_HELP: &str = "\
File formats:
  annotations  text, one grasp per line after a `#` header: object id, 4x4 row-major pose,
               spread and three inner joints, 3 contacts (position, normal), 3 (x, y)
               projections, anchor finger, epsilon, sampled flag
  objects      text, `id path [scale]` per line; paths relative to the manifest
  scene        text, `object <id> <scale> <16 pose values> <mesh path>` per line
  capture      text manifest `<prefix>.capture` naming the depth, annotation and label files
  depth        binary, magic \"CMGD\", u32 width, u32 height, row-major f32 meters (LE)
  labels       binary, magic \"CMGL\", u32 count, then per point: position 3xf32, normal 3xf32,
               graspable u8, finger u8, x f32, y f32, 4 x (bin u16, res f32) (LE)";

#[derive(Parser)]
#[command(name = "contact-grasp", version, about = "Synthetic multi-finger grasp dataset pipeline", after_help = AFTER_HELP)]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "CONTACT_GRASP_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct HandArg {
    /// Hand description file; the built-in three-finger hand when omitted.
    #[arg(long)]
    hand: Option<PathBuf>,
}

impl HandArg {
    fn load(&self) -> Result<HandModel> {
        Ok(match &self.hand {
            Some(p) => HandModel::load(p).with_context(|| format!("loading hand {}", p.display()))?,
            None => HandModel::barrett_like(),
        })
    }
}

#[derive(clap::Args, Clone)]
struct FrictionArgs {
    /// Friction coefficient.
    #[arg(long, default_value_t = 0.5)]
    mu: f64,
    /// Friction cone edges per contact.
    #[arg(long, default_value_t = 8)]
    cone_edges: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Sphere,
    Box,
    Cylinder,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize grasp annotations for one object mesh.
    SampleGrasps {
        /// Object mesh (.off or .obj).
        #[arg(long)]
        mesh: PathBuf,
        #[command(flatten)]
        hand: HandArg,
        /// Output annotation file.
        #[arg(long)]
        out: PathBuf,
        /// Object id written into each record (default: mesh file stem).
        #[arg(long)]
        id: Option<String>,
        /// Scale applied to the mesh coordinates.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Minimum ε-quality of a kept grasp.
        #[arg(long, default_value_t = 0.05)]
        tau: f64,
        /// Stop after this many annotations.
        #[arg(long, default_value_t = 15_000)]
        target: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Voxel size of the surface samples, meters.
        #[arg(long, default_value_t = 0.01)]
        voxel: f64,
        #[command(flatten)]
        friction: FrictionArgs,
    },
    /// Place objects from a registry on the table and write a scene manifest.
    BuildScene {
        /// Object registry (`id path [scale]` per line).
        #[arg(long)]
        objects: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Minimum distance between objects, meters.
        #[arg(long, default_value_t = 0.005)]
        clearance: f64,
    },
    /// Render a scene, filter and transfer annotations, and write depth, grasps and labels.
    Render {
        #[arg(long)]
        scene: PathBuf,
        /// random:<seed>[:<index>], identity, look:ex,ey,ez,tx,ty,tz or pose:<16 values>,
        /// optionally followed by @fx,fy,cx,cy,width,height.
        #[arg(long, default_value = "random:0")]
        camera: String,
        /// Directory with one `<object id>.grasps` file per object.
        #[arg(long)]
        annotations: PathBuf,
        /// Output prefix; writes <prefix>.depth, .grasps, .labels and .capture.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        hand: HandArg,
        /// Quality threshold the annotations were synthesized with.
        #[arg(long, default_value_t = 0.05)]
        tau: f64,
        /// Points kept in the labeled cloud.
        #[arg(long, default_value_t = pipeline::CLOUD_POINTS)]
        cloud_points: usize,
        /// Seed of the cloud down-sampling.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Re-check a capture, or an annotation file against its mesh.
    Validate {
        /// Capture prefix or `.capture` manifest.
        #[arg(long, conflicts_with_all = ["annotations", "mesh"])]
        capture: Option<PathBuf>,
        /// Object-frame annotation file.
        #[arg(long, requires = "mesh")]
        annotations: Option<PathBuf>,
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 0.05)]
        tau: f64,
        #[command(flatten)]
        hand: HandArg,
    },
    /// Recompute ε exactly and with the sampling oracle.
    EvalQuality {
        /// Object-frame annotation file.
        #[arg(long, required_unless_present = "wrenches", conflicts_with = "wrenches")]
        annotations: Option<PathBuf>,
        /// Object mesh giving the torque origin and scale (default: contact centroid, unit scale).
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Raw wrench set, six numbers per line.
        #[arg(long)]
        wrenches: Option<PathBuf>,
        /// Directions of the sampling oracle.
        #[arg(long, default_value_t = 100_000)]
        oracle_dirs: usize,
        #[command(flatten)]
        friction: FrictionArgs,
    },
    /// Write a primitive test mesh as OFF.
    GenMesh {
        #[arg(long, value_enum)]
        shape: Shape,
        /// Radius (sphere, cylinder) or edge length (box), meters.
        #[arg(long, default_value_t = 0.04)]
        size: f64,
        /// Cylinder height, meters.
        #[arg(long, default_value_t = 0.1)]
        height: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run synthesis, placement, rendering and labeling into one directory.
    Pipeline {
        #[arg(long)]
        objects: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        scenes: usize,
        #[arg(long, default_value_t = 3)]
        objects_per_scene: usize,
        #[arg(long, default_value_t = 1)]
        views: usize,
        /// Annotations per object.
        #[arg(long, default_value_t = 15_000)]
        target: usize,
        #[arg(long, default_value_t = 0.05)]
        tau: f64,
        #[arg(long, default_value_t = pipeline::CLOUD_POINTS)]
        cloud_points: usize,
        #[command(flatten)]
        hand: HandArg,
    },
}

fn load_object_mesh(path: &Path, scale: f64) -> Result<contact_grasp::geom::TriangleMesh> {
    load_mesh(path, scale).with_context(|| format!("loading mesh {}", path.display()))
}

fn friction_model(f: &FrictionArgs) -> Result<FrictionModel> {
    Ok(FrictionModel::new(f.mu, f.cone_edges, 1.0)?)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::SampleGrasps { mesh, hand, out, id, scale, tau, target, seed, voxel, friction } => {
            let hand = hand.load()?;
            let m = load_object_mesh(&mesh, scale)?;
            let id = match id {
                Some(id) => id,
                None => mesh.file_stem().and_then(|s| s.to_str()).context("mesh path has no file stem")?.to_string(),
            };
            let config = SynthesisConfig { friction: friction_model(&friction)?, tau, target_count: target, voxel, seed, ..Default::default() };
            let report = synthesize_object(&m, &hand, &config, &id)?;
            write_annotations(&out, &report.annotations)?;
            if report.annotations.is_empty() {
                eprintln!("warning: no grasp reached ε ≥ {tau}");
            }
            println!("{}/{}", report.annotations.len(), report.evaluated);
        }
        Command::BuildScene { objects, count, seed, out, clearance } => {
            if count == 0 {
                bail!("--count must be at least 1");
            }
            let models = read_objects(&objects)?.iter().map(|e| e.load()).collect::<contact_grasp::Result<Vec<_>>>()?;
            let config = PlacementConfig { clearance, ..Default::default() };
            let scene = place_objects(&models, count, seed, &config);
            if scene.objects.len() < count {
                eprintln!("warning: placed {} of {count} objects", scene.objects.len());
            }
            write_scene(&out, &scene)?;
            println!("placed {} objects", scene.objects.len());
        }
        Command::Render { scene, camera, annotations, out, hand, tau, cloud_points, seed } => {
            let hand_model = hand.load()?;
            let cam = camera_spec::parse_camera(&camera)?;
            let sc = formats::read_scene(&scene)?;
            let mut grasps = BTreeMap::new();
            for o in &sc.objects {
                let path = annotations.join(format!("{}.grasps", o.model.id));
                if !grasps.contains_key(&o.model.id) && path.exists() {
                    grasps.insert(o.model.id.clone(), read_annotations(&path)?);
                }
            }
            let config = CaptureConfig { cloud_points, ..Default::default() };
            let capture = pipeline::capture_scene(&sc, &cam, &grasps, &hand_model, &config, seed)?;
            let manifest = pipeline::write_capture(&out, &capture, &scene, hand.hand.as_deref(), tau, &config)?;
            let graspable = capture.labels.iter().filter(|l| l.graspable).count();
            println!(
                "{} valid pixels, {} points ({graspable} graspable), {} grasps -> {}",
                capture.depth.valid_count(),
                capture.cloud.len(),
                capture.annotations.len(),
                manifest.display()
            );
        }
        Command::Validate { capture, annotations, mesh, scale, tau, hand } => {
            let violations = if let Some(c) = capture {
                let manifest = if c.extension().is_some_and(|e| e == "capture") { c } else { capture_manifest_path(&c) };
                pipeline::validate_capture(&manifest)?
            } else if let (Some(a), Some(m)) = (annotations, mesh) {
                let hand = hand.load()?;
                let mesh = load_object_mesh(&m, scale)?;
                let anns = read_annotations(&a)?;
                let mut out = Vec::new();
                for (i, ann) in anns.iter().enumerate() {
                    out.extend(check_annotation(ann, &mesh, &hand, tau).into_iter().map(|v| format!("annotations[{i}]: {v}")));
                }
                println!("checked {} annotations", anns.len());
                out
            } else {
                bail!("pass --capture, or --annotations with --mesh");
            };
            if violations.is_empty() {
                println!("ok");
            } else {
                for v in &violations {
                    println!("{v}");
                }
                eprintln!("{} violations", violations.len());
                return Ok(ExitCode::from(1));
            }
        }
        Command::EvalQuality { annotations, mesh, scale, wrenches, oracle_dirs, friction } => {
            let sets: Vec<Vec<Wrench<f64>>> = if let Some(w) = wrenches {
                vec![read_wrenches(&w)?]
            } else {
                let anns = read_annotations(annotations.as_deref().expect("clap requires one source"))?;
                let normalization = mesh.map(|m| load_object_mesh(&m, scale).map(|m| torque_normalization(&m))).transpose()?;
                let base = friction_model(&friction)?;
                anns.iter()
                    .map(|a| {
                        let (origin, lambda) = normalization.unwrap_or_else(|| {
                            (a.contacts.iter().map(|c| c.position).sum::<Vector3<f64>>() / a.contacts.len() as f64, 1.0)
                        });
                        grasp_wrenches(&a.contacts, &FrictionModel { torque_scale: lambda, ..base }, &origin)
                    })
                    .collect()
            };
            let rows: Vec<(f64, f64, bool)> = {
                use rayon::prelude::*;
                sets.par_iter()
                    .map(|w| {
                        let q = epsilon_quality_detailed(w);
                        (q.epsilon, epsilon_sampling_oracle(w, oracle_dirs), q.method == QualityMethod::Sampled)
                    })
                    .collect()
            };
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "# index exact oracle gap method")?;
            for (i, (e, o, s)) in rows.iter().enumerate() {
                writeln!(stdout, "{i} {e:.9} {o:.9} {:.3e} {}", o - e, if *s { "sampled" } else { "exact" })?;
            }
            let n = rows.len();
            let below = rows.iter().filter(|(e, o, _)| o < e).count();
            if n == 0 {
                writeln!(stdout, "summary count 0")?;
            } else {
                let exact: Vec<f64> = rows.iter().map(|r| r.0).collect();
                let mean = exact.iter().sum::<f64>() / n as f64;
                let min = exact.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = exact.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let gap = rows.iter().map(|(e, o, _)| o - e).fold(0.0, f64::max);
                writeln!(stdout, "summary count {n} mean {mean:.9} min {min:.9} max {max:.9} max_gap {gap:.3e} oracle_below_exact {below}")?;
            }
        }
        Command::GenMesh { shape, size, height, out } => {
            let mesh = match shape {
                Shape::Sphere => primitives::icosphere(size, 3),
                Shape::Box => primitives::cuboid(Vector3::new(size, size, size)),
                Shape::Cylinder => primitives::cylinder(size, height, 32),
            };
            save_off(&mesh, &out)?;
            println!("{} vertices, {} triangles", mesh.vertices().len(), mesh.triangles().len());
        }
        Command::Pipeline { objects, out, seed, scenes, objects_per_scene, views, target, tau, cloud_points, hand } => {
            let hand = hand.load()?;
            let entries = read_objects(&objects)?;
            let mut config = PipelineConfig { seed, scenes, objects_per_scene, views_per_scene: views, ..Default::default() };
            config.synthesis.target_count = target;
            config.synthesis.tau = tau;
            config.capture.cloud_points = cloud_points;
            let m = pipeline::run_pipeline(&entries, &hand, &config, &out)?;
            println!("{} annotation files, {} scenes, {} captures", m.annotations.len(), m.scenes.len(), m.captures.len());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn read_wrenches(path: &Path) -> Result<Vec<Wrench<f64>>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .with_context(|| format!("{}:{}: bad number", path.display(), i + 1))?;
        if v.len() != 6 {
            bail!("{}:{}: expected 6 values, found {}", path.display(), i + 1, v.len());
        }
        out.push(Wrench::from_vector(&Vector6::from_column_slice(&v)));
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
