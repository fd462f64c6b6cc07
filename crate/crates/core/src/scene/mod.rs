//! Multi-object tabletop scenes: placement, grasp filtering, depth capture
//! and camera-frame transfer.

mod camera;
mod cloud;
mod filter;
mod placement;
mod render;

use std::path::PathBuf;
use std::sync::Arc;

use crate::geom::{RigidTransform3, TriangleMesh};

pub use camera::VirtualCamera;
pub use cloud::{depth_to_cloud, downsample, estimate_normals, NORMAL_NEIGHBORS};
pub use filter::{filter_grasps, from_camera_frame, hand_collides, to_camera_frame, FilterConfig};
pub use placement::{place_objects, stable_rotations, PlacementConfig};
pub use render::{render_depth, render_mesh_depth, DepthMap};

/// A mesh available for placement, in its own frame.
#[derive(Clone, Debug)]
pub struct ObjectModel {
    pub id: String,
    pub path: PathBuf,
    /// Scale applied when the mesh was loaded.
    pub scale: f64,
    pub mesh: Arc<TriangleMesh>,
}

impl ObjectModel {
    pub fn new(id: impl Into<String>, path: impl Into<PathBuf>, scale: f64, mesh: TriangleMesh) -> Self {
        Self { id: id.into(), path: path.into(), scale, mesh: Arc::new(mesh) }
    }
}

#[derive(Clone, Debug)]
pub struct SceneObject {
    pub model: ObjectModel,
    /// Object frame in the world.
    pub pose: RigidTransform3<f64>,
}

impl SceneObject {
    pub fn world_mesh(&self) -> TriangleMesh {
        self.model.mesh.transformed(&self.pose)
    }
}

/// Objects resting on the table plane `z = 0`.
#[derive(Clone, Debug, Default)]
pub struct Scene {
    pub objects: Vec<SceneObject>,
}

impl Scene {
    pub fn world_meshes(&self) -> Vec<TriangleMesh> {
        self.objects.iter().map(SceneObject::world_mesh).collect()
    }

    /// Scene invariant violations: table penetration beyond 1e-4 m and
    /// pairwise penetration beyond 1 mm.
    pub fn check(&self) -> Vec<String> {
        let meshes = self.world_meshes();
        let mut out = Vec::new();
        for (i, m) in meshes.iter().enumerate() {
            let z = m.vertices().iter().map(|v| v.z).fold(f64::INFINITY, f64::min);
            if z < -1e-4 {
                out.push(format!("object {i} penetrates the table by {:e} m", -z));
            }
        }
        for i in 0..meshes.len() {
            for j in i + 1..meshes.len() {
                let depth = meshes[j]
                    .vertices()
                    .iter()
                    .map(|v| meshes[i].signed_distance(v))
                    .chain(meshes[i].vertices().iter().map(|v| meshes[j].signed_distance(v)))
                    .fold(f64::INFINITY, f64::min);
                if depth < -1e-3 {
                    out.push(format!("objects {i} and {j} interpenetrate by {:e} m", -depth));
                }
            }
        }
        out
    }
}
