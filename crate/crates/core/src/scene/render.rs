use rayon::prelude::*;

use super::{Scene, VirtualCamera};
use crate::geom::TriangleMesh;

/// Row-major depth image in meters; 0 where the pixel ray hits nothing.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthMap {
    pub width: u32,
    pub height: u32,
    pub data: Vec<f64>,
}

impl DepthMap {
    pub fn zeros(width: u32, height: u32) -> Self {
        Self { width, height, data: vec![0.0; width as usize * height as usize] }
    }

    pub fn get(&self, u: u32, v: u32) -> f64 {
        self.data[v as usize * self.width as usize + u as usize]
    }

    /// Number of pixels with a positive finite depth.
    pub fn valid_count(&self) -> usize {
        self.data.iter().filter(|d| d.is_finite() && **d > 0.0).count()
    }
}

/// Ray-casts a world-frame mesh through every pixel center.
pub fn render_mesh_depth(mesh: &TriangleMesh, cam: &VirtualCamera) -> DepthMap {
    let (w, h) = (cam.width as usize, cam.height as usize);
    if mesh.is_empty() {
        return DepthMap::zeros(cam.width, cam.height);
    }
    let origin = *cam.pose.translation();
    let forward = cam.pose.axis(2);
    let mut data = vec![0.0; w * h];
    data.par_chunks_mut(w).enumerate().for_each(|(v, row)| {
        for (u, px) in row.iter_mut().enumerate() {
            let dir = cam.pose.apply_vector(&cam.pixel_ray(u as f64, v as f64)).normalize();
            if let Some(hit) = mesh.ray_cast(&origin, &dir) {
                *px = (hit.point - origin).dot(&forward);
            }
        }
    });
    DepthMap { width: cam.width, height: cam.height, data }
}

/// Depth image of every scene object (the table plane is not rendered).
pub fn render_depth(scene: &Scene, cam: &VirtualCamera) -> DepthMap {
    let merged = TriangleMesh::merge(scene.world_meshes().iter());
    render_mesh_depth(&merged, cam)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{primitives, RigidTransform3};
    use nalgebra::Vector3;

    #[test]
    fn empty_scene_is_all_zero() {
        let cam = VirtualCamera::random(1, 0);
        let d = render_depth(&Scene::default(), &cam);
        assert_eq!(d.data.len(), 640 * 480);
        assert!(d.data.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn facing_plane_has_constant_depth() {
        let cam = VirtualCamera::with_default_intrinsics(RigidTransform3::identity());
        let quad = primitives::quad(2.0).transformed(&RigidTransform3::from_translation(Vector3::new(0.0, 0.0, 0.9)));
        let d = render_mesh_depth(&quad, &cam);
        for v in 200..280 {
            for u in 280..360 {
                assert!((d.get(u, v) - 0.9).abs() <= 1e-9);
            }
        }
    }
}
