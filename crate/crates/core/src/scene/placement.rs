use nalgebra::{Matrix3, Rotation3, Vector3};
use rand::seq::SliceRandom;
use rand::Rng;

use super::{ObjectModel, Scene, SceneObject};
use crate::geom::hull::convex_hull;
use crate::geom::{RigidTransform3, TriangleMesh};
use crate::seed;

type V3 = Vector3<f64>;

#[derive(Clone, Debug, PartialEq)]
pub struct PlacementConfig {
    /// Objects are centered within `[-h, h]²` on the table.
    pub table_half_extent: f64,
    /// Minimum surface distance between placed objects, meters.
    pub clearance: f64,
    /// Position draws per object before it is skipped.
    pub attempts: usize,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        Self { table_half_extent: 0.15, clearance: 0.005, attempts: 100 }
    }
}

/// Containment test that accepts either vertex winding.
fn point_in_triangle(p: &V3, a: &V3, b: &V3, c: &V3, n: &V3, tol: f64) -> bool {
    let s = [(a, b), (b, c), (c, a)].map(|(u, v)| (*v - *u).cross(&(p - *u)).dot(n));
    s.iter().all(|&x| x >= -tol) || s.iter().all(|&x| x <= tol)
}

/// Rotations that rest the mesh on a stable face of its convex hull.
///
/// Coplanar hull facets form one support polygon; a face is stable when the
/// projection of the volume centroid along the face normal falls inside it.
/// Each rotation maps the face's outward normal to `−z`. Order follows the
/// first facet of each plane.
pub fn stable_rotations(mesh: &TriangleMesh) -> Vec<Matrix3<f64>> {
    let Ok(hull) = convex_hull::<f64, 3>(mesh.vertices()) else {
        return vec![Matrix3::identity()];
    };
    let (_, centroid) = mesh.volume_and_centroid();
    let scale = mesh.bounds().extent().norm().max(1e-12);
    let tol = 1e-9 * scale;
    let mut planes: Vec<(V3, f64, Vec<usize>)> = Vec::new();
    for (fi, f) in hull.facets.iter().enumerate() {
        match planes.iter_mut().find(|(n, o, _)| n.dot(&f.normal) > 1.0 - 1e-9 && (o - f.offset).abs() <= tol) {
            Some(p) => p.2.push(fi),
            None => planes.push((f.normal, f.offset, vec![fi])),
        }
    }
    let v = mesh.vertices();
    let mut out = Vec::new();
    for (n, offset, facets) in &planes {
        let p = centroid - n * (n.dot(&centroid) - offset);
        let inside = facets.iter().any(|&fi| {
            let [a, b, c] = hull.facets[fi].vertices;
            point_in_triangle(&p, &v[a], &v[b], &v[c], n, tol * scale)
        });
        if inside {
            let down = -V3::z();
            let r = Rotation3::rotation_between(n, &down)
                .unwrap_or_else(|| Rotation3::from_axis_angle(&V3::x_axis(), std::f64::consts::PI));
            out.push(*r.matrix());
        }
    }
    if out.is_empty() {
        out.push(Matrix3::identity());
    }
    out
}

fn rest_pose(mesh: &TriangleMesh, rot: &Matrix3<f64>, centroid: &V3, xy: (f64, f64)) -> RigidTransform3<f64> {
    let z = mesh.vertices().iter().map(|v| (rot * v).z).fold(f64::INFINITY, f64::min);
    let c = rot * centroid;
    RigidTransform3::from_parts_unchecked(*rot, V3::new(xy.0 - c.x, xy.1 - c.y, -z))
}

fn clear_of(candidate: &TriangleMesh, placed: &[TriangleMesh], clearance: f64) -> bool {
    let b = candidate.bounds();
    placed.iter().all(|m| {
        if m.bounds().box_distance_sq(&b).sqrt() >= clearance {
            return true;
        }
        candidate.distance_to_mesh_capped(m, 0.0, clearance) >= clearance
            && !m.contains(&candidate.vertices()[0])
            && !candidate.contains(&m.vertices()[0])
    })
}

/// Places `count` objects drawn from `models` on the table.
///
/// Models are drawn as successive seeded permutations of the registry. Each
/// object gets up to `attempts` draws of stable face, yaw and position; the
/// first draw clearing every placed object by `clearance` is kept, otherwise
/// the object is skipped.
pub fn place_objects(models: &[ObjectModel], count: usize, seed: u64, config: &PlacementConfig) -> Scene {
    let mut scene = Scene::default();
    if models.is_empty() {
        return scene;
    }
    let mut choice_rng = seed::rng(seed, seed::stream::OBJECT_CHOICE, 0);
    let mut order: Vec<usize> = Vec::with_capacity(count);
    while order.len() < count {
        let mut perm: Vec<usize> = (0..models.len()).collect();
        perm.shuffle(&mut choice_rng);
        order.extend(perm.into_iter().take(count - order.len()));
    }
    let mut placed: Vec<TriangleMesh> = Vec::new();
    let h = config.table_half_extent;
    for (k, &mi) in order.iter().enumerate() {
        let model = &models[mi];
        if model.mesh.is_empty() {
            continue;
        }
        let rotations = stable_rotations(&model.mesh);
        let (_, centroid) = model.mesh.volume_and_centroid();
        let mut rng = seed::rng(seed, seed::stream::PLACEMENT, k as u64);
        for _ in 0..config.attempts {
            let face = rotations[rng.random_range(0..rotations.len())];
            let yaw: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let x = rng.random_range(-h..=h);
            let y = rng.random_range(-h..=h);
            let rot = Rotation3::from_axis_angle(&V3::z_axis(), yaw).matrix() * face;
            let pose = rest_pose(&model.mesh, &rot, &centroid, (x, y));
            let world = model.mesh.transformed(&pose);
            if clear_of(&world, &placed, config.clearance) {
                placed.push(world);
                scene.objects.push(SceneObject { model: model.clone(), pose });
                break;
            }
        }
    }
    scene
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::primitives;

    #[test]
    fn cube_rests_on_six_faces() {
        let r = stable_rotations(&primitives::cuboid(V3::new(0.1, 0.1, 0.1)));
        assert_eq!(r.len(), 6);
    }

    #[test]
    fn overhanging_prism_cannot_rest_on_its_short_base() {
        // Triangle (0,0), (0.02,0), (0.2,0.05) in xz, extruded along y.
        let mut v = Vec::new();
        for y in [0.0, 0.05] {
            v.extend([V3::new(0.0, y, 0.0), V3::new(0.02, y, 0.0), V3::new(0.2, y, 0.05)]);
        }
        let t = vec![[0, 1, 2], [3, 5, 4], [0, 3, 4], [0, 4, 1], [1, 4, 5], [1, 5, 2], [2, 5, 3], [2, 3, 0]];
        let mesh = TriangleMesh::new(v, t).unwrap();
        let rots = stable_rotations(&mesh);
        assert_eq!(rots.len(), 4);
        // The base faces −z already; no rotation may keep it down.
        assert!(rots.iter().all(|r| (r * V3::new(0.0, 0.0, -1.0)).z > -1.0 + 1e-6));
    }

    #[test]
    fn single_object_rests_on_table() {
        let m = ObjectModel::new("box", "box.off", 1.0, primitives::cuboid(V3::new(0.05, 0.03, 0.08)));
        let scene = place_objects(&[m], 1, 11, &PlacementConfig::default());
        assert_eq!(scene.objects.len(), 1);
        let z = scene.objects[0].world_mesh().vertices().iter().map(|v| v.z).fold(f64::INFINITY, f64::min);
        assert!(z.abs() <= 1e-4);
        assert!(scene.check().is_empty());
    }
}
