use std::collections::HashMap;

use nalgebra::Vector3;

use super::bvh::{Aabb, Bvh};
use super::query::{closest_point_on_triangle, ray_triangle, segment_triangle_distance, triangle_triangle_distance};
use super::transform::RigidTransform3;
use super::DEGENERATE_AREA;
use crate::error::{Error, Result};

type V3 = Vector3<f64>;

/// Hits closer than this along a ray are ignored.
pub const RAY_T_MIN: f64 = 1e-9;

/// Indexed triangle mesh with per-vertex unit normals and a prebuilt BVH.
///
/// Immutable after construction.
#[derive(Clone, Debug)]
pub struct TriangleMesh {
    vertices: Vec<V3>,
    triangles: Vec<[u32; 3]>,
    normals: Vec<V3>,
    bvh: Bvh,
}

/// Nearest intersection of a ray with a mesh.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayHit {
    pub distance: f64,
    pub point: V3,
    /// Interpolated vertex normal, flipped to face the incoming ray.
    pub normal: V3,
    pub triangle: u32,
}

/// Closest surface point to a query point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosestPoint {
    pub point: V3,
    pub distance: f64,
    pub triangle: u32,
    pub barycentric: [f64; 3],
    /// Interpolated vertex normal at `point`.
    pub normal: V3,
}

/// Edge-manifold summary of a mesh (positions welded at 1e-9).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WatertightReport {
    pub boundary_edges: usize,
    pub non_manifold_edges: usize,
}

impl WatertightReport {
    pub fn is_watertight(&self) -> bool {
        self.boundary_edges == 0 && self.non_manifold_edges == 0
    }
}

impl TriangleMesh {
    /// Builds a mesh and computes area-weighted vertex normals from the winding.
    pub fn new(vertices: Vec<V3>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        validate(&vertices, &triangles)?;
        let normals = area_weighted_normals(&vertices, &triangles);
        Ok(Self::assemble(vertices, triangles, normals))
    }

    /// Builds a mesh with explicit vertex normals (renormalized; zero normals are recomputed).
    pub fn with_normals(vertices: Vec<V3>, triangles: Vec<[u32; 3]>, normals: Vec<V3>) -> Result<Self> {
        validate(&vertices, &triangles)?;
        if normals.len() != vertices.len() {
            return Err(Error::invalid(
                "mesh",
                format!("{} normals for {} vertices", normals.len(), vertices.len()),
            ));
        }
        let fallback = area_weighted_normals(&vertices, &triangles);
        let normals = normals
            .into_iter()
            .zip(fallback)
            .map(|(n, f)| {
                let len = n.norm();
                if len.is_finite() && len > 1e-12 {
                    n / len
                } else {
                    f
                }
            })
            .collect();
        Ok(Self::assemble(vertices, triangles, normals))
    }

    pub fn empty() -> Self {
        Self::assemble(Vec::new(), Vec::new(), Vec::new())
    }

    fn assemble(vertices: Vec<V3>, triangles: Vec<[u32; 3]>, normals: Vec<V3>) -> Self {
        let boxes: Vec<Aabb> = triangles
            .iter()
            .map(|t| Aabb::from_points(t.iter().map(|&i| &vertices[i as usize])))
            .collect();
        let bvh = Bvh::build(&boxes);
        Self { vertices, triangles, normals, bvh }
    }

    pub fn vertices(&self) -> &[V3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn normals(&self) -> &[V3] {
        &self.normals
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn bvh(&self) -> &Bvh {
        &self.bvh
    }

    pub fn bounds(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter())
    }

    #[inline]
    pub fn triangle(&self, i: usize) -> [V3; 3] {
        let t = self.triangles[i];
        [self.vertices[t[0] as usize], self.vertices[t[1] as usize], self.vertices[t[2] as usize]]
    }

    pub fn triangle_area(&self, i: usize) -> f64 {
        let [a, b, c] = self.triangle(i);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    #[inline]
    pub fn is_degenerate(&self, i: usize) -> bool {
        self.triangle_area(i) < DEGENERATE_AREA
    }

    /// Unit geometric normal from the winding (zero for degenerate triangles).
    pub fn face_normal(&self, i: usize) -> V3 {
        let [a, b, c] = self.triangle(i);
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        if len > 0.0 {
            n / len
        } else {
            V3::zeros()
        }
    }

    /// Interpolated, renormalized vertex normal.
    pub fn interpolated_normal(&self, tri: usize, bary: &[f64; 3]) -> V3 {
        let t = self.triangles[tri];
        let n = self.normals[t[0] as usize] * bary[0]
            + self.normals[t[1] as usize] * bary[1]
            + self.normals[t[2] as usize] * bary[2];
        let len = n.norm();
        if len > 1e-12 {
            n / len
        } else {
            self.face_normal(tri)
        }
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|i| self.triangle_area(i)).sum()
    }

    pub fn vertex_centroid(&self) -> V3 {
        if self.vertices.is_empty() {
            return V3::zeros();
        }
        self.vertices.iter().sum::<V3>() / self.vertices.len() as f64
    }

    /// Signed enclosed volume and its centroid (divergence theorem).
    pub fn volume_and_centroid(&self) -> (f64, V3) {
        let mut vol = 0.0;
        let mut c = V3::zeros();
        for i in 0..self.triangles.len() {
            let [a, b, d] = self.triangle(i);
            let v = a.dot(&b.cross(&d)) / 6.0;
            vol += v;
            c += (a + b + d) * (v / 4.0);
        }
        if vol.abs() > 1e-18 {
            (vol, c / vol)
        } else {
            (vol, self.vertex_centroid())
        }
    }

    pub fn transformed(&self, tf: &RigidTransform3<f64>) -> Self {
        let vertices = self.vertices.iter().map(|v| tf.apply_point(v)).collect();
        let normals = self.normals.iter().map(|n| tf.apply_vector(n)).collect();
        Self::assemble(vertices, self.triangles.clone(), normals)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let vertices = self.vertices.iter().map(|v| v * s).collect();
        let normals = if s >= 0.0 { self.normals.clone() } else { self.normals.iter().map(|n| -n).collect() };
        Self::assemble(vertices, self.triangles.clone(), normals)
    }

    /// Concatenates meshes into one.
    pub fn merge<'a>(meshes: impl IntoIterator<Item = &'a TriangleMesh>) -> Self {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let mut normals = Vec::new();
        for m in meshes {
            let off = vertices.len() as u32;
            vertices.extend_from_slice(&m.vertices);
            normals.extend_from_slice(&m.normals);
            triangles.extend(m.triangles.iter().map(|t| [t[0] + off, t[1] + off, t[2] + off]));
        }
        Self::assemble(vertices, triangles, normals)
    }

    /// Nearest hit with `t > 1e-9`. `direction` must be unit length.
    pub fn ray_cast(&self, origin: &V3, direction: &V3) -> Option<RayHit> {
        let (tri, t) = self.bvh.ray_nearest(origin, direction, |p, t_max| {
            if self.is_degenerate(p as usize) {
                return None;
            }
            let [a, b, c] = self.triangle(p as usize);
            ray_triangle(origin, direction, &a, &b, &c, RAY_T_MIN)
                .map(|(t, _, _)| t)
                .filter(|&t| t <= t_max)
        })?;
        let [a, b, c] = self.triangle(tri as usize);
        let (_, u, v) = ray_triangle(origin, direction, &a, &b, &c, f64::NEG_INFINITY)?;
        let point = origin + direction * t;
        let mut normal = self.interpolated_normal(tri as usize, &[1.0 - u - v, u, v]);
        if normal.dot(direction) > 0.0 {
            normal = -normal;
        }
        Some(RayHit { distance: t, point, normal, triangle: tri })
    }

    /// Closest surface point; `None` only for an empty mesh.
    pub fn closest_point(&self, p: &V3) -> Option<ClosestPoint> {
        let (tri, d2) = self.bvh.closest(p, |i| {
            if self.is_degenerate(i as usize) {
                return f64::INFINITY;
            }
            let [a, b, c] = self.triangle(i as usize);
            let (q, _) = closest_point_on_triangle(p, &a, &b, &c);
            (q - p).norm_squared()
        })?;
        if !d2.is_finite() {
            return None;
        }
        let [a, b, c] = self.triangle(tri as usize);
        let (point, bary) = closest_point_on_triangle(p, &a, &b, &c);
        let normal = self.interpolated_normal(tri as usize, &bary);
        Some(ClosestPoint { point, distance: d2.sqrt(), triangle: tri, barycentric: bary, normal })
    }

    /// Exact point-to-surface distance (infinite for an empty mesh).
    pub fn min_distance(&self, p: &V3) -> f64 {
        self.closest_point(p).map_or(f64::INFINITY, |c| c.distance)
    }

    /// Exact surface-to-surface distance, zero if any triangles intersect.
    /// Returns as soon as the distance is known to be `<= stop_below`.
    pub fn distance_to_mesh(&self, other: &TriangleMesh, stop_below: f64) -> f64 {
        self.distance_to_mesh_capped(other, stop_below, f64::INFINITY)
    }

    /// `min(distance, cap)`; cheaper than the full distance when the meshes are far apart.
    pub fn distance_to_mesh_capped(&self, other: &TriangleMesh, stop_below: f64, cap: f64) -> f64 {
        self.distance_to_mesh_approx(other, stop_below, cap, 0.0)
    }

    /// A value `d ≤ cap` with `d / (1 + slack) ≤ min(distance, cap) ≤ d`.
    pub fn distance_to_mesh_approx(&self, other: &TriangleMesh, stop_below: f64, cap: f64, slack: f64) -> f64 {
        self.bvh.pair_min(&other.bvh, stop_below, cap, slack, |a, b, bound| {
            if self.is_degenerate(a as usize) || other.is_degenerate(b as usize) {
                return f64::INFINITY;
            }
            let ta = self.triangle(a as usize);
            let tb = other.triangle(b as usize);
            let ba = Aabb::from_points(ta.iter());
            let bb = Aabb::from_points(tb.iter());
            if ba.box_distance_sq(&bb) >= bound * bound {
                return f64::INFINITY;
            }
            triangle_triangle_distance(&ta, &tb)
        })
    }

    /// `min(distance to the segment p0 p1, cap)`.
    pub fn segment_distance(&self, p0: &V3, p1: &V3, cap: f64) -> f64 {
        let sb = Aabb::from_points([p0, p1]);
        let seg = Bvh::build(&[sb]);
        self.bvh.pair_min(&seg, 0.0, cap, 0.0, |a, _, bound| {
            if self.is_degenerate(a as usize) {
                return f64::INFINITY;
            }
            let [x, y, z] = self.triangle(a as usize);
            if Aabb::from_points([&x, &y, &z]).box_distance_sq(&sb) >= bound * bound {
                return f64::INFINITY;
            }
            segment_triangle_distance(p0, p1, &x, &y, &z)
        })
    }

    /// Inside test by crossing parity, majority vote over three skewed rays.
    pub fn contains(&self, p: &V3) -> bool {
        const DIRS: [[f64; 3]; 3] = [
            [0.577_350_3, 0.577_350_2, 0.577_350_3],
            [-0.267_261_2, 0.534_522_5, -0.801_783_7],
            [0.872_871_6, -0.218_217_9, -0.436_435_8],
        ];
        if self.is_empty() || self.bvh.bounds().distance_sq(p) > 0.0 {
            return false;
        }
        let mut votes = 0;
        for d in DIRS {
            let dir = V3::from(d).normalize();
            let mut ts: Vec<f64> = Vec::new();
            self.bvh.ray_visit(p, &dir, |i| {
                if self.is_degenerate(i as usize) {
                    return;
                }
                let [a, b, c] = self.triangle(i as usize);
                if let Some((t, _, _)) = ray_triangle(p, &dir, &a, &b, &c, 0.0) {
                    ts.push(t);
                }
            });
            ts.sort_by(f64::total_cmp);
            ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
            if ts.len() % 2 == 1 {
                votes += 1;
            }
        }
        votes >= 2
    }

    /// Distance to the surface, negative inside.
    pub fn signed_distance(&self, p: &V3) -> f64 {
        let d = self.min_distance(p);
        if self.contains(p) {
            -d
        } else {
            d
        }
    }

    pub fn watertight_report(&self) -> WatertightReport {
        let key = |v: &V3| {
            let q = |x: f64| (x * 1e9).round() as i64;
            (q(v.x), q(v.y), q(v.z))
        };
        let mut weld: HashMap<(i64, i64, i64), u32> = HashMap::new();
        let ids: Vec<u32> = self
            .vertices
            .iter()
            .map(|v| {
                let n = weld.len() as u32;
                *weld.entry(key(v)).or_insert(n)
            })
            .collect();
        let mut edges: HashMap<(u32, u32), usize> = HashMap::new();
        for (i, t) in self.triangles.iter().enumerate() {
            if self.is_degenerate(i) {
                continue;
            }
            for k in 0..3 {
                let a = ids[t[k] as usize];
                let b = ids[t[(k + 1) % 3] as usize];
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        WatertightReport {
            boundary_edges: edges.values().filter(|&&c| c == 1).count(),
            non_manifold_edges: edges.values().filter(|&&c| c > 2).count(),
        }
    }

    /// Same geometry with the vertex array permuted by `perm` (new index of old vertex `i` is `perm[i]`).
    pub fn with_permuted_vertices(&self, perm: &[usize]) -> Result<Self> {
        let n = self.vertices.len();
        if perm.len() != n {
            return Err(Error::invalid("vertex permutation", "length mismatch"));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::invalid("vertex permutation", "not a permutation"));
            }
        }
        let mut vertices = vec![V3::zeros(); n];
        let mut normals = vec![V3::zeros(); n];
        for i in 0..n {
            vertices[perm[i]] = self.vertices[i];
            normals[perm[i]] = self.normals[i];
        }
        let triangles = self
            .triangles
            .iter()
            .map(|t| [perm[t[0] as usize] as u32, perm[t[1] as usize] as u32, perm[t[2] as usize] as u32])
            .collect();
        Ok(Self::assemble(vertices, triangles, normals))
    }
}

fn validate(vertices: &[V3], triangles: &[[u32; 3]]) -> Result<()> {
    if let Some(i) = vertices.iter().position(|v| !v.iter().all(|x| x.is_finite())) {
        return Err(Error::invalid("mesh", format!("vertex {i} is not finite")));
    }
    let n = vertices.len() as u32;
    if let Some(i) = triangles.iter().position(|t| t.iter().any(|&k| k >= n)) {
        return Err(Error::invalid("mesh", format!("triangle {i} references a missing vertex")));
    }
    Ok(())
}

fn area_weighted_normals(vertices: &[V3], triangles: &[[u32; 3]]) -> Vec<V3> {
    let mut acc = vec![V3::zeros(); vertices.len()];
    for t in triangles {
        let [a, b, c] = t.map(|i| vertices[i as usize]);
        // Cross product length is twice the area, which is the weight we want.
        let n = (b - a).cross(&(c - a));
        for &i in t {
            acc[i as usize] += n;
        }
    }
    acc.into_iter()
        .map(|n| {
            let len = n.norm();
            if len > 0.0 {
                n / len
            } else {
                V3::z()
            }
        })
        .collect()
}
