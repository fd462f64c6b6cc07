use std::collections::BTreeMap;

use nalgebra::Vector3;

use super::query::closest_point_on_triangle;
use super::{OrientedPoint3, TriangleMesh};

type V3 = Vector3<f64>;

/// Integer voxel coordinates, `floor((p - origin) / voxel)` per axis.
pub type VoxelKey = [i64; 3];

pub fn voxel_key(p: &V3, origin: &V3, voxel: f64) -> VoxelKey {
    let r = p - origin;
    [(r.x / voxel).floor() as i64, (r.y / voxel).floor() as i64, (r.z / voxel).floor() as i64]
}

/// One surface sample per occupied voxel.
///
/// The grid is anchored at the minimum corner of the mesh bounds. A voxel
/// `origin + [k·s, (k+1)·s)` (half-open per axis) is occupied when the surface
/// passes through it. Each triangle is clipped exactly against each voxel its
/// bounds touch; the sample is the surface point nearest the voxel center,
/// ties going to the lower triangle index. Output is sorted by voxel key.
pub fn voxel_downsample(mesh: &TriangleMesh, voxel: f64) -> Vec<OrientedPoint3<f64>> {
    assert!(voxel > 0.0 && voxel.is_finite(), "voxel size must be positive");
    if mesh.is_empty() {
        return Vec::new();
    }
    let origin = mesh.bounds().min;
    let mut best: BTreeMap<VoxelKey, (f64, usize, V3)> = BTreeMap::new();
    let mut poly = Vec::with_capacity(12);
    let mut scratch = Vec::with_capacity(12);
    for ti in 0..mesh.triangles().len() {
        if mesh.is_degenerate(ti) {
            continue;
        }
        let tri = mesh.triangle(ti);
        let normal = mesh.face_normal(ti);
        let lo = voxel_key(&tri[0].inf(&tri[1]).inf(&tri[2]), &origin, voxel);
        let hi = voxel_key(&tri[0].sup(&tri[1]).sup(&tri[2]), &origin, voxel);
        for i in lo[0]..=hi[0] {
            for j in lo[1]..=hi[1] {
                for k in lo[2]..=hi[2] {
                    let key = [i, j, k];
                    let bmin = origin + V3::new(i as f64, j as f64, k as f64) * voxel;
                    let bmax = origin + V3::new((i + 1) as f64, (j + 1) as f64, (k + 1) as f64) * voxel;
                    poly.clear();
                    poly.extend_from_slice(&tri);
                    if !clip_to_box(&mut poly, &mut scratch, &bmin, &bmax) {
                        continue;
                    }
                    // The half-open voxel misses the polygon only if it lies within an upper face.
                    if (0..3).any(|ax| poly.iter().all(|p| p[ax] >= bmax[ax])) {
                        continue;
                    }
                    let center = (bmin + bmax) * 0.5;
                    let q = closest_on_polygon(&poly, &normal, &center);
                    let d = (q - center).norm_squared();
                    match best.get(&key) {
                        Some(&(bd, _, _)) if bd <= d => {}
                        _ => {
                            best.insert(key, (d, ti, q));
                        }
                    }
                }
            }
        }
    }
    best.into_values()
        .map(|(_, ti, q)| {
            let [a, b, c] = mesh.triangle(ti);
            let (p, bary) = closest_point_on_triangle(&q, &a, &b, &c);
            OrientedPoint3 { position: p, normal: mesh.interpolated_normal(ti, &bary) }
        })
        .collect()
}

/// Sutherland–Hodgman clip of a convex polygon to a closed box. Returns false if empty.
fn clip_to_box(poly: &mut Vec<V3>, scratch: &mut Vec<V3>, bmin: &V3, bmax: &V3) -> bool {
    for ax in 0..3 {
        for (bound, keep_above) in [(bmin[ax], true), (bmax[ax], false)] {
            scratch.clear();
            let inside = |p: &V3| if keep_above { p[ax] >= bound } else { p[ax] <= bound };
            let n = poly.len();
            for idx in 0..n {
                let cur = poly[idx];
                let prev = poly[(idx + n - 1) % n];
                let (ci, pi) = (inside(&cur), inside(&prev));
                if ci != pi {
                    let t = (bound - prev[ax]) / (cur[ax] - prev[ax]);
                    let mut x = prev + (cur - prev) * t;
                    x[ax] = bound;
                    scratch.push(x);
                }
                if ci {
                    scratch.push(cur);
                }
            }
            std::mem::swap(poly, scratch);
            if poly.is_empty() {
                return false;
            }
        }
    }
    poly.dedup_by(|a, b| a == b);
    while poly.len() > 1 && poly.first() == poly.last() {
        poly.pop();
    }
    !poly.is_empty()
}

fn closest_on_polygon(poly: &[V3], normal: &V3, c: &V3) -> V3 {
    match poly.len() {
        1 => return poly[0],
        2 => return closest_on_segment(&poly[0], &poly[1], c),
        _ => {}
    }
    let proj = c - normal * (c - poly[0]).dot(normal);
    let n = poly.len();
    let inside = (0..n).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        (b - a).cross(&(proj - a)).dot(normal) >= 0.0
    });
    if inside {
        return proj;
    }
    (0..n)
        .map(|i| closest_on_segment(&poly[i], &poly[(i + 1) % n], c))
        .min_by(|a, b| (a - c).norm_squared().total_cmp(&(b - c).norm_squared()))
        .unwrap_or(poly[0])
}

fn closest_on_segment(a: &V3, b: &V3, c: &V3) -> V3 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return *a;
    }
    let t = ((c - a).dot(&ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::primitives;

    #[test]
    fn whole_cube_in_one_voxel() {
        let cube = primitives::cuboid(V3::new(1.0, 1.0, 1.0));
        assert_eq!(voxel_downsample(&cube, 2.0).len(), 1);
    }

    #[test]
    fn cube_faces_at_half_voxel() {
        let cube = primitives::cuboid(V3::new(1.0, 1.0, 1.0));
        let samples = voxel_downsample(&cube, 0.5);
        for s in &samples {
            assert!(s.position.iter().any(|x| (x.abs() - 0.5).abs() < 1e-12), "{:?}", s.position);
            assert!((s.normal.norm() - 1.0).abs() < 1e-12);
        }
        for axis in 0..3 {
            for sign in [-1.0, 1.0] {
                assert!(samples.iter().any(|s| (s.position[axis] - 0.5 * sign).abs() < 1e-12
                    && (s.normal[axis] - sign).abs() < 1e-12));
            }
        }
        let mut keys: Vec<_> = samples.iter().map(|s| voxel_key(&s.position, &cube.bounds().min, 0.5)).collect();
        let n = keys.len();
        keys.dedup();
        assert_eq!(keys.len(), n, "one sample per voxel");
    }

    #[test]
    fn empty_mesh_gives_nothing() {
        assert!(voxel_downsample(&TriangleMesh::empty(), 0.1).is_empty());
    }

    #[test]
    fn samples_lie_on_surface() {
        let s = primitives::icosphere(0.04, 2);
        for p in voxel_downsample(&s, 0.01) {
            assert!(s.min_distance(&p.position) <= 1e-9);
        }
    }
}
