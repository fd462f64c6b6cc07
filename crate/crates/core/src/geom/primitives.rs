//! Procedural meshes: boxes, icospheres, cylinders and planar quads.
//!
//! Flat faces get their own vertices so interpolated normals stay exact on them.

use std::collections::HashMap;

use nalgebra::Vector3;

use super::TriangleMesh;

type V3 = Vector3<f64>;

/// Axis-aligned box centered at the origin with the given edge lengths.
pub fn cuboid(size: V3) -> TriangleMesh {
    let h = size * 0.5;
    let mut vertices = Vec::with_capacity(24);
    let mut normals = Vec::with_capacity(24);
    let mut triangles = Vec::with_capacity(12);
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let mut n = V3::zeros();
            n[axis] = sign;
            let u_axis = (axis + 1) % 3;
            let v_axis = (axis + 2) % 3;
            let base = vertices.len() as u32;
            for (su, sv) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
                let mut p = V3::zeros();
                p[axis] = sign * h[axis];
                p[u_axis] = su * h[u_axis];
                p[v_axis] = sv * h[v_axis];
                vertices.push(p);
                normals.push(n);
            }
            // (u, v, axis) is right-handed, so counter-clockwise in (u, v) faces +axis.
            if sign > 0.0 {
                triangles.push([base, base + 1, base + 2]);
                triangles.push([base, base + 2, base + 3]);
            } else {
                triangles.push([base, base + 2, base + 1]);
                triangles.push([base, base + 3, base + 2]);
            }
        }
    }
    TriangleMesh::with_normals(vertices, triangles, normals).expect("valid cuboid")
}

/// Subdivided icosahedron projected onto a sphere of `radius` at the origin.
pub fn icosphere(radius: f64, subdivisions: u32) -> TriangleMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<V3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|v| V3::from(*v).normalize())
    .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut mid: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: u32, b: u32, verts: &mut Vec<V3>| -> u32 {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push(((verts[a as usize] + verts[b as usize]) * 0.5).normalize());
                (verts.len() - 1) as u32
            })
        };
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let normals = verts.clone();
    let vertices = verts.iter().map(|v| v * radius).collect();
    TriangleMesh::with_normals(vertices, faces, normals).expect("valid icosphere")
}

/// Closed cylinder centered at the origin with its axis along z.
pub fn cylinder(radius: f64, height: f64, segments: u32) -> TriangleMesh {
    let segments = segments.max(3);
    let hz = height * 0.5;
    let mut vertices = Vec::new();
    let mut normals = Vec::new();
    let mut triangles = Vec::new();
    let ring = |k: u32| {
        let a = std::f64::consts::TAU * k as f64 / segments as f64;
        (a.cos(), a.sin())
    };
    // Side: smooth radial normals.
    for k in 0..segments {
        let (c, s) = ring(k);
        vertices.push(V3::new(radius * c, radius * s, -hz));
        vertices.push(V3::new(radius * c, radius * s, hz));
        normals.push(V3::new(c, s, 0.0));
        normals.push(V3::new(c, s, 0.0));
    }
    for k in 0..segments {
        let a0 = 2 * k;
        let a1 = 2 * k + 1;
        let b0 = 2 * ((k + 1) % segments);
        let b1 = b0 + 1;
        triangles.push([a0, b0, b1]);
        triangles.push([a0, b1, a1]);
    }
    // Caps: flat normals, fan around a center vertex.
    for (z, nz) in [(hz, 1.0), (-hz, -1.0)] {
        let center = vertices.len() as u32;
        vertices.push(V3::new(0.0, 0.0, z));
        normals.push(V3::new(0.0, 0.0, nz));
        for k in 0..segments {
            let (c, s) = ring(k);
            vertices.push(V3::new(radius * c, radius * s, z));
            normals.push(V3::new(0.0, 0.0, nz));
        }
        for k in 0..segments {
            let a = center + 1 + k;
            let b = center + 1 + (k + 1) % segments;
            if nz > 0.0 {
                triangles.push([center, a, b]);
            } else {
                triangles.push([center, b, a]);
            }
        }
    }
    TriangleMesh::with_normals(vertices, triangles, normals).expect("valid cylinder")
}

/// Square of side `size` in the z = 0 plane facing +z.
pub fn quad(size: f64) -> TriangleMesh {
    let h = size * 0.5;
    let vertices = vec![V3::new(-h, -h, 0.0), V3::new(h, -h, 0.0), V3::new(h, h, 0.0), V3::new(-h, h, 0.0)];
    TriangleMesh::new(vertices, vec![[0, 1, 2], [0, 2, 3]]).expect("valid quad")
}
