//! Independent brute-force geometry used as test oracles.
//!
//! Nothing here calls the library's query or BVH code.

#![allow(dead_code)]

use contact_grasp::geom::TriangleMesh;
use contact_grasp::hand::{hand_geometry_at, HandModel, HandPose, JointConfig};
use nalgebra::Vector3;

pub type V3 = Vector3<f64>;

/// Closest point on triangle `abc` to `p` by Voronoi-region case analysis.
pub fn closest_on_triangle(p: &V3, a: &V3, b: &V3, c: &V3) -> V3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Distance between segments from the clamped closed-form parameters.
pub fn segment_distance(p0: &V3, p1: &V3, q0: &V3, q1: &V3) -> f64 {
    let d1 = p1 - p0;
    let d2 = q1 - q0;
    let r = p0 - q0;
    let (a, e, f) = (d1.dot(&d1), d2.dot(&d2), d2.dot(&r));
    let (s, t);
    if a <= 1e-30 && e <= 1e-30 {
        return r.norm();
    }
    if a <= 1e-30 {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= 1e-30 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let s0 = if denom > 1e-30 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            } else {
                t = t0;
                s = s0;
            }
        }
    }
    ((p0 + d1 * s) - (q0 + d2 * t)).norm()
}

/// Whether segment `p0p1` crosses triangle `abc` (closed).
pub fn segment_crosses(p0: &V3, p1: &V3, a: &V3, b: &V3, c: &V3) -> bool {
    let n = (b - a).cross(&(c - a));
    let s0 = n.dot(&(p0 - a));
    let s1 = n.dot(&(p1 - a));
    if s0 * s1 > 0.0 || (s0 == 0.0 && s1 == 0.0) {
        return false;
    }
    let x = p0 + (p1 - p0) * (s0 / (s0 - s1));
    let e = [(a, b), (b, c), (c, a)].map(|(u, v)| (v - u).cross(&(x - u)).dot(&n));
    e.iter().all(|&v| v >= 0.0) || e.iter().all(|&v| v <= 0.0)
}

/// Exact distance between two triangles.
pub fn triangle_distance(t: &[V3; 3], u: &[V3; 3]) -> f64 {
    for i in 0..3 {
        if segment_crosses(&t[i], &t[(i + 1) % 3], &u[0], &u[1], &u[2])
            || segment_crosses(&u[i], &u[(i + 1) % 3], &t[0], &t[1], &t[2])
        {
            return 0.0;
        }
    }
    let mut best = f64::INFINITY;
    for p in t {
        best = best.min((closest_on_triangle(p, &u[0], &u[1], &u[2]) - p).norm());
    }
    for p in u {
        best = best.min((closest_on_triangle(p, &t[0], &t[1], &t[2]) - p).norm());
    }
    for i in 0..3 {
        for j in 0..3 {
            best = best.min(segment_distance(&t[i], &t[(i + 1) % 3], &u[j], &u[(j + 1) % 3]));
        }
    }
    best
}

fn tri(m: &TriangleMesh, i: usize) -> [V3; 3] {
    let t = m.triangles()[i];
    let v = m.vertices();
    [v[t[0] as usize], v[t[1] as usize], v[t[2] as usize]]
}

fn gap_to_box(t: &[V3; 3], lo: &V3, hi: &V3) -> f64 {
    let tlo = t[0].inf(&t[1]).inf(&t[2]);
    let thi = t[0].sup(&t[1]).sup(&t[2]);
    let d = (lo - thi).sup(&(tlo - hi)).sup(&V3::zeros());
    d.norm()
}

/// All-pairs mesh distance, stopping once below `stop`. Triangle pairs whose
/// bounding boxes are already `stop` apart are skipped.
pub fn mesh_distance_below(a: &TriangleMesh, b: &TriangleMesh, stop: f64) -> bool {
    let tb: Vec<([V3; 3], V3, V3)> = (0..b.triangles().len())
        .map(|j| {
            let t = tri(b, j);
            (t, t[0].inf(&t[1]).inf(&t[2]), t[0].sup(&t[1]).sup(&t[2]))
        })
        .collect();
    for i in 0..a.triangles().len() {
        let ta = tri(a, i);
        for (t, lo, hi) in &tb {
            if gap_to_box(&ta, lo, hi) >= stop {
                continue;
            }
            if triangle_distance(&ta, t) < stop {
                return true;
            }
        }
    }
    false
}

/// Ray-parity inside test over every triangle, along a fixed skew direction.
pub fn inside(m: &TriangleMesh, p: &V3) -> bool {
    let dir = V3::new(0.5773, 0.5914, 0.5633).normalize();
    let far = p + dir * 1e3;
    (0..m.triangles().len())
        .filter(|&i| {
            let t = tri(m, i);
            segment_crosses(p, &far, &t[0], &t[1], &t[2])
        })
        .count()
        % 2
        == 1
}

/// Dense collision oracle mirroring the filter's rule: a hand vertex below
/// `clearance` over the table, any triangle pair closer than `clearance`, or
/// one body inside the other.
pub fn hand_collides_brute(hand: &HandModel, pose: &HandPose<f64>, joints: &JointConfig<f64>, obstacles: &[TriangleMesh], clearance: f64) -> bool {
    for part in hand_geometry_at(hand, pose, joints) {
        if part.is_empty() {
            continue;
        }
        if part.vertices().iter().any(|v| v.z < clearance) {
            return true;
        }
        for obs in obstacles {
            if mesh_distance_below(&part, obs, clearance) || inside(obs, &part.vertices()[0]) || inside(&part, &obs.vertices()[0]) {
                return true;
            }
        }
    }
    false
}

/// Brute-force point-to-mesh distance.
pub fn point_mesh_distance(m: &TriangleMesh, p: &V3) -> f64 {
    (0..m.triangles().len())
        .map(|i| {
            let t = tri(m, i);
            (closest_on_triangle(p, &t[0], &t[1], &t[2]) - p).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// ε by brute-force facet enumeration: every 6-subset of wrench points spans a
/// candidate hyperplane; those with all points on one side are hull facets and
/// ε is the smallest origin offset among them, or 0 when the origin is not
/// strictly inside.
pub fn epsilon_by_facet_enumeration(w: &[nalgebra::Vector6<f64>]) -> f64 {
    use nalgebra::{Matrix5, Vector6};
    let n = w.len();
    let scale = w.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if n < 7 || scale == 0.0 {
        return 0.0;
    }
    let tol = 1e-10 * scale;
    let mut best = f64::INFINITY;
    let mut idx = [0usize, 1, 2, 3, 4, 5];
    loop {
        let rows: Vec<Vector6<f64>> = (1..6).map(|j| w[idx[j]] - w[idx[0]]).collect();
        let mut u = Vector6::zeros();
        for k in 0..6 {
            let m = Matrix5::from_fn(|r, c| rows[r][if c < k { c } else { c + 1 }]);
            u[k] = if k % 2 == 0 { m.determinant() } else { -m.determinant() };
        }
        let norm = u.norm();
        if norm > 1e-12 * scale.powi(5) {
            let u = u / norm;
            let b = u.dot(&w[idx[0]]);
            let (lo, hi) = w.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                let d = u.dot(p) - b;
                (lo.min(d), hi.max(d))
            });
            if hi <= tol {
                best = best.min(b);
            } else if lo >= -tol {
                best = best.min(-b);
            }
        }
        let mut i = 5;
        loop {
            if idx[i] < n - 6 + i {
                idx[i] += 1;
                for j in i + 1..6 {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return if best.is_finite() { best.max(0.0) } else { 0.0 };
            }
            i -= 1;
        }
    }
}
