//! Exact primitive-level queries on triangles and segments.

use nalgebra::Vector3;

type V3 = Vector3<f64>;

/// Closest point on triangle `abc` to `p`, with barycentric weights `(wa, wb, wc)`.
pub fn closest_point_on_triangle(p: &V3, a: &V3, b: &V3, c: &V3) -> (V3, [f64; 3]) {
    // Voronoi-region walk.
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (*a, [1.0, 0.0, 0.0]);
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (*b, [0.0, 1.0, 0.0]);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (a + ab * v, [1.0 - v, v, 0.0]);
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (*c, [0.0, 0.0, 1.0]);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (a + ac * w, [1.0 - w, 0.0, w]);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + (c - b) * w, [0.0, 1.0 - w, w]);
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (a + ab * v + ac * w, [1.0 - v - w, v, w])
}

/// Möller–Trumbore intersection. Returns `(t, u, v)` with the hit at
/// `a + u (b - a) + v (c - a)`, for hits with `t > t_min`.
pub fn ray_triangle(origin: &V3, dir: &V3, a: &V3, b: &V3, c: &V3, t_min: f64) -> Option<(f64, f64, f64)> {
    let e1 = b - a;
    let e2 = c - a;
    let pvec = dir.cross(&e2);
    let det = e1.dot(&pvec);
    let scale = e1.norm() * e2.norm() * dir.norm();
    if det.abs() <= 1e-15 * scale {
        return None;
    }
    let inv = 1.0 / det;
    let tvec = origin - a;
    let u = tvec.dot(&pvec) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let qvec = tvec.cross(&e1);
    let v = dir.dot(&qvec) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&qvec) * inv;
    (t > t_min).then_some((t, u, v))
}

/// Closest points between segments `p0p1` and `q0q1`; returns the squared distance.
pub fn segment_segment_distance_sq(p0: &V3, p1: &V3, q0: &V3, q1: &V3) -> f64 {
    let d1 = p1 - p0;
    let d2 = q1 - q0;
    let r = p0 - q0;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let eps = 1e-300;
    let (s, t);
    if a <= eps && e <= eps {
        return r.norm_squared();
    }
    if a <= eps {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= eps {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 0.0 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    let cp = p0 + d1 * s;
    let cq = q0 + d2 * t;
    (cp - cq).norm_squared()
}

/// Whether segment `p0p1` crosses triangle `abc` (closed).
pub fn segment_hits_triangle(p0: &V3, p1: &V3, a: &V3, b: &V3, c: &V3) -> bool {
    let d = p1 - p0;
    match ray_triangle(p0, &d, a, b, c, f64::NEG_INFINITY) {
        Some((t, _, _)) => (0.0..=1.0).contains(&t),
        None => false,
    }
}

/// Exact distance between segment `p0 p1` and triangle `abc`.
pub fn segment_triangle_distance(p0: &V3, p1: &V3, a: &V3, b: &V3, c: &V3) -> f64 {
    if segment_hits_triangle(p0, p1, a, b, c) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for p in [p0, p1] {
        let (q, _) = closest_point_on_triangle(p, a, b, c);
        best = best.min((q - p).norm_squared());
    }
    for (u, v) in [(a, b), (b, c), (c, a)] {
        best = best.min(segment_segment_distance_sq(p0, p1, u, v));
    }
    best.sqrt()
}

/// Exact distance between two triangles (zero when they intersect).
pub fn triangle_triangle_distance(t1: &[V3; 3], t2: &[V3; 3]) -> f64 {
    for i in 0..3 {
        let j = (i + 1) % 3;
        if segment_hits_triangle(&t1[i], &t1[j], &t2[0], &t2[1], &t2[2])
            || segment_hits_triangle(&t2[i], &t2[j], &t1[0], &t1[1], &t1[2])
        {
            return 0.0;
        }
    }
    let mut best = f64::INFINITY;
    for i in 0..3 {
        let (p, _) = closest_point_on_triangle(&t1[i], &t2[0], &t2[1], &t2[2]);
        best = best.min((p - t1[i]).norm_squared());
        let (q, _) = closest_point_on_triangle(&t2[i], &t1[0], &t1[1], &t1[2]);
        best = best.min((q - t2[i]).norm_squared());
    }
    for i in 0..3 {
        for j in 0..3 {
            let d = segment_segment_distance_sq(&t1[i], &t1[(i + 1) % 3], &t2[j], &t2[(j + 1) % 3]);
            best = best.min(d);
        }
    }
    best.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64, z: f64) -> V3 {
        V3::new(x, y, z)
    }

    #[test]
    fn closest_point_regions() {
        let (a, b, c) = (v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0));
        let (p, w) = closest_point_on_triangle(&v(0.2, 0.2, 1.0), &a, &b, &c);
        assert!((p - v(0.2, 0.2, 0.0)).norm() < 1e-15);
        assert!((w[0] - 0.6).abs() < 1e-15);
        let (p, _) = closest_point_on_triangle(&v(-1.0, -1.0, 0.0), &a, &b, &c);
        assert_eq!(p, a);
        let (p, _) = closest_point_on_triangle(&v(1.0, 1.0, 0.0), &a, &b, &c);
        assert!((p - v(0.5, 0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn ray_hits_and_misses() {
        let (a, b, c) = (v(-1.0, -1.0, 0.0), v(1.0, -1.0, 0.0), v(0.0, 1.0, 0.0));
        let hit = ray_triangle(&v(0.0, 0.0, 2.0), &v(0.0, 0.0, -1.0), &a, &b, &c, 1e-9).unwrap();
        assert!((hit.0 - 2.0).abs() < 1e-15);
        assert!(ray_triangle(&v(0.0, 0.0, 2.0), &v(0.0, 0.0, 1.0), &a, &b, &c, 1e-9).is_none());
        assert!(ray_triangle(&v(5.0, 0.0, 2.0), &v(0.0, 0.0, -1.0), &a, &b, &c, 1e-9).is_none());
    }

    #[test]
    fn triangle_distances() {
        let t1 = [v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0)];
        let t2 = [v(0.0, 0.0, 0.5), v(1.0, 0.0, 0.5), v(0.0, 1.0, 0.5)];
        assert!((triangle_triangle_distance(&t1, &t2) - 0.5).abs() < 1e-15);
        // Crossed edges: closest features are two edges.
        let t3 = [v(0.5, -1.0, 0.3), v(0.5, 1.0, 0.3), v(0.5, 0.0, 2.0)];
        let t4 = [v(-1.0, 0.0, 0.0), v(2.0, 0.0, 0.0), v(0.5, 0.0, -2.0)];
        assert!((triangle_triangle_distance(&t3, &t4) - 0.3).abs() < 1e-12);
        // Interpenetrating.
        let t5 = [v(0.2, 0.2, -1.0), v(0.2, 0.2, 1.0), v(0.3, 0.25, 0.0)];
        assert_eq!(triangle_triangle_distance(&t1, &t5), 0.0);
    }

    #[test]
    fn segment_to_triangle() {
        let (a, b, c) = (v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0));
        assert_eq!(segment_triangle_distance(&v(0.2, 0.2, -1.0), &v(0.2, 0.2, 1.0), &a, &b, &c), 0.0);
        let d = segment_triangle_distance(&v(0.2, 0.2, 0.5), &v(0.3, 0.2, 2.0), &a, &b, &c);
        assert!((d - 0.5).abs() < 1e-15);
        let d = segment_triangle_distance(&v(-1.0, 2.0, 0.0), &v(2.0, 2.0, 0.0), &a, &b, &c);
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parallel_segments() {
        let d = segment_segment_distance_sq(&v(0.0, 0.0, 0.0), &v(1.0, 0.0, 0.0), &v(0.5, 1.0, 0.0), &v(2.0, 1.0, 0.0));
        assert!((d - 1.0).abs() < 1e-15);
    }
}
