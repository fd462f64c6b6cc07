//! Convex hulls in `D` dimensions by quickhull with simplicial facets.
//!
//! Used in 6-D for wrench-space quality and in 3-D for resting poses.

use std::collections::HashMap;

use nalgebra::SVector;

use crate::num::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum HullError {
    /// The points span fewer than `D` dimensions.
    #[error("points are not full-dimensional")]
    Degenerate,
    /// Floating point trouble produced an inconsistent hull.
    #[error("hull construction failed numerically")]
    Numerical,
}

/// A hull facet: `normal · x = offset`, unit `normal` pointing outward.
#[derive(Clone, Debug, PartialEq)]
pub struct Facet<T: Real, const D: usize> {
    pub vertices: [usize; D],
    pub normal: SVector<T, D>,
    pub offset: T,
}

#[derive(Clone, Debug)]
pub struct Hull<T: Real, const D: usize> {
    pub facets: Vec<Facet<T, D>>,
    /// Strictly interior reference point.
    pub interior: SVector<T, D>,
    /// Distance below which a point counts as lying on a facet plane.
    pub tolerance: T,
}

impl<T: Real, const D: usize> Hull<T, D> {
    /// Signed distance of `p` to the hull's most violated facet plane
    /// (negative inside).
    pub fn max_violation(&self, p: &SVector<T, D>) -> T {
        self.facets.iter().map(|f| f.normal.dot(p) - f.offset).fold(T::min_value().unwrap(), T::max)
    }

    /// Indices of points used as facet vertices, sorted.
    pub fn vertex_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.facets.iter().flat_map(|f| f.vertices).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

struct Work<T: Real, const D: usize> {
    vertices: [usize; D],
    normal: SVector<T, D>,
    offset: T,
    /// `neighbors[i]` shares the ridge opposite `vertices[i]`.
    neighbors: [usize; D],
    outside: Vec<usize>,
    alive: bool,
}

/// Builds the convex hull of `points`.
pub fn convex_hull<T: Real, const D: usize>(points: &[SVector<T, D>]) -> Result<Hull<T, D>, HullError> {
    assert!(D >= 2, "hull dimension must be at least 2");
    if points.len() < D + 1 || points.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
        return Err(HullError::Degenerate);
    }
    let scale = points.iter().flat_map(|p| p.iter()).fold(T::zero(), |m, x| m.max(x.abs())).max(T::one());
    let tol = T::eps() * T::lit(1e4) * scale;

    let simplex = initial_simplex(points, tol).ok_or(HullError::Degenerate)?;
    let interior = simplex.iter().fold(SVector::<T, D>::zeros(), |a, &i| a + points[i]) / T::lit((D + 1) as f64);

    let mut facets: Vec<Work<T, D>> = Vec::new();
    // Facet k of the simplex omits simplex vertex k; its neighbor across the
    // ridge opposite vertex j is the facet omitting j.
    for k in 0..=D {
        let mut verts = [0usize; D];
        let mut nbrs = [0usize; D];
        let mut slot = 0;
        for (j, &v) in simplex.iter().enumerate() {
            if j != k {
                verts[slot] = v;
                nbrs[slot] = j;
                slot += 1;
            }
        }
        let (normal, offset) = plane(points, &verts, &interior, tol).ok_or(HullError::Numerical)?;
        facets.push(Work { vertices: verts, normal, offset, neighbors: nbrs, outside: Vec::new(), alive: true });
    }
    let in_simplex = |i: usize| simplex.contains(&i);
    for (i, p) in points.iter().enumerate() {
        if in_simplex(i) {
            continue;
        }
        if let Some(f) = facets.iter_mut().find(|f| f.normal.dot(p) - f.offset > tol) {
            f.outside.push(i);
        }
    }

    let max_iter = 16 * points.len() + 64;
    let mut iter = 0;
    while let Some(seed) = facets.iter().position(|f| f.alive && !f.outside.is_empty()) {
        iter += 1;
        if iter > max_iter {
            return Err(HullError::Numerical);
        }
        let apex = {
            let f = &facets[seed];
            let mut best = f.outside[0];
            let mut best_d = f.normal.dot(&points[best]) - f.offset;
            for &i in &f.outside[1..] {
                let d = f.normal.dot(&points[i]) - f.offset;
                if d > best_d {
                    best = i;
                    best_d = d;
                }
            }
            best
        };
        let p = points[apex];

        // Visible region by flood fill from the seed facet.
        let mut visible = vec![seed];
        // 0 unvisited, 1 hidden, 2 visible.
        let mut state = vec![0u8; facets.len()];
        state[seed] = 2;
        let mut head = 0;
        while head < visible.len() {
            let f = visible[head];
            head += 1;
            for &n in &facets[f].neighbors {
                if state[n] != 0 {
                    continue;
                }
                let vis = facets[n].normal.dot(&p) - facets[n].offset > tol;
                state[n] = if vis { 2 } else { 1 };
                if vis {
                    visible.push(n);
                }
            }
        }

        // Horizon ridges become new facets with the apex.
        let mut created: Vec<usize> = Vec::new();
        let mut ridge_map: HashMap<[usize; D], (usize, usize)> = HashMap::new();
        for &f in &visible {
            for i in 0..D {
                let n = facets[f].neighbors[i];
                if state[n] == 2 {
                    continue;
                }
                let mut verts = facets[f].vertices;
                verts[i] = apex;
                let (normal, offset) = plane(points, &verts, &interior, tol).ok_or(HullError::Numerical)?;
                let id = facets.len();
                let mut nbrs = [usize::MAX; D];
                nbrs[i] = n;
                let back = facets[n].neighbors.iter().position(|&x| x == f).ok_or(HullError::Numerical)?;
                facets[n].neighbors[back] = id;
                // Link to sibling new facets through ridges containing the apex.
                for j in 0..D {
                    if j == i {
                        continue;
                    }
                    let mut key = verts;
                    key[j] = usize::MAX;
                    key.sort_unstable();
                    match ridge_map.remove(&key) {
                        Some((other, slot)) => {
                            nbrs[j] = other;
                            facets[other].neighbors[slot] = id;
                        }
                        None => {
                            ridge_map.insert(key, (id, j));
                        }
                    }
                }
                facets.push(Work { vertices: verts, normal, offset, neighbors: nbrs, outside: Vec::new(), alive: true });
                created.push(id);
            }
        }
        if !ridge_map.is_empty() || created.iter().any(|&c| facets[c].neighbors.contains(&usize::MAX)) {
            return Err(HullError::Numerical);
        }

        let mut orphans = Vec::new();
        for &f in &visible {
            facets[f].alive = false;
            orphans.append(&mut facets[f].outside);
        }
        for i in orphans {
            if i == apex {
                continue;
            }
            let q = points[i];
            if let Some(&c) = created.iter().find(|&&c| facets[c].normal.dot(&q) - facets[c].offset > tol) {
                facets[c].outside.push(i);
            }
        }
    }

    let facets: Vec<Facet<T, D>> = facets
        .into_iter()
        .filter(|f| f.alive)
        .map(|f| Facet { vertices: f.vertices, normal: f.normal, offset: f.offset })
        .collect();
    let hull = Hull { facets, interior, tolerance: tol };
    let slack = tol * T::lit(100.0);
    if points.iter().any(|p| hull.max_violation(p) > slack) {
        return Err(HullError::Numerical);
    }
    Ok(hull)
}

/// Greedy maximal-volume simplex: start from the lexicographically smallest
/// point and repeatedly add the point farthest from the current affine span.
fn initial_simplex<T: Real, const D: usize>(points: &[SVector<T, D>], tol: T) -> Option<Vec<usize>> {
    let lex_less = |a: &SVector<T, D>, b: &SVector<T, D>| {
        for k in 0..D {
            if a[k] < b[k] {
                return true;
            }
            if a[k] > b[k] {
                return false;
            }
        }
        false
    };
    let mut first = 0;
    for i in 1..points.len() {
        if lex_less(&points[i], &points[first]) {
            first = i;
        }
    }
    let origin = points[first];
    let mut chosen = vec![first];
    let mut basis: Vec<SVector<T, D>> = Vec::with_capacity(D);
    while chosen.len() < D + 1 {
        let mut best = None;
        let mut best_d = tol;
        for (i, p) in points.iter().enumerate() {
            let r = residual(&(p - origin), &basis);
            let d = r.norm();
            if d > best_d {
                best_d = d;
                best = Some((i, r));
            }
        }
        let (i, r) = best?;
        chosen.push(i);
        basis.push(r / best_d);
    }
    Some(chosen)
}

fn residual<T: Real, const D: usize>(v: &SVector<T, D>, basis: &[SVector<T, D>]) -> SVector<T, D> {
    let mut r = *v;
    // Two passes of modified Gram-Schmidt.
    for _ in 0..2 {
        for q in basis {
            r -= q * q.dot(&r);
        }
    }
    r
}

/// Plane through `verts`, oriented so `interior` is strictly below it.
fn plane<T: Real, const D: usize>(
    points: &[SVector<T, D>],
    verts: &[usize; D],
    interior: &SVector<T, D>,
    tol: T,
) -> Option<(SVector<T, D>, T)> {
    let base = points[verts[0]];
    let mut basis: Vec<SVector<T, D>> = Vec::with_capacity(D - 1);
    for &v in &verts[1..] {
        let r = residual(&(points[v] - base), &basis);
        let n = r.norm();
        if !(n > T::eps() * T::lit(16.0)) {
            return None;
        }
        basis.push(r / n);
    }
    let mut normal = SVector::<T, D>::zeros();
    let mut best = T::zero();
    for k in 0..D {
        let mut e = SVector::<T, D>::zeros();
        e[k] = T::one();
        let r = residual(&e, &basis);
        let n = r.norm();
        if n > best {
            best = n;
            normal = r / n;
        }
    }
    if best <= T::zero() {
        return None;
    }
    let mut offset = verts.iter().fold(T::zero(), |a, &v| a + normal.dot(&points[v])) / T::lit(D as f64);
    let side = normal.dot(interior) - offset;
    if side.abs() <= tol {
        return None;
    }
    if side > T::zero() {
        normal = -normal;
        offset = -offset;
    }
    Some((normal, offset))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Vector3, Vector6};

    #[test]
    fn cube_hull_3d() {
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push(Vector3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64));
        }
        pts.push(Vector3::new(0.5, 0.5, 0.5));
        pts.push(Vector3::new(0.5, 0.5, 1.0));
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.vertex_indices(), (0..8).collect::<Vec<_>>());
        assert_eq!(h.facets.len(), 12);
        for f in &h.facets {
            assert!((f.offset - f.normal.iter().fold(0.0f64, |m, x| m.max(*x))).abs() < 1e-12);
        }
    }

    #[test]
    fn cross_polytope_6d() {
        let mut pts = Vec::new();
        for k in 0..6 {
            for s in [1.0, -1.0] {
                pts.push(Vector6::<f64>::from_fn(|i, _| if i == k { s } else { 0.0 }));
            }
        }
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.facets.len(), 64);
        for f in &h.facets {
            assert!((f.offset - 1.0 / 6f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_input_is_degenerate() {
        let pts: Vec<Vector3<f64>> = (0..10).map(|i| Vector3::new(i as f64, (i * i) as f64, 0.0)).collect();
        assert_eq!(convex_hull(&pts).unwrap_err(), HullError::Degenerate);
    }

    #[test]
    fn random_points_all_inside() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let pts: Vec<Vector6<f64>> =
                (0..24).map(|_| Vector6::from_fn(|_, _| rng.random_range(-1.0..1.0))).collect();
            let h = convex_hull(&pts).unwrap();
            for p in &pts {
                assert!(h.max_violation(p) <= 1e-9);
            }
            for f in &h.facets {
                for &v in &f.vertices {
                    assert!((f.normal.dot(&pts[v]) - f.offset).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn works_in_f32() {
        let pts: Vec<Vector3<f32>> = vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
            Vector3::new(0.0, 0.0, 1.0),
            Vector3::new(0.1, 0.1, 0.1),
        ];
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.facets.len(), 4);
    }
}
