//! Lloyd's k-means with deterministic farthest-point seeding.

use nalgebra::SVector;

use crate::num::Real;

const MAX_ITERATIONS: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct Clustering<T: Real, const D: usize> {
    pub centroids: Vec<SVector<T, D>>,
    /// Cluster index of each input point.
    pub assignments: Vec<usize>,
}

impl<T: Real, const D: usize> Clustering<T, D> {
    /// Sum of squared distances to the assigned centroids.
    pub fn inertia(&self, points: &[SVector<T, D>]) -> T {
        points
            .iter()
            .zip(&self.assignments)
            .fold(T::zero(), |acc, (p, &a)| acc + (p - self.centroids[a]).norm_squared())
    }
}

fn lex_less<T: Real, const D: usize>(a: &SVector<T, D>, b: &SVector<T, D>) -> bool {
    for k in 0..D {
        if a[k] != b[k] {
            return a[k] < b[k];
        }
    }
    false
}

fn nearest<T: Real, const D: usize>(p: &SVector<T, D>, centroids: &[SVector<T, D>]) -> usize {
    let mut best = 0;
    let mut best_d = (p - centroids[0]).norm_squared();
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let d = (p - c).norm_squared();
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

/// Clusters `points` into `min(k, n)` groups.
///
/// Seeding starts at the lexicographically smallest point and adds the point
/// farthest from all chosen seeds (lowest index on ties). Assignment ties go to
/// the lower cluster index and empty clusters keep their centroid.
pub fn kmeans<T: Real, const D: usize>(points: &[SVector<T, D>], k: usize) -> Clustering<T, D> {
    let k = k.min(points.len());
    if k == 0 {
        return Clustering { centroids: Vec::new(), assignments: vec![0; points.len()] };
    }
    let mut first = 0;
    for i in 1..points.len() {
        if lex_less(&points[i], &points[first]) {
            first = i;
        }
    }
    let mut centroids = vec![points[first]];
    let mut dist: Vec<T> = points.iter().map(|p| (p - points[first]).norm_squared()).collect();
    while centroids.len() < k {
        let mut far = 0;
        for i in 1..points.len() {
            if dist[i] > dist[far] {
                far = i;
            }
        }
        let c = points[far];
        centroids.push(c);
        for (d, p) in dist.iter_mut().zip(points) {
            *d = d.min((p - c).norm_squared());
        }
    }

    let mut assignments: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
    for _ in 0..MAX_ITERATIONS {
        let mut sums = vec![SVector::<T, D>::zeros(); k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            sums[a] += p;
            counts[a] += 1;
        }
        for j in 0..k {
            if counts[j] > 0 {
                centroids[j] = sums[j] / T::lit(counts[j] as f64);
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
        if next == assignments {
            break;
        }
        assignments = next;
    }
    Clustering { centroids, assignments }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    #[test]
    fn separated_patches() {
        let mut pts = Vec::new();
        for (cx, cy) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)] {
            for d in [-0.01, 0.0, 0.01] {
                pts.push(Vector3::new(cx + d, cy - d, 0.0));
            }
        }
        let c = kmeans(&pts, 3);
        assert_eq!(c.centroids.len(), 3);
        for patch in 0..3 {
            let a = c.assignments[3 * patch];
            assert!(c.assignments[3 * patch..3 * patch + 3].iter().all(|&x| x == a));
        }
        let mut seen: Vec<usize> = c.assignments.clone();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 3);
    }

    #[test]
    fn identical_points() {
        let pts = vec![Vector3::new(1.0, 2.0, 3.0); 5];
        let c = kmeans(&pts, 3);
        assert!(c.centroids.iter().all(|x| *x == pts[0]));
    }

    #[test]
    fn fewer_points_than_clusters() {
        let pts = vec![Vector3::new(0.0, 0.0, 0.0), Vector3::new(1.0, 0.0, 0.0)];
        let c = kmeans(&pts, 3);
        assert_eq!(c.centroids.len(), 2);
        assert_ne!(c.assignments[0], c.assignments[1]);
        assert_eq!(c.inertia(&pts), 0.0);
    }
}
