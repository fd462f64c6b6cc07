use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rand::seq::index;
use rayon::prelude::*;

use super::{DepthMap, VirtualCamera};
use crate::geom::{KdTree, OrientedPoint3, PointCloud};
use crate::seed;

type V3 = Vector3<f64>;

/// Neighborhood size of the normal plane fits.
pub const NORMAL_NEIGHBORS: usize = 30;

/// Plane-fit normals from the `k` nearest neighbors of each point, oriented
/// toward `viewpoint`.
pub fn estimate_normals(points: &[V3], k: usize, viewpoint: &V3) -> Vec<V3> {
    let tree = KdTree::new(points);
    points
        .par_iter()
        .map(|p| {
            let toward = viewpoint - p;
            let fallback = if toward.norm() > 0.0 { toward.normalize() } else { V3::z() };
            let nn = tree.nearest(p, k);
            if nn.len() < 3 {
                return fallback;
            }
            let mean = nn.iter().map(|&i| points[i]).sum::<V3>() / nn.len() as f64;
            let mut cov = Matrix3::zeros();
            for &i in &nn {
                let d = points[i] - mean;
                cov += d * d.transpose();
            }
            let eig = SymmetricEigen::new(cov);
            let n: V3 = eig.eigenvectors.column(eig.eigenvalues.imin()).into_owned();
            if !(n.norm() > 0.5) {
                return fallback;
            }
            let n = n.normalize();
            if n.dot(&toward) < 0.0 {
                -n
            } else {
                n
            }
        })
        .collect()
}

/// Back-projects every positive depth pixel (row-major order) into the camera
/// frame and estimates normals facing the camera.
pub fn depth_to_cloud(depth: &DepthMap, cam: &VirtualCamera) -> PointCloud {
    let mut pts = Vec::new();
    for v in 0..depth.height {
        for u in 0..depth.width {
            let d = depth.get(u, v);
            if d.is_finite() && d > 0.0 {
                pts.push(cam.back_project(u as f64, v as f64, d));
            }
        }
    }
    let normals = estimate_normals(&pts, NORMAL_NEIGHBORS, &V3::zeros());
    PointCloud::new(
        pts.into_iter().zip(normals).map(|(position, normal)| OrientedPoint3 { position, normal }).collect(),
    )
}

/// Seeded random subset of `target` points, kept in their original order.
/// Clouds already at or below `target` are returned unchanged.
pub fn downsample(cloud: &PointCloud, target: usize, seed: u64) -> PointCloud {
    if cloud.len() <= target {
        return cloud.clone();
    }
    let mut rng = seed::rng(seed, seed::stream::DOWNSAMPLE, 0);
    let mut keep = index::sample(&mut rng, cloud.len(), target).into_vec();
    keep.sort_unstable();
    PointCloud::new(keep.into_iter().map(|i| cloud.points[i]).collect())
}
