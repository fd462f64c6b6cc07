//! Geometric primitives: rigid transforms, triangle meshes, BVH-accelerated
//! ray casting and distance queries, voxel down-sampling and point clouds.

mod bvh;
pub mod hull;
mod kdtree;
mod mesh;
pub mod mesh_io;
pub mod primitives;
pub mod query;
pub mod transform;
mod voxel;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::num::Real;

pub use bvh::{Aabb, Bvh};
pub use kdtree::KdTree;
pub use mesh::{ClosestPoint, RayHit, TriangleMesh, WatertightReport};
pub use transform::{transform_distance, RigidTransform3};
pub use voxel::{voxel_downsample, voxel_key, VoxelKey};

/// Triangles with area below this are ignored by every query.
pub const DEGENERATE_AREA: f64 = 1e-14;

/// A surface point with its unit normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrientedPoint3<T: Real> {
    pub position: Vector3<T>,
    pub normal: Vector3<T>,
}

impl<T: Real> OrientedPoint3<T> {
    /// Builds an oriented point; the normal must be unit length within 1e-6.
    pub fn new(position: Vector3<T>, normal: Vector3<T>) -> Result<Self> {
        let p = Self { position, normal };
        p.check()?;
        Ok(p)
    }

    /// Normalizes `normal` before storing it.
    pub fn normalized(position: Vector3<T>, normal: Vector3<T>) -> Result<Self> {
        let n = normal.norm();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::invalid("oriented point", "zero or non-finite normal"));
        }
        Self::new(position, normal / n)
    }

    pub fn check(&self) -> Result<()> {
        if !self.position.iter().chain(self.normal.iter()).all(|x| x.is_finite()) {
            return Err(Error::invalid("oriented point", "non-finite component"));
        }
        if (self.normal.norm() - T::one()).abs() > T::lit(1e-6) {
            return Err(Error::invalid(
                "oriented point",
                format!("normal length {} is not 1", self.normal.norm().as_f64()),
            ));
        }
        Ok(())
    }

    pub fn transformed(&self, tf: &RigidTransform3<T>) -> Self {
        Self { position: tf.apply_point(&self.position), normal: tf.apply_vector(&self.normal) }
    }

    pub fn cast<U: Real>(&self) -> OrientedPoint3<U> {
        OrientedPoint3 {
            position: self.position.map(|x| U::lit(x.as_f64())),
            normal: self.normal.map(|x| U::lit(x.as_f64())),
        }
    }
}

/// An ordered list of oriented points.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<OrientedPoint3<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<OrientedPoint3<f64>>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn transformed(&self, tf: &RigidTransform3<f64>) -> Self {
        Self { points: self.points.iter().map(|p| p.transformed(tf)).collect() }
    }
}

/// Casts a ray against a mesh; see [`TriangleMesh::ray_cast`].
pub fn ray_cast(mesh: &TriangleMesh, origin: &Vector3<f64>, direction: &Vector3<f64>) -> Option<RayHit> {
    mesh.ray_cast(origin, direction)
}

/// Exact minimum distance from `point` to the mesh surface.
pub fn min_distance(mesh: &TriangleMesh, point: &Vector3<f64>) -> f64 {
    mesh.min_distance(point)
}
