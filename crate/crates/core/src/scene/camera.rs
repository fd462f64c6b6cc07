use nalgebra::{Matrix3, Vector3};
use rand::Rng;

use crate::error::{Error, Result};
use crate::geom::RigidTransform3;
use crate::seed;

type V3 = Vector3<f64>;

/// Pinhole depth camera. The camera frame is x right, y down, z forward;
/// pixel `(u, v)` has its center at image coordinates `(u, v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VirtualCamera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    /// Camera frame in the world.
    pub pose: RigidTransform3<f64>,
}

impl VirtualCamera {
    pub const DEFAULT_WIDTH: u32 = 640;
    pub const DEFAULT_HEIGHT: u32 = 480;
    pub const DEFAULT_FOCAL: f64 = 600.0;
    /// Distance from the table center for random viewpoints, meters.
    pub const VIEW_RADIUS: f64 = 0.7;
    /// Elevation range for random viewpoints, degrees.
    pub const ELEVATION_RANGE: [f64; 2] = [30.0, 75.0];

    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32, pose: RigidTransform3<f64>) -> Result<Self> {
        let cam = Self { fx, fy, cx, cy, width, height, pose };
        cam.validate()?;
        Ok(cam)
    }

    /// Default 640×480 intrinsics, principal point at the image center.
    pub fn with_default_intrinsics(pose: RigidTransform3<f64>) -> Self {
        Self {
            fx: Self::DEFAULT_FOCAL,
            fy: Self::DEFAULT_FOCAL,
            cx: Self::DEFAULT_WIDTH as f64 / 2.0,
            cy: Self::DEFAULT_HEIGHT as f64 / 2.0,
            width: Self::DEFAULT_WIDTH,
            height: Self::DEFAULT_HEIGHT,
            pose,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |r: String| Err(Error::invalid("camera", r));
        if !(self.fx > 0.0 && self.fy > 0.0 && self.fx.is_finite() && self.fy.is_finite()) {
            return bad(format!("focal lengths ({}, {}) must be positive", self.fx, self.fy));
        }
        if !(self.cx >= 0.0 && self.cx < self.width as f64 && self.cy >= 0.0 && self.cy < self.height as f64) {
            return bad(format!("principal point ({}, {}) outside the {}×{} image", self.cx, self.cy, self.width, self.height));
        }
        if !self.pose.is_valid(1e-9) {
            return bad("extrinsic rotation is not orthonormal".into());
        }
        Ok(())
    }

    /// Pose at `eye` looking at `target`, with image "up" toward world `+z`.
    pub fn look_at_pose(eye: &V3, target: &V3) -> Result<RigidTransform3<f64>> {
        let z = target - eye;
        if z.norm() < 1e-12 {
            return Err(Error::invalid("camera", "eye and target coincide"));
        }
        let z = z.normalize();
        let x = z.cross(&V3::z());
        if x.norm() < 1e-9 {
            return Err(Error::invalid("camera", "view direction is vertical"));
        }
        let x = x.normalize();
        let y = z.cross(&x);
        Ok(RigidTransform3::from_parts_unchecked(Matrix3::from_columns(&[x, y, z]), *eye))
    }

    /// Default intrinsics on the viewing hemisphere over the table center:
    /// seeded azimuth in `[0, 2π)` and elevation in [`Self::ELEVATION_RANGE`].
    pub fn random(seed: u64, index: u64) -> Self {
        let mut rng = seed::rng(seed, seed::stream::CAMERA, index);
        let azimuth: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let [lo, hi] = Self::ELEVATION_RANGE;
        let elevation = rng.random_range(lo..=hi).to_radians();
        let r = Self::VIEW_RADIUS;
        let eye = V3::new(r * elevation.cos() * azimuth.cos(), r * elevation.cos() * azimuth.sin(), r * elevation.sin());
        let pose = Self::look_at_pose(&eye, &V3::zeros()).expect("elevation below 90 degrees");
        Self::with_default_intrinsics(pose)
    }

    /// Unnormalized camera-frame ray `((u − cx)/fx, (v − cy)/fy, 1)`.
    pub fn pixel_ray(&self, u: f64, v: f64) -> V3 {
        V3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0)
    }

    /// Camera-frame point of pixel `(u, v)` at depth `d`.
    pub fn back_project(&self, u: f64, v: f64, depth: f64) -> V3 {
        self.pixel_ray(u, v) * depth
    }

    /// Image coordinates of a camera-frame point in front of the camera.
    pub fn project(&self, p: &V3) -> Option<(f64, f64)> {
        (p.z > 0.0).then(|| (self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy))
    }
}
