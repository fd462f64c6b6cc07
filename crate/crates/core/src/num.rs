//! Scalar abstraction shared by the math layers.
//!
//! Geometry kernels that touch meshes, BVHs and rendering run on `f64`; the
//! representation, quality, k-means and label math is written against [`Real`]
//! so it can be instantiated for `f32` as well.

use nalgebra::RealField;
use num_traits::{FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar usable by every generic routine in this crate.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + FloatConst {
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Lossy conversion back to `f64`, used for reporting and file output.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon of the scalar.
    #[inline]
    fn eps() -> Self {
        Self::default_epsilon()
    }
}

impl<T> Real for T where T: RealField + Copy + FromPrimitive + ToPrimitive + FloatConst {}
