//! Contact-anchored grasp representation and synthetic grasp dataset
//! generation for three-finger hands.
//!
//! The representation, quality, k-means and label math is generic over the
//! scalar through [`num::Real`]; mesh queries, scene rendering and the file
//! pipeline run on `f64`. The aliases below fix the scalar for common use.

pub mod contact_repr;
pub mod error;
pub mod formats;
pub mod geom;
pub mod hand;
pub mod kmeans;
pub mod labels;
pub mod num;
pub mod pipeline;
pub mod quality;
pub mod scene;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};
pub use num::Real;

pub type Transform = geom::RigidTransform3<f64>;
pub type Transform32 = geom::RigidTransform3<f32>;
pub type OrientedPoint = geom::OrientedPoint3<f64>;
pub type OrientedPoint32 = geom::OrientedPoint3<f32>;
pub type Joints = hand::JointConfig<f64>;
pub type Joints32 = hand::JointConfig<f32>;
pub type Compact = contact_repr::CompactGrasp<f64>;
pub type Compact32 = contact_repr::CompactGrasp<f32>;
pub type Grasp = contact_repr::FullGrasp<f64>;
pub type Grasp32 = contact_repr::FullGrasp<f32>;
pub type WrenchF64 = quality::Wrench<f64>;
pub type Wrench32 = quality::Wrench<f32>;
