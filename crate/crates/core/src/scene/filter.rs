use rayon::prelude::*;

use super::{Scene, VirtualCamera};
use crate::error::{Error, Result};
use crate::geom::TriangleMesh;
use crate::hand::{hand_geometry_at, HandModel, HandPose, JointConfig};
use crate::synth::GraspAnnotation;

#[derive(Clone, Debug, PartialEq)]
pub struct FilterConfig {
    /// Required distance from the hand to the table and to other objects, meters.
    pub min_clearance: f64,
    /// Length of the retreat path opposite the approach axis, meters.
    pub retreat_distance: f64,
    /// Poses checked along the retreat path, excluding the grasp pose.
    pub retreat_steps: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { min_clearance: 0.002, retreat_distance: 0.1, retreat_steps: 5 }
    }
}

impl FilterConfig {
    /// The grasp pose followed by the retreat poses.
    pub fn path(&self, pose: &HandPose<f64>) -> Vec<HandPose<f64>> {
        let back = -pose.axis(2);
        (0..=self.retreat_steps)
            .map(|s| {
                let t = if self.retreat_steps == 0 { 0.0 } else { s as f64 / self.retreat_steps as f64 };
                pose.then_translate(&(back * (t * self.retreat_distance)))
            })
            .collect()
    }
}

/// Whether the posed hand comes within `clearance` of the table or any of
/// `obstacles`, including full containment of one in the other.
pub fn hand_collides(
    hand: &HandModel,
    pose: &HandPose<f64>,
    joints: &JointConfig<f64>,
    obstacles: &[&TriangleMesh],
    clearance: f64,
) -> bool {
    let parts = hand_geometry_at(hand, pose, joints);
    for part in &parts {
        if part.is_empty() {
            continue;
        }
        if part.vertices().iter().any(|v| v.z < clearance) {
            return true;
        }
        let b = part.bounds();
        for obs in obstacles {
            if obs.is_empty() || obs.bounds().box_distance_sq(&b).sqrt() >= clearance {
                continue;
            }
            if obs.distance_to_mesh_capped(part, clearance, clearance) < clearance
                || obs.contains(&part.vertices()[0])
                || part.contains(&obs.vertices()[0])
            {
                return true;
            }
        }
    }
    false
}

/// Approach from below: the approach axis points up or the palm is under the table.
fn invalid_pose(pose: &HandPose<f64>) -> bool {
    pose.axis(2).z > 0.0 || pose.translation().z < 0.0
}

/// Re-poses object-frame annotations of `scene.objects[object]` into the
/// world and keeps those whose grasp pose and retreat path stay clear of the
/// table and of every other object.
pub fn filter_grasps(
    scene: &Scene,
    object: usize,
    annotations: &[GraspAnnotation],
    hand: &HandModel,
    config: &FilterConfig,
) -> Result<Vec<GraspAnnotation>> {
    let target = scene
        .objects
        .get(object)
        .ok_or_else(|| Error::invalid("object index", format!("{object} out of {} objects", scene.objects.len())))?;
    let others: Vec<TriangleMesh> =
        scene.objects.iter().enumerate().filter(|(i, _)| *i != object).map(|(_, o)| o.world_mesh()).collect();
    let obstacles: Vec<&TriangleMesh> = others.iter().collect();
    let posed: Vec<GraspAnnotation> =
        annotations.iter().map(|a| a.transformed(&target.pose, hand)).collect::<Result<_>>()?;
    let keep: Vec<bool> = posed
        .par_iter()
        .map(|a| {
            !invalid_pose(&a.pose)
                && config
                    .path(&a.pose)
                    .iter()
                    .all(|p| !hand_collides(hand, p, &a.joints, &obstacles, config.min_clearance))
        })
        .collect();
    Ok(posed.into_iter().zip(keep).filter_map(|(a, k)| k.then_some(a)).collect())
}

/// Expresses world-frame annotations in the camera frame.
pub fn to_camera_frame(cam: &VirtualCamera, annotations: &[GraspAnnotation], hand: &HandModel) -> Result<Vec<GraspAnnotation>> {
    let inv = cam.pose.inverse();
    annotations.iter().map(|a| a.transformed(&inv, hand)).collect()
}

/// Inverse of [`to_camera_frame`].
pub fn from_camera_frame(cam: &VirtualCamera, annotations: &[GraspAnnotation], hand: &HandModel) -> Result<Vec<GraspAnnotation>> {
    annotations.iter().map(|a| a.transformed(&cam.pose, hand)).collect()
}
