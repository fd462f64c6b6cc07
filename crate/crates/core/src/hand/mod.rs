//! Parametric three-finger hand: description files, forward kinematics and
//! link collision geometry.

mod kinematics;
mod model;

pub use kinematics::{
    finger_geometry, fk_fingertip, hand_geometry_at, inner_link_frame, outer_joint_to_base, outer_link_frame,
    FingertipFk, HandPose, JointConfig,
};
pub use model::{check_finger, HandModel, LinkMeshes, DEFAULT_HAND, FINGER_COUNT};
