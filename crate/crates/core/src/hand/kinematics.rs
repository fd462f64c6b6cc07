use nalgebra::Vector3;

use super::model::{check_finger, HandModel, FINGER_COUNT};
use crate::contact_repr::fingertip_frame;
use crate::error::{Error, Result};
use crate::geom::{OrientedPoint3, RigidTransform3, TriangleMesh};
use crate::num::Real;

/// Palm base frame in the world.
pub type HandPose<T> = RigidTransform3<T>;

/// Spread angle and the three inner joint angles; outer joints follow by coupling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointConfig<T: Real> {
    pub spread: T,
    pub inner: [T; FINGER_COUNT],
}

impl<T: Real> JointConfig<T> {
    /// Builds a configuration and checks it against the hand's joint ranges.
    pub fn new(spread: T, inner: [T; FINGER_COUNT], hand: &HandModel) -> Result<Self> {
        let q = Self { spread, inner };
        q.validate(hand)?;
        Ok(q)
    }

    pub fn zeros() -> Self {
        Self { spread: T::zero(), inner: [T::zero(); FINGER_COUNT] }
    }

    pub fn validate(&self, hand: &HandModel) -> Result<()> {
        let within = |v: T, r: [f64; 2]| v.is_finite() && v >= T::lit(r[0]) && v <= T::lit(r[1]);
        if !within(self.spread, hand.spread_range) {
            return Err(Error::Domain(format!(
                "spread {} outside [{}, {}]",
                self.spread.as_f64(),
                hand.spread_range[0],
                hand.spread_range[1]
            )));
        }
        for (f, &q) in self.inner.iter().enumerate() {
            if !within(q, hand.inner_range) {
                return Err(Error::Domain(format!(
                    "finger {} inner joint {} outside [{}, {}]",
                    f + 1,
                    q.as_f64(),
                    hand.inner_range[0],
                    hand.inner_range[1]
                )));
            }
        }
        Ok(())
    }

    /// Coupled outer joint angle of a finger (0-based index).
    pub fn outer(&self, hand: &HandModel, index: usize) -> T {
        T::lit(hand.coupling) * self.inner[index] + T::lit(hand.outer_offset)
    }

    pub fn cast<U: Real>(&self) -> JointConfig<U> {
        JointConfig { spread: U::lit(self.spread.as_f64()), inner: self.inner.map(|q| U::lit(q.as_f64())) }
    }
}

/// Forward kinematics of one finger in world coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FingertipFk<T: Real> {
    /// Outer-joint frame: x from the fingertip toward the joint (rolled by `R_0`), z the joint axis.
    pub t_oj: RigidTransform3<T>,
    /// Fingertip frame at the nominal pad point.
    pub t_ft: RigidTransform3<T>,
    pub fingertip_center: Vector3<T>,
    /// Unit normal of the nominal pad point (fingertip frame z axis).
    pub pad_normal: Vector3<T>,
}

fn rot_z<T: Real>(a: T) -> RigidTransform3<T> {
    RigidTransform3::rot_z(a)
}

/// Inner link frame of finger index `i` relative to the palm.
pub fn inner_link_frame<T: Real>(hand: &HandModel, spread: T, theta: T, i: usize) -> RigidTransform3<T> {
    rot_z(T::lit(hand.spread_signs[i]) * spread) * hand.bases[i].cast::<T>() * rot_z(theta)
}

/// Outer link frame (x toward the fingertip, y toward the closing side) relative to the palm.
pub fn outer_link_frame<T: Real>(hand: &HandModel, spread: T, theta: T, i: usize) -> RigidTransform3<T> {
    let outer = T::lit(hand.coupling) * theta + T::lit(hand.outer_offset);
    inner_link_frame(hand, spread, theta, i)
        * RigidTransform3::from_translation(Vector3::new(T::lit(hand.inner_link_length), T::zero(), T::zero()))
        * rot_z(outer)
}

/// Transform from the palm base frame to the outer-joint frame for the main
/// joints `(theta_ms, theta_m)` of `finger`. Fixed fingers ignore `theta_ms`.
pub fn outer_joint_to_base<T: Real>(hand: &HandModel, theta_ms: T, theta_m: T, finger: usize) -> Result<RigidTransform3<T>> {
    let i = check_finger(finger)?;
    Ok(outer_joint_local(hand, theta_ms, theta_m, i))
}

fn outer_joint_local<T: Real>(hand: &HandModel, spread: T, theta: T, i: usize) -> RigidTransform3<T> {
    outer_link_frame(hand, spread, theta, i) * rot_z(T::pi())
}

/// Outer-joint frame, fingertip frame and fingertip circle center of `finger`.
pub fn fk_fingertip<T: Real>(
    hand: &HandModel,
    pose: &HandPose<T>,
    q: &JointConfig<T>,
    finger: usize,
) -> Result<FingertipFk<T>> {
    let i = check_finger(finger)?;
    let t_oj = pose * &outer_joint_local(hand, q.spread, q.inner[i], i);
    let (s, c) = (T::lit(hand.fingertip_roll.sin()), T::lit(hand.fingertip_roll.cos()));
    let lv = T::lit(hand.fingertip_vector_length);
    // R_0ᵀ e_x and R_0ᵀ e_y in outer-joint coordinates.
    let center_local = Vector3::new(-c, s, T::zero()) * lv;
    let normal_local = Vector3::new(s, c, T::zero());
    let fingertip_center = t_oj.apply_point(&center_local);
    let pad_normal = t_oj.apply_vector(&normal_local);
    let r = T::lit(hand.fingertip_radius);
    let contact = OrientedPoint3 { position: fingertip_center - pad_normal * r, normal: pad_normal };
    let t_ft = fingertip_frame(&contact, r);
    Ok(FingertipFk { t_oj, t_ft, fingertip_center, pad_normal })
}

/// World-frame collision meshes of one finger at inner angle `theta`:
/// `[inner link, outer link, fingertip]`.
pub fn finger_geometry(hand: &HandModel, pose: &HandPose<f64>, spread: f64, theta: f64, finger: usize) -> Result<[TriangleMesh; 3]> {
    let i = check_finger(finger)?;
    let inner = pose * &inner_link_frame(hand, spread, theta, i);
    let outer = pose * &outer_link_frame(hand, spread, theta, i);
    Ok([
        hand.meshes.inner.transformed(&inner),
        hand.meshes.outer.transformed(&outer),
        hand.meshes.tip.transformed(&outer),
    ])
}

/// World-frame collision meshes: the palm followed by inner link, outer link
/// and fingertip of fingers 1, 2, 3.
pub fn hand_geometry_at(hand: &HandModel, pose: &HandPose<f64>, q: &JointConfig<f64>) -> Vec<TriangleMesh> {
    let mut out = vec![hand.meshes.palm.transformed(pose)];
    for f in 1..=FINGER_COUNT {
        let links = finger_geometry(hand, pose, q.spread, q.inner[f - 1], f).expect("finger ids are valid");
        out.extend(links);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::transform_distance;

    #[test]
    fn thumb_ignores_spread() {
        let h = HandModel::barrett_like();
        let a = outer_joint_to_base(&h, 0.0, 0.4, 3).unwrap();
        let b = outer_joint_to_base(&h, std::f64::consts::FRAC_PI_2, 0.4, 3).unwrap();
        assert_eq!(a, b);
        let c = outer_joint_to_base(&h, 0.0, 0.4, 1).unwrap();
        let d = outer_joint_to_base(&h, 0.5, 0.4, 1).unwrap();
        assert!(transform_distance(&c, &d) > 1e-3);
    }

    #[test]
    fn invalid_finger_is_rejected() {
        let h = HandModel::barrett_like();
        assert!(outer_joint_to_base(&h, 0.0, 0.0, 0).is_err());
        assert!(fk_fingertip(&h, &RigidTransform3::<f64>::identity(), &JointConfig::zeros(), 4).is_err());
    }

    #[test]
    fn fingertip_center_is_at_vector_length() {
        let h = HandModel::barrett_like();
        let q = JointConfig::new(0.3, [0.2, 0.9, 1.4], &h).unwrap();
        for f in 1..=3 {
            let fk = fk_fingertip(&h, &RigidTransform3::identity(), &q, f).unwrap();
            let d: f64 = (fk.t_oj.translation() - fk.fingertip_center).norm();
            assert!((d - h.fingertip_vector_length).abs() < 1e-15);
            assert!((fk.t_ft.translation() - fk.fingertip_center).norm() < 1e-15);
            assert!((fk.t_ft.axis(2) - fk.pad_normal).norm() < 1e-15);
        }
    }

    #[test]
    fn joint_ranges_are_enforced() {
        let h = HandModel::barrett_like();
        assert!(JointConfig::new(-0.1, [0.0; 3], &h).is_err());
        assert!(JointConfig::new(0.0, [0.0, 2.5, 0.0], &h).is_err());
        assert!(JointConfig::new(f64::NAN, [0.0; 3], &h).is_err());
    }
}
