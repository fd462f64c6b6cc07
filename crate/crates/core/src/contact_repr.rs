//! Contact-anchored compact grasp representation.
//!
//! A grasp is stored relative to one fingertip contact: the contact fixes the
//! fingertip circle center and a fingertip frame, a unit projection `(x, y)`
//! fixes where the outer joint sits around that center, and the two main
//! joints map the outer-joint frame back to the palm. The two supporting
//! joints complete the configuration.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::geom::{OrientedPoint3, RigidTransform3};
use crate::hand::{check_finger, fk_fingertip, outer_joint_to_base, HandModel, HandPose, JointConfig, FINGER_COUNT};
use crate::num::Real;

/// Below this `|1 - |v1||` the fingertip frame uses its fallback second axis.
pub const FRAME_FALLBACK: f64 = 1e-8;

/// The 6-D representation anchored at one finger's contact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompactGrasp<T: Real> {
    /// Finger that owns the anchor contact (1-based).
    pub finger: usize,
    pub x: T,
    pub y: T,
    /// Spread joint.
    pub theta_ms: T,
    /// Anchor finger's inner joint.
    pub theta_m: T,
    /// Inner joints of the other two fingers, by ascending finger id.
    pub theta_s1: T,
    pub theta_s2: T,
}

impl<T: Real> CompactGrasp<T> {
    /// `z = √(1 − x² − y²)`; an error if `(x, y)` leaves the unit disk.
    pub fn z(&self) -> Result<T> {
        projection_z(self.x, self.y)
    }

    /// Checks the unit-disk condition and the joint ranges.
    pub fn validate(&self, hand: &HandModel) -> Result<()> {
        check_finger(self.finger)?;
        self.z()?;
        self.joints().validate(hand)
    }

    /// Joint configuration implied by the main/supporting split.
    pub fn joints(&self) -> JointConfig<T> {
        let a = self.finger - 1;
        let mut inner = [T::zero(); FINGER_COUNT];
        inner[a] = self.theta_m;
        let mut rest = [self.theta_s1, self.theta_s2].into_iter();
        for (i, slot) in inner.iter_mut().enumerate() {
            if i != a {
                *slot = rest.next().expect("two supporting joints");
            }
        }
        JointConfig { spread: self.theta_ms, inner }
    }

    pub fn cast<U: Real>(&self) -> CompactGrasp<U> {
        CompactGrasp {
            finger: self.finger,
            x: U::lit(self.x.as_f64()),
            y: U::lit(self.y.as_f64()),
            theta_ms: U::lit(self.theta_ms.as_f64()),
            theta_m: U::lit(self.theta_m.as_f64()),
            theta_s1: U::lit(self.theta_s1.as_f64()),
            theta_s2: U::lit(self.theta_s2.as_f64()),
        }
    }
}

/// Hand pose plus joint configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FullGrasp<T: Real> {
    pub pose: HandPose<T>,
    pub joints: JointConfig<T>,
}

fn projection_z<T: Real>(x: T, y: T) -> Result<T> {
    let s = x * x + y * y;
    if !s.is_finite() || s > T::one() + T::eps() * T::lit(8.0) {
        return Err(Error::Domain(format!("x² + y² = {} exceeds 1", s.as_f64())));
    }
    Ok((T::one() - s).max(T::zero()).sqrt())
}

/// Fingertip circle center `t_contact + r·n`.
pub fn fingertip_center<T: Real>(contact: &OrientedPoint3<T>, r: T) -> Vector3<T> {
    contact.position + contact.normal * r
}

/// Fingertip rotation for a unit normal `v`: columns `[w × v, w, v]` with
/// `w = normalize([0, −v3, v2])`, or `normalize([−v2, v1, 0])` when `|v1|`
/// is within [`FRAME_FALLBACK`] of 1.
pub fn fingertip_rotation<T: Real>(v: &Vector3<T>) -> Matrix3<T> {
    let v = v.normalize();
    let w = if v.x.abs() > T::one() - T::lit(FRAME_FALLBACK) {
        Vector3::new(-v.y, v.x, T::zero())
    } else {
        Vector3::new(T::zero(), -v.z, v.y)
    }
    .normalize();
    let r1 = w.cross(&v);
    Matrix3::from_columns(&[r1, w, v])
}

/// Fingertip frame: rotation from [`fingertip_rotation`], origin at the circle center.
pub fn fingertip_frame<T: Real>(contact: &OrientedPoint3<T>, r: T) -> RigidTransform3<T> {
    RigidTransform3::from_parts_unchecked(fingertip_rotation(&contact.normal), fingertip_center(contact, r))
}

/// Outer-joint frame from a contact and a projection `(x, y)`.
///
/// The origin is `‖v_finger‖·R_ft·[x, y, z] + t_ft`. The rotation has the
/// fingertip-to-joint direction `u` as first column, `a × u` as second and
/// `a = normalize(u × v_z)` as third, right-multiplied by `R_0`.
pub fn outer_joint_frame<T: Real>(contact: &OrientedPoint3<T>, x: T, y: T, hand: &HandModel) -> Result<RigidTransform3<T>> {
    let z = projection_z(x, y)?;
    let ft = fingertip_frame(contact, T::lit(hand.fingertip_radius));
    let local = Vector3::new(x, y, z);
    let u = ft.apply_vector(&local).normalize();
    let t_oj = u * T::lit(hand.fingertip_vector_length) + ft.translation();
    let vz = ft.axis(2);
    let cross = u.cross(&vz);
    // u parallel to v_z: any axis orthogonal to u will do; take the frame's first column.
    let a = if cross.norm() > T::lit(1e-12) { cross.normalize() } else { ft.axis(0) };
    let b = a.cross(&u);
    let r0 = RigidTransform3::<T>::rot_z(T::lit(hand.fingertip_roll));
    let rot = Matrix3::from_columns(&[u, b, a]) * r0.rotation();
    Ok(RigidTransform3::from_parts_unchecked(rot, t_oj))
}

/// Full grasp from a contact and its compact grasp: `pose = T_oj · T⁻¹`.
pub fn decode<T: Real>(contact: &OrientedPoint3<T>, g: &CompactGrasp<T>, hand: &HandModel) -> Result<FullGrasp<T>> {
    check_finger(g.finger)?;
    let t_oj = outer_joint_frame(contact, g.x, g.y, hand)?;
    let t = outer_joint_to_base(hand, g.theta_ms, g.theta_m, g.finger)?;
    Ok(FullGrasp { pose: &t_oj * &t.inverse(), joints: g.joints() })
}

/// Encodes a grasp at the nominal pad point of `finger` (normal from FK).
pub fn encode<T: Real>(full: &FullGrasp<T>, finger: usize, hand: &HandModel) -> Result<(OrientedPoint3<T>, CompactGrasp<T>)> {
    let fk = fk_fingertip(hand, &full.pose, &full.joints, finger)?;
    encode_with_normal(full, finger, &fk.pad_normal, hand)
}

/// Encodes a grasp whose `finger` touches with fingertip normal `normal`.
///
/// The normal must lie in the finger's closing plane, on the pad side, so
/// that decoding reproduces the grasp; otherwise the grasp is reported as not
/// representable.
pub fn encode_with_normal<T: Real>(
    full: &FullGrasp<T>,
    finger: usize,
    normal: &Vector3<T>,
    hand: &HandModel,
) -> Result<(OrientedPoint3<T>, CompactGrasp<T>)> {
    let i = check_finger(finger)?;
    let fk = fk_fingertip(hand, &full.pose, &full.joints, finger)?;
    let n = normal.normalize();
    if !n.iter().all(|x| x.is_finite()) {
        return Err(Error::invalid("contact normal", "zero or non-finite"));
    }
    let r = T::lit(hand.fingertip_radius);
    let contact = OrientedPoint3 { position: fk.fingertip_center - n * r, normal: n };
    let u = (fk.t_oj.translation() - fk.fingertip_center).normalize();
    let local = fingertip_rotation(&n).transpose() * u;
    if local.z < -T::lit(1e-12) {
        return Err(Error::NotRepresentable(format!(
            "finger {finger}: outer joint lies behind the contact plane (z = {:e})",
            local.z.as_f64()
        )));
    }
    // The decode rotation's third column must match the joint axis.
    let axis = fk.t_oj.axis(2);
    let off_plane = n.dot(&axis).abs();
    let cross = u.cross(&n);
    let side_ok = if cross.norm() > T::lit(1e-12) {
        cross.dot(&axis) > T::zero()
    } else {
        (fingertip_rotation(&n).column(0) - axis).norm() <= T::lit(1e-6)
    };
    if off_plane > T::lit(1e-6) || !side_ok {
        return Err(Error::NotRepresentable(format!(
            "finger {finger}: normal is not on the pad side of the closing plane (off-plane {:e})",
            off_plane.as_f64()
        )));
    }
    let q = &full.joints;
    let mut rest = (0..FINGER_COUNT).filter(|&k| k != i).map(|k| q.inner[k]);
    let g = CompactGrasp {
        finger,
        x: local.x,
        y: local.y,
        theta_ms: q.spread,
        theta_m: q.inner[i],
        theta_s1: rest.next().expect("three fingers"),
        theta_s2: rest.next().expect("three fingers"),
    };
    Ok((contact, g))
}
