//! Rigid transforms in SO(3) ⋉ R³.

use std::ops::Mul;

use nalgebra::{Matrix3, Matrix4, Rotation3, Unit, Vector3};

use crate::error::{Error, Result};
use crate::num::Real;

/// A rotation followed by a translation, stored as an explicit 3×3 matrix.
///
/// Composition reads right to left: `(a * b).apply_point(p) == a.apply_point(b.apply_point(p))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidTransform3<T: Real> {
    rotation: Matrix3<T>,
    translation: Vector3<T>,
}

impl<T: Real> Default for RigidTransform3<T> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<T: Real> RigidTransform3<T> {
    pub fn identity() -> Self {
        Self { rotation: Matrix3::identity(), translation: Vector3::zeros() }
    }

    /// Builds a transform, rejecting rotations that are not in SO(3) within `tol`.
    pub fn try_new(rotation: Matrix3<T>, translation: Vector3<T>, tol: T) -> Result<Self> {
        let t = Self { rotation, translation };
        if !t.translation.iter().all(|x| x.is_finite()) {
            return Err(Error::invalid("rigid transform", "non-finite translation"));
        }
        if t.orthonormality_error() > tol || (t.rotation.determinant() - T::one()).abs() > tol {
            return Err(Error::invalid(
                "rigid transform",
                format!(
                    "rotation not in SO(3): |RtR-I|max = {:e}, det = {}",
                    t.orthonormality_error().as_f64(),
                    t.rotation.determinant().as_f64()
                ),
            ));
        }
        Ok(t)
    }

    /// Builds a transform without validating the rotation.
    ///
    /// Callers must guarantee the matrix is a proper rotation.
    pub fn from_parts_unchecked(rotation: Matrix3<T>, translation: Vector3<T>) -> Self {
        Self { rotation, translation }
    }

    pub fn from_translation(translation: Vector3<T>) -> Self {
        Self { rotation: Matrix3::identity(), translation }
    }

    pub fn from_rotation(rotation: Rotation3<T>) -> Self {
        Self { rotation: rotation.into_inner(), translation: Vector3::zeros() }
    }

    /// Rotation by `angle` about `axis` through the origin.
    pub fn from_axis_angle(axis: &Vector3<T>, angle: T) -> Self {
        Self::from_rotation(Rotation3::from_axis_angle(&Unit::new_normalize(*axis), angle))
    }

    pub fn rot_x(angle: T) -> Self {
        Self::from_axis_angle(&Vector3::x(), angle)
    }

    pub fn rot_y(angle: T) -> Self {
        Self::from_axis_angle(&Vector3::y(), angle)
    }

    pub fn rot_z(angle: T) -> Self {
        Self::from_axis_angle(&Vector3::z(), angle)
    }

    #[inline]
    pub fn rotation(&self) -> &Matrix3<T> {
        &self.rotation
    }

    #[inline]
    pub fn translation(&self) -> &Vector3<T> {
        &self.translation
    }

    /// Column `i` of the rotation, i.e. the image of the i-th basis axis.
    #[inline]
    pub fn axis(&self, i: usize) -> Vector3<T> {
        self.rotation.column(i).into_owned()
    }

    #[inline]
    pub fn apply_point(&self, p: &Vector3<T>) -> Vector3<T> {
        self.rotation * p + self.translation
    }

    #[inline]
    pub fn apply_vector(&self, v: &Vector3<T>) -> Vector3<T> {
        self.rotation * v
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self { rotation: rt, translation: -(rt * self.translation) }
    }

    /// `self⁻¹ · other`, without forming the inverse explicitly.
    pub fn inv_mul(&self, other: &Self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt * other.rotation,
            translation: rt * (other.translation - self.translation),
        }
    }

    pub fn then_translate(&self, offset: &Vector3<T>) -> Self {
        Self { rotation: self.rotation, translation: self.translation + offset }
    }

    /// Largest entry of |RᵀR − I|.
    pub fn orthonormality_error(&self) -> T {
        let e = self.rotation.transpose() * self.rotation - Matrix3::identity();
        e.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn is_valid(&self, tol: T) -> bool {
        self.orthonormality_error() <= tol && (self.rotation.determinant() - T::one()).abs() <= tol
    }

    /// Homogeneous 4×4 matrix.
    pub fn to_matrix4(&self) -> Matrix4<T> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// The 16 entries of the homogeneous matrix in row-major order.
    pub fn to_row_major(&self) -> [T; 16] {
        let m = self.to_matrix4();
        let mut out = [T::zero(); 16];
        for r in 0..4 {
            for c in 0..4 {
                out[4 * r + c] = m[(r, c)];
            }
        }
        out
    }

    /// Parses 16 row-major entries, validating the rotation within `tol`.
    pub fn from_row_major(v: &[T], tol: T) -> Result<Self> {
        if v.len() != 16 {
            return Err(Error::invalid("rigid transform", format!("expected 16 values, got {}", v.len())));
        }
        let rot = Matrix3::new(v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10]);
        let t = Vector3::new(v[3], v[7], v[11]);
        let last_row_ok = v[12].abs() <= tol && v[13].abs() <= tol && v[14].abs() <= tol && (v[15] - T::one()).abs() <= tol;
        if !last_row_ok {
            return Err(Error::invalid("rigid transform", "last row must be [0 0 0 1]"));
        }
        Self::try_new(rot, t, tol)
    }

    /// Projects the rotation back onto SO(3) (polar decomposition via SVD).
    pub fn renormalized(&self) -> Self {
        let rot = Rotation3::from_matrix(&self.rotation);
        Self { rotation: rot.into_inner(), translation: self.translation }
    }

    pub fn cast<U: Real>(&self) -> RigidTransform3<U> {
        RigidTransform3 {
            rotation: self.rotation.map(|x| U::lit(x.as_f64())),
            translation: self.translation.map(|x| U::lit(x.as_f64())),
        }
    }
}

impl<T: Real> Mul for RigidTransform3<T> {
    type Output = RigidTransform3<T>;

    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl<T: Real> Mul<&RigidTransform3<T>> for &RigidTransform3<T> {
    type Output = RigidTransform3<T>;

    fn mul(self, rhs: &RigidTransform3<T>) -> RigidTransform3<T> {
        RigidTransform3 {
            rotation: self.rotation * rhs.rotation,
            translation: self.rotation * rhs.translation + self.translation,
        }
    }
}

/// Maximum absolute entry-wise difference between the homogeneous matrices.
pub fn transform_distance<T: Real>(a: &RigidTransform3<T>, b: &RigidTransform3<T>) -> T {
    let d = a.to_matrix4() - b.to_matrix4();
    d.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type Tf = RigidTransform3<f64>;

    fn arb_transform() -> impl Strategy<Value = Tf> {
        (
            prop::array::uniform3(-1.0f64..1.0),
            -3.2f64..3.2,
            prop::array::uniform3(-2.0f64..2.0),
        )
            .prop_filter("non-zero axis", |(a, _, _)| a.iter().map(|x| x * x).sum::<f64>() > 1e-3)
            .prop_map(|(a, ang, t)| {
                Tf::from_axis_angle(&Vector3::from(a), ang).then_translate(&Vector3::from(t))
            })
    }

    #[test]
    fn identity_is_neutral() {
        let a = Tf::rot_z(0.3).then_translate(&Vector3::new(1.0, 2.0, 3.0));
        assert!(transform_distance(&(a * Tf::identity()), &a) < 1e-15);
        assert!(transform_distance(&(Tf::identity() * a), &a) < 1e-15);
    }

    #[test]
    fn rejects_reflections() {
        let m = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(Tf::try_new(m, Vector3::zeros(), 1e-9).is_err());
        let scaled = Matrix3::identity() * 1.01;
        assert!(Tf::try_new(scaled, Vector3::zeros(), 1e-9).is_err());
    }

    #[test]
    fn row_major_round_trip_and_bad_last_row() {
        let a = Tf::rot_x(0.7).then_translate(&Vector3::new(0.1, -0.2, 0.3));
        let rm = a.to_row_major();
        let b = Tf::from_row_major(&rm, 1e-9).unwrap();
        assert!(transform_distance(&a, &b) == 0.0);
        let mut bad = rm;
        bad[15] = 2.0;
        assert!(Tf::from_row_major(&bad, 1e-9).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let a = RigidTransform3::<f32>::rot_y(0.5).then_translate(&Vector3::new(1.0, 0.0, 0.0));
        let b = a * a.inverse();
        assert!(b.is_valid(1e-5));
        assert!(b.translation().norm() < 1e-6);
    }

    proptest! {
        #[test]
        fn composition_is_associative(a in arb_transform(), b in arb_transform(), c in arb_transform()) {
            let l = (a * b) * c;
            let r = a * (b * c);
            prop_assert!(transform_distance(&l, &r) <= 1e-12);
        }

        #[test]
        fn inverse_of_product(a in arb_transform(), b in arb_transform()) {
            let l = (a * b).inverse();
            let r = b.inverse() * a.inverse();
            prop_assert!(transform_distance(&l, &r) <= 1e-12);
            prop_assert!((a * b).is_valid(1e-9));
            prop_assert!(a.inverse().is_valid(1e-9));
            prop_assert!(transform_distance(&a.inv_mul(&b), &(a.inverse() * b)) <= 1e-12);
        }
    }
}
