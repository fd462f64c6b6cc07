//! Wrench-space grasp quality.
//!
//! Each contact contributes the edges of a discretized Coulomb friction cone;
//! the ε-quality is the radius of the largest origin-centered ball inside the
//! convex hull of all edge wrenches.

use nalgebra::{SVector, Vector3, Vector6};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::contact_repr::fingertip_rotation;
use crate::error::{Error, Result};
use crate::geom::hull::{convex_hull, HullError};
use crate::geom::OrientedPoint3;
use crate::num::Real;

/// Directions used by the sampling fallback.
pub const FALLBACK_DIRECTIONS: usize = 100_000;

const ORACLE_SEED: u64 = 0x5EED_E951_10A5_u64;

/// Coulomb friction with a polyhedral cone.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrictionModel {
    pub mu: f64,
    /// Number of cone edges.
    pub edges: usize,
    /// Torque scale λ, in 1/m.
    pub torque_scale: f64,
}

impl Default for FrictionModel {
    fn default() -> Self {
        Self { mu: 0.5, edges: 8, torque_scale: 1.0 }
    }
}

impl FrictionModel {
    pub fn new(mu: f64, edges: usize, torque_scale: f64) -> Result<Self> {
        let m = Self { mu, edges, torque_scale };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::invalid("friction model", format!("mu = {} must be >= 0", self.mu)));
        }
        if self.edges < 3 {
            return Err(Error::invalid("friction model", format!("{} cone edges, need at least 3", self.edges)));
        }
        if !(self.torque_scale > 0.0 && self.torque_scale.is_finite()) {
            return Err(Error::invalid("friction model", format!("torque scale {} must be > 0", self.torque_scale)));
        }
        Ok(())
    }
}

/// Force and scaled torque.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wrench<T: Real> {
    pub force: Vector3<T>,
    pub torque: Vector3<T>,
}

impl<T: Real> Wrench<T> {
    pub fn from_vector(v: &Vector6<T>) -> Self {
        Self { force: Vector3::new(v[0], v[1], v[2]), torque: Vector3::new(v[3], v[4], v[5]) }
    }

    pub fn to_vector(&self) -> Vector6<T> {
        Vector6::new(self.force.x, self.force.y, self.force.z, self.torque.x, self.torque.y, self.torque.z)
    }
}

/// Unit projection of `v` onto the plane normal to `n`, if it is not degenerate.
fn tangent_component<T: Real>(v: &Vector3<T>, n: &Vector3<T>, scale: T) -> Option<Vector3<T>> {
    let proj = v - n * v.dot(n);
    (proj.norm() > T::lit(1e-9) * scale.max(T::lit(1e-300))).then(|| proj.normalize())
}

/// Tangent reference for a contact's cone edges.
///
/// The lever arm projected onto the tangent plane rotates with the contact,
/// which keeps ε invariant under rotations about the torque origin. When the
/// normal passes through the origin the direction toward the first other
/// contact with a usable projection is taken instead, and the fingertip
/// chart's first axis only when no such contact exists.
fn tangent_basis<T: Real>(contact: &OrientedPoint3<T>, origin: &Vector3<T>, others: &[OrientedPoint3<T>]) -> (Vector3<T>, Vector3<T>) {
    let n = contact.normal;
    let arm = contact.position - origin;
    let t1 = tangent_component(&arm, &n, arm.norm())
        .or_else(|| {
            others.iter().find_map(|o| {
                let d = o.position - contact.position;
                tangent_component(&d, &n, d.norm())
            })
        })
        .unwrap_or_else(|| fingertip_rotation(&n).column(0).into_owned());
    let t2 = n.cross(&t1);
    (t1, t2)
}

fn edge_wrenches<T: Real>(
    contact: &OrientedPoint3<T>,
    model: &FrictionModel,
    origin: &Vector3<T>,
    others: &[OrientedPoint3<T>],
) -> Vec<Wrench<T>> {
    let n = contact.normal.normalize();
    let contact = OrientedPoint3 { position: contact.position, normal: n };
    let (t1, t2) = tangent_basis(&contact, origin, others);
    let mu = T::lit(model.mu);
    let lambda = T::lit(model.torque_scale);
    let arm = contact.position - origin;
    (0..model.edges)
        .map(|k| {
            let a = T::two_pi() * T::lit(k as f64) / T::lit(model.edges as f64);
            let f = (-n + (t1 * a.cos() + t2 * a.sin()) * mu).normalize();
            Wrench { force: f, torque: arm.cross(&f) * lambda }
        })
        .collect()
}

/// The `m` edge wrenches of a contact's friction cone (axis `−n`, half-angle `atan μ`).
pub fn contact_wrenches<T: Real>(contact: &OrientedPoint3<T>, model: &FrictionModel, origin: &Vector3<T>) -> Vec<Wrench<T>> {
    edge_wrenches(contact, model, origin, &[])
}

/// All edge wrenches of a contact set.
///
/// Contacts whose normal passes through the torque origin orient their cone
/// edges toward the other contacts, so the set rotates as a whole.
pub fn grasp_wrenches<T: Real>(contacts: &[OrientedPoint3<T>], model: &FrictionModel, origin: &Vector3<T>) -> Vec<Wrench<T>> {
    contacts
        .iter()
        .enumerate()
        .flat_map(|(i, c)| {
            let others: Vec<OrientedPoint3<T>> =
                contacts.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, o)| *o).collect();
            edge_wrenches(c, model, origin, &others)
        })
        .collect()
}

/// How an ε value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QualityMethod {
    /// Facet enumeration of the 6-D hull.
    Exact,
    /// Hull construction failed; sampled upper bound.
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quality<T: Real> {
    pub epsilon: T,
    pub method: QualityMethod,
}

/// ε-quality by exact hull facets, falling back to the sampled bound with
/// [`FALLBACK_DIRECTIONS`] directions if the hull cannot be built.
pub fn epsilon_quality_detailed<T: Real>(wrenches: &[Wrench<T>]) -> Quality<T> {
    let pts: Vec<SVector<T, 6>> = wrenches.iter().map(Wrench::to_vector).collect();
    match convex_hull::<T, 6>(&pts) {
        Ok(hull) => {
            let min = hull.facets.iter().map(|f| f.offset).fold(T::max_value().unwrap(), T::min);
            let epsilon = if min > hull.tolerance { min } else { T::zero() };
            Quality { epsilon, method: QualityMethod::Exact }
        }
        Err(HullError::Degenerate) => Quality { epsilon: T::zero(), method: QualityMethod::Exact },
        Err(HullError::Numerical) => Quality {
            epsilon: epsilon_sampling_oracle(wrenches, FALLBACK_DIRECTIONS),
            method: QualityMethod::Sampled,
        },
    }
}

/// ε-quality: the minimal facet offset of the wrench hull when the origin is
/// strictly inside it, else 0.
pub fn epsilon_quality<T: Real>(wrenches: &[Wrench<T>]) -> T {
    epsilon_quality_detailed(wrenches).epsilon
}

/// Upper bound on ε: `min_u max_i wᵢ·u` over `n_dirs` pseudo-random unit directions, clamped at 0.
pub fn epsilon_sampling_oracle<T: Real>(wrenches: &[Wrench<T>], n_dirs: usize) -> T {
    epsilon_sampling_oracle_seeded(wrenches, n_dirs, ORACLE_SEED)
}

pub fn epsilon_sampling_oracle_seeded<T: Real>(wrenches: &[Wrench<T>], n_dirs: usize, seed: u64) -> T {
    if wrenches.is_empty() {
        return T::zero();
    }
    let pts: Vec<Vector6<T>> = wrenches.iter().map(Wrench::to_vector).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = T::max_value().unwrap();
    for _ in 0..n_dirs.max(1) {
        let u = loop {
            let g = Vector6::<f64>::from_fn(|_, _| StandardNormal.sample(&mut rng));
            let n = g.norm();
            if n > 1e-12 {
                break (g / n).map(T::lit);
            }
        };
        let support = pts.iter().map(|w| w.dot(&u)).fold(T::min_value().unwrap(), T::max);
        best = best.min(support);
    }
    best.max(T::zero())
}

/// Whether the wrenches achieve force closure (ε > 1e-9).
pub fn force_closure<T: Real>(wrenches: &[Wrench<T>]) -> bool {
    epsilon_quality(wrenches) > T::lit(1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cp(p: [f64; 3], n: [f64; 3]) -> OrientedPoint3<f64> {
        OrientedPoint3 { position: Vector3::from(p), normal: Vector3::from(n) }
    }

    #[test]
    fn frictionless_cone_collapses() {
        let m = FrictionModel::new(0.0, 6, 1.0).unwrap();
        for w in contact_wrenches(&cp([0.1, 0.0, 0.0], [1.0, 0.0, 0.0]), &m, &Vector3::zeros()) {
            assert!((w.force - Vector3::new(-1.0, 0.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn torques_vanish_at_origin() {
        let m = FrictionModel::default();
        for w in contact_wrenches(&cp([0.0; 3], [0.0, 0.6, 0.8]), &m, &Vector3::zeros()) {
            assert_eq!(w.torque, Vector3::zeros());
            assert!((w.force.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn forty_five_degree_cone() {
        let m = FrictionModel::new(1.0, 4, 1.0).unwrap();
        let ws = contact_wrenches(&cp([0.0; 3], [0.0, 0.0, 1.0]), &m, &Vector3::zeros());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = [[h, 0.0, -h], [-h, 0.0, -h], [0.0, h, -h], [0.0, -h, -h]];
        for e in expected {
            assert!(ws.iter().any(|w| (w.force - Vector3::from(e)).norm() < 1e-12), "{e:?}");
        }
    }

    #[test]
    fn single_contact_has_no_closure() {
        let m = FrictionModel::new(0.0, 3, 1.0).unwrap();
        let ws = contact_wrenches(&cp([0.0, 0.0, 0.1], [0.0, 0.0, 1.0]), &m, &Vector3::zeros());
        assert_eq!(epsilon_quality(&ws), 0.0);
        assert!(!force_closure(&ws));
    }

    #[test]
    fn cross_polytope_inradius() {
        let ws: Vec<Wrench<f64>> = (0..12)
            .map(|i| {
                let mut v = Vector6::zeros();
                v[i / 2] = if i % 2 == 0 { 1.0 } else { -1.0 };
                Wrench::from_vector(&v)
            })
            .collect();
        let q = epsilon_quality_detailed(&ws);
        assert_eq!(q.method, QualityMethod::Exact);
        assert!((q.epsilon - 1.0 / 6f64.sqrt()).abs() < 1e-12);
        assert!(epsilon_sampling_oracle(&ws, 1) >= q.epsilon);
        assert!(force_closure(&ws));
    }

    #[test]
    fn model_validation() {
        assert!(FrictionModel::new(-0.1, 8, 1.0).is_err());
        assert!(FrictionModel::new(0.5, 2, 1.0).is_err());
        assert!(FrictionModel::new(0.5, 8, 0.0).is_err());
    }
}
