//! Single-object grasp synthesis.
//!
//! Surface samples from voxel down-sampling are combined with a grid of
//! depths, rolls and spreads. For each candidate the fingers close until they
//! touch the object; touch points are clustered into one contact per finger,
//! the contacts are scored by ε-quality and encoded in the compact
//! representation.

use nalgebra::Vector3;
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::contact_repr::{decode, encode_with_normal, fingertip_rotation, CompactGrasp};
use crate::error::{Error, Result};
use crate::geom::{transform_distance, voxel_downsample, OrientedPoint3, RigidTransform3, TriangleMesh};
use crate::hand::{
    fk_fingertip, hand_geometry_at, inner_link_frame, outer_link_frame, HandModel, HandPose, JointConfig, FINGER_COUNT,
};
use crate::kmeans::kmeans;
use crate::quality::{epsilon_quality_detailed, epsilon_sampling_oracle, grasp_wrenches, FrictionModel, QualityMethod};
use crate::seed;

type V3 = Vector3<f64>;

/// Contact band: a finger touches when its geometry is this close to the object.
pub const TOUCH_DISTANCE: f64 = 5e-4;
/// Coarse closing step before bisection, radians.
pub const CLOSING_STEP: f64 = 0.02;
/// Bisection tolerance on the touching angle, radians.
pub const CLOSING_TOLERANCE: f64 = 1e-4;
/// Maximum contact-to-surface distance of a stored contact.
pub const SURFACE_TOLERANCE: f64 = 1e-3;
/// Reconstruction tolerance between decoded and stored grasps.
pub const DECODE_TOLERANCE: f64 = 1e-6;
/// Allowed penetration of hand geometry into the object.
pub const PENETRATION_TOLERANCE: f64 = 1e-3;

/// The `S1 × S2 × S3` candidate grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchSpace {
    /// Gripper depths, meters.
    pub depths: Vec<f64>,
    /// Rolls about the approach axis, radians.
    pub rolls: Vec<f64>,
    /// Spread angles, radians.
    pub spreads: Vec<f64>,
}

impl SearchSpace {
    /// 4 depths over [0.04, 0.08] m, 8 rolls over [0, 2π), spreads {0, π/4, π/2}.
    pub fn desk_scale() -> Self {
        use std::f64::consts::PI;
        Self {
            depths: (0..4).map(|i| 0.04 + 0.04 * i as f64 / 3.0).collect(),
            rolls: (0..8).map(|i| 2.0 * PI * i as f64 / 8.0).collect(),
            spreads: vec![0.0, PI / 4.0, PI / 2.0],
        }
    }

    pub fn validate(&self, hand: &HandModel) -> Result<()> {
        let bad = |r: String| Err(Error::invalid("search space", r));
        for (name, list) in [("depths", &self.depths), ("rolls", &self.rolls), ("spreads", &self.spreads)] {
            if list.is_empty() {
                return bad(format!("{name} is empty"));
            }
            if list.windows(2).any(|w| !(w[0] <= w[1])) || list.iter().any(|x| !x.is_finite()) {
                return bad(format!("{name} must be finite and sorted"));
            }
        }
        if self.depths[0] < 0.0 || *self.depths.last().unwrap() > hand.standoff() {
            return bad(format!("depths must lie in [0, {}]", hand.standoff()));
        }
        if self.spreads[0] < hand.spread_range[0] || *self.spreads.last().unwrap() > hand.spread_range[1] {
            return bad("spreads outside the hand's spread range".into());
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.depths.len() * self.rolls.len() * self.spreads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(depth, roll, spread)` of grid index `i` (spread varies fastest).
    pub fn get(&self, i: usize) -> (f64, f64, f64) {
        let ns = self.spreads.len();
        let nr = self.rolls.len();
        (self.depths[i / (ns * nr)], self.rolls[(i / ns) % nr], self.spreads[i % ns])
    }
}

/// A synthesized grasp with its contacts and quality.
#[derive(Clone, Debug, PartialEq)]
pub struct GraspAnnotation {
    pub object_id: String,
    pub pose: HandPose<f64>,
    pub joints: JointConfig<f64>,
    /// One contact per finger, finger 1 first.
    pub contacts: [OrientedPoint3<f64>; FINGER_COUNT],
    /// Compact grasp anchored at each finger's contact.
    pub compact: [CompactGrasp<f64>; FINGER_COUNT],
    /// Finger whose compact grasp is the primary one.
    pub anchor: usize,
    pub epsilon: f64,
    /// True when ε came from the sampling fallback.
    pub epsilon_sampled: bool,
}

impl GraspAnnotation {
    pub fn anchor_compact(&self) -> &CompactGrasp<f64> {
        &self.compact[self.anchor - 1]
    }

    /// Re-expresses the grasp after moving the object by `tf`.
    ///
    /// The compact grasps are re-encoded because the fingertip chart is fixed
    /// in the frame the contact is expressed in.
    pub fn transformed(&self, tf: &RigidTransform3<f64>, hand: &HandModel) -> Result<Self> {
        let pose = tf * &self.pose;
        let full = crate::contact_repr::FullGrasp { pose, joints: self.joints };
        let mut contacts = self.contacts;
        let mut compact = self.compact;
        for f in 0..FINGER_COUNT {
            let n = tf.apply_vector(&self.contacts[f].normal);
            let (c, g) = encode_with_normal(&full, f + 1, &n, hand)?;
            contacts[f] = c;
            compact[f] = g;
        }
        Ok(Self { pose, contacts, compact, ..self.clone() })
    }
}

/// Hand pose whose palm approach axis (palm z) is `−normal`, with the palm
/// origin at `position + (standoff − depth)·normal`, rolled about the approach axis.
pub fn candidate_pose(sample: &OrientedPoint3<f64>, depth: f64, roll: f64, standoff: f64) -> HandPose<f64> {
    let approach = -sample.normal.normalize();
    let chart = fingertip_rotation(&approach);
    let rot = chart * RigidTransform3::<f64>::rot_z(roll).rotation();
    RigidTransform3::from_parts_unchecked(rot, sample.position + sample.normal.normalize() * (standoff - depth))
}

/// Where one finger stopped.
#[derive(Clone, Debug, PartialEq)]
pub struct FingerTouch {
    pub theta: f64,
    pub fingertip_center: V3,
    /// Object surface point nearest the fingertip center, with its surface normal.
    pub surface: OrientedPoint3<f64>,
    /// Surface points under the fingertip contact patch.
    pub raw: Vec<V3>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Closing {
    pub joints: JointConfig<f64>,
    pub touches: [FingerTouch; FINGER_COUNT],
}

impl Closing {
    pub fn contacts(&self) -> [OrientedPoint3<f64>; FINGER_COUNT] {
        std::array::from_fn(|f| self.touches[f].surface)
    }
}

/// Segment plus radius enclosing a link mesh, in the link frame.
#[derive(Clone, Copy, Debug)]
struct Capsule {
    a: V3,
    b: V3,
    radius: f64,
}

impl Capsule {
    /// Axis along the longest side of the local bounding box.
    fn enclosing(mesh: &TriangleMesh) -> Option<Self> {
        if mesh.is_empty() {
            return None;
        }
        let bounds = mesh.bounds();
        let c = bounds.center();
        let e = bounds.extent();
        let k = e.imax();
        let mut a = c;
        let mut b = c;
        a[k] = bounds.min[k];
        b[k] = bounds.max[k];
        let radius = mesh.vertices().iter().map(|v| point_segment_distance(v, &a, &b)).fold(0.0, f64::max);
        Some(Self { a, b, radius })
    }

    /// Lower bound on the distance from the posed capsule's interior to `mesh`.
    fn clearance(&self, frame: &RigidTransform3<f64>, mesh: &TriangleMesh, cap: f64) -> f64 {
        mesh.segment_distance(&frame.apply_point(&self.a), &frame.apply_point(&self.b), cap + self.radius) - self.radius
    }
}

fn point_segment_distance(p: &V3, a: &V3, b: &V3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + ab * t)).norm()
}

/// Per-finger geometry bounds used while closing.
struct FingerBounds {
    inner: Option<Capsule>,
    outer: Option<Capsule>,
    /// Upper bound on how fast any finger point moves per radian of inner joint.
    speed: f64,
}

impl FingerBounds {
    fn new(hand: &HandModel) -> Self {
        let reach = |m: &TriangleMesh| m.vertices().iter().map(|v| v.norm()).fold(0.0, f64::max);
        let inner_reach = reach(&hand.meshes.inner);
        let tip_reach = hand.fingertip_vector_length + reach(&hand.meshes.tip).max(hand.fingertip_radius);
        let outer_reach = reach(&hand.meshes.outer).max(tip_reach);
        let speed = inner_reach.max(hand.inner_link_length + outer_reach + hand.coupling * outer_reach);
        Self { inner: Capsule::enclosing(&hand.meshes.inner), outer: Capsule::enclosing(&hand.meshes.outer), speed }
    }
}

struct Clearance {
    tip: f64,
    /// Exact when within the contact band, otherwise a lower bound.
    links: f64,
}

impl Clearance {
    fn min(&self) -> f64 {
        self.tip.min(self.links)
    }

    fn touching(&self) -> bool {
        self.min() <= TOUCH_DISTANCE
    }
}

fn clearance(
    hand: &HandModel,
    bounds: &FingerBounds,
    pose: &HandPose<f64>,
    spread: f64,
    theta: f64,
    finger: usize,
    mesh: &TriangleMesh,
) -> Clearance {
    let i = finger - 1;
    let inner_frame = pose * &inner_link_frame(hand, spread, theta, i);
    let outer_frame = pose * &outer_link_frame(hand, spread, theta, i);
    let center = outer_frame.apply_point(&(hand.tip_direction_outer() * hand.fingertip_vector_length));
    let tip = mesh.min_distance(&center) - hand.fingertip_radius;
    // Links farther than the fingertip do not change the minimum.
    let cap = tip.max(2.0 * TOUCH_DISTANCE);
    let rough = [(bounds.inner, &inner_frame), (bounds.outer, &outer_frame)]
        .iter()
        .filter_map(|(c, f)| c.map(|c| c.clearance(f, mesh, cap)))
        .fold(f64::INFINITY, f64::min);
    let links = if rough > TOUCH_DISTANCE {
        rough
    } else {
        let band = 2.0 * TOUCH_DISTANCE;
        let inner = hand.meshes.inner.transformed(&inner_frame);
        let outer = hand.meshes.outer.transformed(&outer_frame);
        mesh.distance_to_mesh_capped(&inner, TOUCH_DISTANCE, band).min(mesh.distance_to_mesh_capped(&outer, TOUCH_DISTANCE, band))
    };
    Clearance { tip, links }
}

/// Closes one finger from fully open until it first touches the mesh.
///
/// Returns `None` if the finger starts in contact, reaches its limit, or a
/// link rather than the fingertip makes the first contact.
pub fn close_finger(hand: &HandModel, pose: &HandPose<f64>, spread: f64, finger: usize, mesh: &TriangleMesh) -> Option<FingerTouch> {
    let [lo, hi] = hand.inner_range;
    let bounds = FingerBounds::new(hand);
    let speed = bounds.speed;
    let mut prev = lo;
    let c0 = clearance(hand, &bounds, pose, spread, lo, finger, mesh);
    if c0.touching() {
        return None;
    }
    let steps = ((hi - lo) / CLOSING_STEP).ceil() as usize;
    let mut k = 0usize;
    let mut clear = c0.min();
    let hit = loop {
        // Grid points whose clearance provably stays above the band are skipped.
        let skip = (((clear - TOUCH_DISTANCE) / (speed * CLOSING_STEP)).floor() as usize).max(1);
        k = (k + skip).min(steps);
        let theta = (lo + k as f64 * CLOSING_STEP).min(hi);
        let c = clearance(hand, &bounds, pose, spread, theta, finger, mesh);
        if c.touching() {
            break theta;
        }
        if k == steps {
            return None;
        }
        prev = theta;
        clear = c.min();
    };
    let (mut a, mut b) = (prev, hit);
    while b - a > CLOSING_TOLERANCE {
        let m = 0.5 * (a + b);
        if clearance(hand, &bounds, pose, spread, m, finger, mesh).touching() {
            b = m;
        } else {
            a = m;
        }
    }
    let c = clearance(hand, &bounds, pose, spread, b, finger, mesh);
    if c.links <= TOUCH_DISTANCE || c.tip > TOUCH_DISTANCE {
        return None;
    }
    let center = (pose * &outer_link_frame(hand, spread, b, finger - 1))
        .apply_point(&(hand.tip_direction_outer() * hand.fingertip_vector_length));
    let cp = mesh.closest_point(&center)?;
    let surface = OrientedPoint3 { position: cp.point, normal: cp.normal };
    // Patch: fingertip vertices within the band, projected onto the surface.
    let mut raw = vec![cp.point];
    let r = hand.fingertip_radius;
    let band = TOUCH_DISTANCE + 2.0 * (cp.distance - r).max(0.0);
    let frame = pose * &outer_link_frame(hand, spread, b, finger - 1);
    for v in hand.meshes.tip.vertices() {
        let p = frame.apply_point(v);
        if (p - cp.point).norm() > 0.5 * r + band {
            continue;
        }
        if let Some(q) = mesh.closest_point(&p) {
            if q.distance <= band && (q.point - center).norm() <= r + band {
                raw.push(q.point);
            }
        }
    }
    Some(FingerTouch { theta: b, fingertip_center: center, surface, raw })
}

/// Closes every finger independently at the given spread.
pub fn close_fingers(hand: &HandModel, pose: &HandPose<f64>, spread: f64, mesh: &TriangleMesh) -> Option<Closing> {
    if spread < hand.spread_range[0] || spread > hand.spread_range[1] {
        return None;
    }
    let palm = hand.meshes.palm.transformed(pose);
    if mesh.distance_to_mesh_capped(&palm, TOUCH_DISTANCE, 2.0 * TOUCH_DISTANCE) <= TOUCH_DISTANCE {
        return None;
    }
    let t1 = close_finger(hand, pose, spread, 1, mesh)?;
    let t2 = close_finger(hand, pose, spread, 2, mesh)?;
    let t3 = close_finger(hand, pose, spread, 3, mesh)?;
    let joints = JointConfig { spread, inner: [t1.theta, t2.theta, t3.theta] };
    Some(Closing { joints, touches: [t1, t2, t3] })
}

/// Pools raw touches, clusters them into `k` groups and projects each
/// centroid onto the mesh.
pub fn extract_contacts(raw: &[Vec<V3>], k: usize, mesh: &TriangleMesh) -> Vec<OrientedPoint3<f64>> {
    let pooled: Vec<V3> = raw.iter().flatten().copied().collect();
    if pooled.is_empty() {
        return Vec::new();
    }
    kmeans(&pooled, k)
        .centroids
        .iter()
        .filter_map(|c| mesh.closest_point(c).map(|q| OrientedPoint3 { position: q.point, normal: q.normal }))
        .collect()
}

/// Torque origin (vertex centroid) and torque scale (1 / max vertex distance).
pub fn torque_normalization(mesh: &TriangleMesh) -> (V3, f64) {
    let o = mesh.vertex_centroid();
    let r = mesh.vertices().iter().map(|v| (v - o).norm()).fold(0.0, f64::max);
    (o, if r > 0.0 { 1.0 / r } else { 1.0 })
}

/// Synthesis parameters shared by every candidate.
#[derive(Clone, Debug)]
pub struct SynthesisConfig {
    pub space: SearchSpace,
    /// Friction model; its torque scale is replaced by the mesh normalization.
    pub friction: FrictionModel,
    pub tau: f64,
    pub target_count: usize,
    pub voxel: f64,
    pub seed: u64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            space: SearchSpace::desk_scale(),
            friction: FrictionModel::default(),
            tau: 0.05,
            target_count: 15_000,
            voxel: 0.01,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SynthesisReport {
    pub annotations: Vec<GraspAnnotation>,
    /// Candidates evaluated before stopping.
    pub evaluated: usize,
}

/// Directions of the sampled ε bound that screens candidates before the exact hull.
const PREFILTER_DIRECTIONS: usize = 64;

/// Anchor of the primary compact grasp: the fixed finger 3, which always
/// contacts in a kept annotation.
pub const ANCHOR_FINGER: usize = 3;

/// Evaluates one candidate; `None` when it is rejected.
pub fn evaluate_candidate(
    mesh: &TriangleMesh,
    hand: &HandModel,
    sample: &OrientedPoint3<f64>,
    (depth, roll, spread): (f64, f64, f64),
    friction: &FrictionModel,
    tau: f64,
    object_id: &str,
) -> Option<GraspAnnotation> {
    let pose = candidate_pose(sample, depth, roll, hand.standoff());
    let closing = close_fingers(hand, &pose, spread, mesh)?;
    let raw: Vec<Vec<V3>> = closing.touches.iter().map(|t| t.raw.clone()).collect();
    let centroids = extract_contacts(&raw, FINGER_COUNT, mesh);
    if centroids.len() != FINGER_COUNT {
        return None;
    }
    // Each finger takes the centroid nearest its own touch; the match must be one-to-one.
    let mut matched = [usize::MAX; FINGER_COUNT];
    for f in 0..FINGER_COUNT {
        let p = closing.touches[f].surface.position;
        matched[f] = (0..FINGER_COUNT)
            .min_by(|&a, &b| (centroids[a].position - p).norm().total_cmp(&(centroids[b].position - p).norm()))
            .expect("three centroids");
    }
    if matched[0] == matched[1] || matched[0] == matched[2] || matched[1] == matched[2] {
        return None;
    }
    let full = crate::contact_repr::FullGrasp { pose, joints: closing.joints };
    let r = hand.fingertip_radius;
    let mut contacts = [OrientedPoint3 { position: V3::zeros(), normal: V3::z() }; FINGER_COUNT];
    let mut compact = [CompactGrasp { finger: 1, x: 0.0, y: 0.0, theta_ms: 0.0, theta_m: 0.0, theta_s1: 0.0, theta_s2: 0.0 };
        FINGER_COUNT];
    for f in 0..FINGER_COUNT {
        let center = closing.touches[f].fingertip_center;
        let target = centroids[matched[f]].position;
        let axis = fk_fingertip(hand, &pose, &closing.joints, f + 1).ok()?.t_oj.axis(2);
        let d = center - target;
        let in_plane = d - axis * d.dot(&axis);
        if in_plane.norm() < 1e-9 {
            return None;
        }
        let n = in_plane.normalize();
        let (c, g) = encode_with_normal(&full, f + 1, &n, hand).ok()?;
        debug_assert!((c.position - (center - n * r)).norm() < 1e-12);
        if mesh.min_distance(&c.position) > SURFACE_TOLERANCE || c.position.z.is_nan() {
            return None;
        }
        contacts[f] = c;
        compact[f] = g;
    }
    let (origin, lambda) = torque_normalization(mesh);
    let model = FrictionModel { torque_scale: lambda, ..*friction };
    let wrenches = grasp_wrenches(&contacts, &model, &origin);
    // The sampled value bounds ε from above, so this never drops a grasp with ε ≥ τ.
    if epsilon_sampling_oracle(&wrenches, PREFILTER_DIRECTIONS) < tau {
        return None;
    }
    let q = epsilon_quality_detailed(&wrenches);
    if !(q.epsilon >= tau) {
        return None;
    }
    let ann = GraspAnnotation {
        object_id: object_id.to_string(),
        pose,
        joints: closing.joints,
        contacts,
        compact,
        anchor: ANCHOR_FINGER,
        epsilon: q.epsilon,
        epsilon_sampled: q.method == QualityMethod::Sampled,
    };
    check_decode(&ann, hand).is_empty().then_some(ann)
}

/// Candidates are evaluated in chunks of this size, in index order.
const CHUNK: usize = 64;

/// Runs the candidate search until `target_count` annotations are kept or the
/// grid is exhausted. Results are ordered by candidate index.
pub fn synthesize_object(mesh: &TriangleMesh, hand: &HandModel, config: &SynthesisConfig, object_id: &str) -> Result<SynthesisReport> {
    if mesh.is_empty() {
        return Err(Error::invalid("mesh", "empty mesh"));
    }
    config.space.validate(hand)?;
    config.friction.validate()?;
    let mut samples = voxel_downsample(mesh, config.voxel);
    samples.shuffle(&mut seed::rng(config.seed, seed::stream::SAMPLE_ORDER, 0));
    let per_sample = config.space.len();
    let total = samples.len() * per_sample;
    let mut annotations = Vec::new();
    let mut evaluated = 0;
    let mut start = 0;
    while start < total && annotations.len() < config.target_count {
        let end = (start + CHUNK).min(total);
        let found: Vec<(usize, Option<GraspAnnotation>)> = (start..end)
            .into_par_iter()
            .map(|i| {
                let sample = &samples[i / per_sample];
                let params = config.space.get(i % per_sample);
                (i, evaluate_candidate(mesh, hand, sample, params, &config.friction, config.tau, object_id))
            })
            .collect();
        for (i, a) in found {
            if annotations.len() >= config.target_count {
                break;
            }
            evaluated = i + 1;
            if let Some(a) = a {
                annotations.push(a);
            }
        }
        start = end;
    }
    Ok(SynthesisReport { annotations, evaluated })
}

/// Decode-consistency violations of an annotation.
pub fn check_decode(ann: &GraspAnnotation, hand: &HandModel) -> Vec<String> {
    let mut out = Vec::new();
    for f in 0..FINGER_COUNT {
        let g = &ann.compact[f];
        if g.finger != f + 1 {
            out.push(format!("compact[{f}] anchored at finger {} instead of {}", g.finger, f + 1));
            continue;
        }
        match decode(&ann.contacts[f], g, hand) {
            Ok(full) => {
                let dp = transform_distance(&full.pose, &ann.pose);
                let dq = (0..FINGER_COUNT)
                    .map(|k| (full.joints.inner[k] - ann.joints.inner[k]).abs())
                    .fold((full.joints.spread - ann.joints.spread).abs(), f64::max);
                if dp > DECODE_TOLERANCE || dq > DECODE_TOLERANCE {
                    out.push(format!("finger {}: decode differs (pose {dp:e}, joints {dq:e})", f + 1));
                }
            }
            Err(e) => out.push(format!("finger {}: decode failed: {e}", f + 1)),
        }
    }
    out
}

/// Every invariant violation of an annotation against its object mesh.
pub fn check_annotation(ann: &GraspAnnotation, mesh: &TriangleMesh, hand: &HandModel, tau: f64) -> Vec<String> {
    let mut out = Vec::new();
    if !ann.pose.is_valid(1e-9) {
        out.push("pose: rotation not in SO(3)".into());
    }
    if let Err(e) = ann.joints.validate(hand) {
        out.push(format!("joints: {e}"));
    }
    if !(1..=FINGER_COUNT).contains(&ann.anchor) {
        out.push(format!("anchor: invalid finger {}", ann.anchor));
    }
    if !(ann.epsilon >= tau) {
        out.push(format!("epsilon: {} below threshold {tau}", ann.epsilon));
    }
    let r = hand.fingertip_radius;
    for f in 0..FINGER_COUNT {
        let c = &ann.contacts[f];
        if let Err(e) = c.check() {
            out.push(format!("contact {}: {e}", f + 1));
            continue;
        }
        let d = mesh.min_distance(&c.position);
        if d > SURFACE_TOLERANCE {
            out.push(format!("contact {}: {d:e} m from the surface", f + 1));
        }
        let dc = mesh.min_distance(&(c.position + c.normal * r));
        if (dc - r).abs() > SURFACE_TOLERANCE {
            out.push(format!("contact {}: fingertip center {dc:e} m from the surface", f + 1));
        }
        let g = &ann.compact[f];
        let res = [g.theta_ms, g.theta_m, g.theta_s1, g.theta_s2];
        if res.iter().any(|x| !x.is_finite()) || g.x * g.x + g.y * g.y > 1.0 + 1e-9 {
            out.push(format!("compact {}: projection outside the unit disk", f + 1));
        }
    }
    out.extend(check_decode(ann, hand));
    let penetration = hand_geometry_at(hand, &ann.pose, &ann.joints)
        .iter()
        .flat_map(|m| m.vertices().to_vec())
        .map(|v| mesh.signed_distance(&v))
        .fold(f64::INFINITY, f64::min);
    if penetration < -PENETRATION_TOLERANCE {
        out.push(format!("hand penetrates the object by {:e} m", -penetration));
    }
    out
}
