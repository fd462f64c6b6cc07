//! Per-point training targets and reference losses.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::PointCloud;
use crate::hand::FINGER_COUNT;
use crate::synth::GraspAnnotation;

type V3 = Vector3<f64>;

/// Default association radius between cloud points and contacts, meters.
pub const LABEL_RADIUS: f64 = 0.005;
/// Maximum angle between a point normal and the contact normal, degrees.
pub const NORMAL_GATE_DEG: f64 = 30.0;
/// Bin index stored for non-graspable points.
pub const SENTINEL_BIN: u16 = u16::MAX;

/// Uniform bins over `[lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinSpec {
    pub lo: f64,
    pub hi: f64,
    pub n_bins: usize,
}

impl BinSpec {
    pub fn new(lo: f64, hi: f64, n_bins: usize) -> Result<Self> {
        let s = Self { lo, hi, n_bins };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.hi > self.lo) {
            return Err(Error::invalid("bin spec", format!("need lo < hi, got [{}, {}]", self.lo, self.hi)));
        }
        if self.n_bins == 0 || self.n_bins >= SENTINEL_BIN as usize {
            return Err(Error::invalid("bin spec", format!("bin count {} out of range", self.n_bins)));
        }
        Ok(())
    }

    /// Bin width φ.
    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.n_bins as f64
    }
}

/// Bin index and residual of `theta`; the residual is in bin widths from the bin center.
pub fn encode_joint(theta: f64, spec: &BinSpec) -> Result<(usize, f64)> {
    if !(theta >= spec.lo && theta < spec.hi) {
        return Err(Error::Domain(format!("angle {theta} outside [{}, {})", spec.lo, spec.hi)));
    }
    let phi = spec.width();
    let t = theta - spec.lo;
    let bin = ((t / phi).floor() as usize).min(spec.n_bins - 1);
    let res = (t - (bin as f64 * phi + phi / 2.0)) / phi;
    // Rounding at a bin edge can push the residual just outside its range.
    Ok((bin, res.clamp(-0.5, 0.5 - f64::EPSILON)))
}

/// Like [`encode_joint`], but the closed upper end `hi` maps into the last bin.
pub fn encode_joint_clamped(theta: f64, spec: &BinSpec) -> Result<(usize, f64)> {
    if theta == spec.hi {
        return Ok((spec.n_bins - 1, 0.5 - f64::EPSILON));
    }
    encode_joint(theta, spec)
}

pub fn decode_joint(bin: usize, res: f64, spec: &BinSpec) -> Result<f64> {
    if bin >= spec.n_bins {
        return Err(Error::Domain(format!("bin {bin} out of {} bins", spec.n_bins)));
    }
    if !(-0.5..=0.5).contains(&res) {
        return Err(Error::Domain(format!("residual {res} outside [-0.5, 0.5]")));
    }
    let phi = spec.width();
    Ok(spec.lo + bin as f64 * phi + phi / 2.0 + res * phi)
}

/// Bin layouts of the four encoded joints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabelSpecs {
    /// Anchor finger's inner joint.
    pub main: BinSpec,
    /// Spread joint.
    pub spread: BinSpec,
    /// The two supporting inner joints.
    pub support: [BinSpec; 2],
}

impl Default for LabelSpecs {
    /// 12 bins over [0, 7π/9] and [0, π]; 8 bins over [0, 7π/9] for each supporting joint.
    fn default() -> Self {
        let inner = 7.0 * PI / 9.0;
        Self {
            main: BinSpec { lo: 0.0, hi: inner, n_bins: 12 },
            spread: BinSpec { lo: 0.0, hi: PI, n_bins: 12 },
            support: [BinSpec { lo: 0.0, hi: inner, n_bins: 8 }; 2],
        }
    }
}

impl LabelSpecs {
    /// Specs in storage order: θ_m, θ_ms, θ_s1, θ_s2.
    pub fn ordered(&self) -> [BinSpec; 4] {
        [self.main, self.spread, self.support[0], self.support[1]]
    }
}

/// Training targets of one cloud point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointLabel {
    pub graspable: bool,
    /// 1-based finger id; 0 when not graspable.
    pub finger: u8,
    pub x: f64,
    pub y: f64,
    /// `(bin, res)` of θ_m, θ_ms, θ_s1, θ_s2; [`SENTINEL_BIN`] when not graspable.
    pub joints: [(u16, f64); 4],
}

impl PointLabel {
    pub const NONE: Self = Self { graspable: false, finger: 0, x: 0.0, y: 0.0, joints: [(SENTINEL_BIN, 0.0); 4] };
}

struct ContactTarget {
    position: V3,
    normal: V3,
    label: PointLabel,
}

fn contact_targets(annotations: &[GraspAnnotation], specs: &LabelSpecs) -> Result<Vec<ContactTarget>> {
    let ordered = specs.ordered();
    let mut out = Vec::with_capacity(annotations.len() * FINGER_COUNT);
    for a in annotations {
        for f in 0..FINGER_COUNT {
            let g = &a.compact[f];
            let values = [g.theta_m, g.theta_ms, g.theta_s1, g.theta_s2];
            let mut joints = [(0u16, 0.0); 4];
            for k in 0..4 {
                let (bin, res) = encode_joint_clamped(values[k], &ordered[k])?;
                joints[k] = (bin as u16, res);
            }
            out.push(ContactTarget {
                position: a.contacts[f].position,
                normal: a.contacts[f].normal,
                label: PointLabel { graspable: true, finger: (f + 1) as u8, x: g.x, y: g.y, joints },
            });
        }
    }
    Ok(out)
}

fn cell_of(p: &V3, size: f64) -> (i64, i64, i64) {
    ((p.x / size).floor() as i64, (p.y / size).floor() as i64, (p.z / size).floor() as i64)
}

/// Labels every cloud point from the nearest annotation contact within
/// `radius` whose normal agrees with the point normal; ties go to the earlier
/// contact (annotation order, then finger order).
pub fn label_points(
    cloud: &PointCloud,
    annotations: &[GraspAnnotation],
    radius: f64,
    specs: &LabelSpecs,
) -> Result<Vec<PointLabel>> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("label radius", format!("{radius} must be positive")));
    }
    for s in specs.ordered() {
        s.validate()?;
    }
    let targets = contact_targets(annotations, specs)?;
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, t) in targets.iter().enumerate() {
        grid.entry(cell_of(&t.position, radius)).or_default().push(i);
    }
    let cos_gate = NORMAL_GATE_DEG.to_radians().cos();
    Ok(cloud
        .points
        .par_iter()
        .map(|p| {
            let (cx, cy, cz) = cell_of(&p.position, radius);
            let mut best: Option<(f64, usize)> = None;
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        let Some(ids) = grid.get(&(cx + dx, cy + dy, cz + dz)) else { continue };
                        for &i in ids {
                            let t = &targets[i];
                            let d = (t.position - p.position).norm();
                            if d > radius || p.normal.dot(&t.normal) < cos_gate {
                                continue;
                            }
                            if best.is_none_or(|(bd, bi)| d < bd || (d == bd && i < bi)) {
                                best = Some((d, i));
                            }
                        }
                    }
                }
            }
            best.map_or(PointLabel::NONE, |(_, i)| targets[i].label)
        })
        .collect())
}

/// Weights of the total loss.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub gamma_m: f64,
    pub gamma_ms: f64,
    pub gamma_s: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { alpha: 1.0, beta: 5.0, gamma: 5.0, gamma_m: 1.0, gamma_ms: 1.0, gamma_s: 1.0 }
    }
}

/// Bin probabilities and residuals of one joint head, per point.
#[derive(Clone, Debug, PartialEq)]
pub struct JointHead {
    pub bin_probs: Vec<Vec<f64>>,
    pub res: Vec<f64>,
}

/// Network outputs for one cloud.
#[derive(Clone, Debug, PartialEq)]
pub struct Predictions {
    /// `[P(not graspable), P(graspable)]` per point.
    pub graspable: Vec<[f64; 2]>,
    pub projection: Vec<[f64; 2]>,
    /// Heads for θ_m, θ_ms, θ_s1, θ_s2.
    pub joints: [JointHead; 4],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Losses {
    pub gp: f64,
    pub fp: f64,
    pub m: f64,
    pub ms: f64,
    /// Sum of both supporting-joint losses.
    pub s: f64,
    pub total: f64,
}

/// `−ln p[target]`.
pub fn cross_entropy(probs: &[f64], target: usize) -> f64 {
    -probs[target].ln()
}

/// Huber loss with unit transition.
pub fn smooth_l1(err: f64) -> f64 {
    let a = err.abs();
    if a < 1.0 {
        0.5 * a * a
    } else {
        a - 0.5
    }
}

fn check_probs(p: &[f64], what: &str) -> Result<()> {
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-6 || p.iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::Shape(format!("{what} probabilities sum to {sum}")));
    }
    Ok(())
}

/// Evaluates every loss term against `targets`. Projection and joint terms
/// average over graspable points only; the projection error is the Euclidean
/// norm of the `(x, y)` difference.
pub fn loss_suite(pred: &Predictions, targets: &[PointLabel], weights: &LossWeights) -> Result<Losses> {
    let n = targets.len();
    let shape = |what: &str, len: usize| -> Result<()> {
        if len != n {
            return Err(Error::Shape(format!("{what} has {len} entries for {n} targets")));
        }
        Ok(())
    };
    shape("graspable", pred.graspable.len())?;
    shape("projection", pred.projection.len())?;
    for h in &pred.joints {
        shape("joint bins", h.bin_probs.len())?;
        shape("joint residuals", h.res.len())?;
    }

    let mut gp = 0.0;
    for (p, t) in pred.graspable.iter().zip(targets) {
        check_probs(p, "graspable")?;
        gp += cross_entropy(p, t.graspable as usize);
    }
    let gp = if n > 0 { gp / n as f64 } else { 0.0 };

    let contacts: Vec<usize> = (0..n).filter(|&i| targets[i].graspable).collect();
    let nc = contacts.len();
    let mean = |sum: f64| if nc > 0 { sum / nc as f64 } else { 0.0 };
    let fp = mean(
        contacts
            .iter()
            .map(|&i| {
                let [x, y] = pred.projection[i];
                ((x - targets[i].x).powi(2) + (y - targets[i].y).powi(2)).sqrt()
            })
            .sum(),
    );
    let mut joint = [0.0; 4];
    for (k, head) in pred.joints.iter().enumerate() {
        let mut sum = 0.0;
        for &i in &contacts {
            let (bin, res) = targets[i].joints[k];
            let probs = &head.bin_probs[i];
            if bin as usize >= probs.len() {
                return Err(Error::Shape(format!("bin {bin} beyond {} predicted bins", probs.len())));
            }
            check_probs(probs, "bin")?;
            sum += cross_entropy(probs, bin as usize) + smooth_l1(head.res[i] - res);
        }
        joint[k] = mean(sum);
    }
    let (m, ms, s) = (joint[0], joint[1], joint[2] + joint[3]);
    let total = weights.alpha * gp
        + weights.beta * fp
        + weights.gamma * (weights.gamma_m * m + weights.gamma_ms * ms + weights.gamma_s * s);
    Ok(Losses { gp, fp, m, ms, s, total })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bin_center_has_zero_residual() {
        let s = BinSpec::new(0.0, 7.0 * PI / 9.0, 5).unwrap();
        assert_eq!(encode_joint(s.width() / 2.0, &s).unwrap(), (0, 0.0));
        let (bin, res) = encode_joint(1.0, &s).unwrap();
        assert_eq!(bin, 2);
        assert!((res + 0.4537).abs() < 1e-4);
        assert!((decode_joint(bin, res, &s).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_angles_rejected() {
        let s = BinSpec::new(0.0, 1.0, 4).unwrap();
        assert!(encode_joint(1.0, &s).is_err());
        assert!(encode_joint(-1e-9, &s).is_err());
        assert!(decode_joint(4, 0.0, &s).is_err());
        assert!(decode_joint(0, 0.6, &s).is_err());
        assert_eq!(encode_joint_clamped(1.0, &s).unwrap().0, 3);
        assert!(BinSpec::new(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn smooth_l1_pieces() {
        assert_eq!(smooth_l1(0.5), 0.125);
        assert_eq!(smooth_l1(-2.0), 1.5);
    }
}
