use anyhow::{bail, Context, Result};
use contact_grasp::geom::RigidTransform3;
use contact_grasp::scene::VirtualCamera;
use nalgebra::Vector3;

/// Parses a `--camera` value:
///
/// * `random:<seed>[:<index>]`: seeded viewpoint on the default hemisphere
/// * `identity`: default intrinsics at the world origin looking along `+z`
/// * `look:<ex>,<ey>,<ez>,<tx>,<ty>,<tz>`: default intrinsics, eye looking at a target
/// * `pose:<16 comma-separated values>`: default intrinsics, row-major camera pose
///
/// Any form may be followed by `@fx,fy,cx,cy,width,height` to replace the intrinsics.
pub fn parse_camera(spec: &str) -> Result<VirtualCamera> {
    let (view, intrinsics) = match spec.split_once('@') {
        Some((v, i)) => (v, Some(i)),
        None => (spec, None),
    };
    let mut cam = if let Some(rest) = view.strip_prefix("random:") {
        let mut parts = rest.split(':');
        let seed: u64 = parts.next().unwrap_or("").parse().context("random camera seed")?;
        let index: u64 = match parts.next() {
            Some(i) => i.parse().context("random camera index")?,
            None => 0,
        };
        VirtualCamera::random(seed, index)
    } else if view == "identity" {
        VirtualCamera::with_default_intrinsics(RigidTransform3::identity())
    } else if let Some(rest) = view.strip_prefix("look:") {
        let v = floats(rest, 6)?;
        let pose = VirtualCamera::look_at_pose(&Vector3::new(v[0], v[1], v[2]), &Vector3::new(v[3], v[4], v[5]))?;
        VirtualCamera::with_default_intrinsics(pose)
    } else if let Some(rest) = view.strip_prefix("pose:") {
        VirtualCamera::with_default_intrinsics(RigidTransform3::from_row_major(&floats(rest, 16)?, 1e-9)?)
    } else {
        bail!("unknown camera spec {spec:?}; expected random:<seed>, identity, look:... or pose:...");
    };
    if let Some(i) = intrinsics {
        let v = floats(i, 6)?;
        if v[4].fract() != 0.0 || v[5].fract() != 0.0 || v[4] < 1.0 || v[5] < 1.0 {
            bail!("image size must be positive integers");
        }
        cam = VirtualCamera::new(v[0], v[1], v[2], v[3], v[4] as u32, v[5] as u32, cam.pose)?;
    }
    Ok(cam)
}

fn floats(s: &str, n: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = s.split(',').map(|t| t.trim().parse::<f64>()).collect::<Result<_, _>>().with_context(|| format!("bad number in {s:?}"))?;
    if v.len() != n {
        bail!("expected {n} comma-separated values, found {}", v.len());
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_forms() {
        assert_eq!(parse_camera("identity").unwrap().pose, RigidTransform3::identity());
        assert_eq!(parse_camera("random:4:2").unwrap(), VirtualCamera::random(4, 2));
        let c = parse_camera("look:0,0,1,0,0.5,0@300,300,80,60,160,120").unwrap();
        assert_eq!((c.width, c.height, c.fx), (160, 120, 300.0));
        assert!(parse_camera("random:x").is_err());
        assert!(parse_camera("orbit").is_err());
    }
}
