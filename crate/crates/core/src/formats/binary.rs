//! Little-endian depth (`CMGD`) and label (`CMGL`) files.

use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geom::{OrientedPoint3, PointCloud};
use crate::labels::PointLabel;
use crate::scene::DepthMap;

pub const DEPTH_MAGIC: &[u8; 4] = b"CMGD";
pub const LABEL_MAGIC: &[u8; 4] = b"CMGL";

/// Bytes of one label record.
pub const LABEL_RECORD: usize = 6 * 4 + 2 + 2 * 4 + 4 * (2 + 4);

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let bytes = self
            .data
            .get(self.pos..end)
            .ok_or_else(|| Error::Format(format!("truncated file: needed {end} bytes, have {}", self.data.len())))?;
        self.pos = end;
        Ok(bytes.try_into().expect("slice of length N"))
    }

    fn u32(&mut self) -> Result<u32> {
        self.take().map(u32::from_le_bytes)
    }

    fn u16(&mut self) -> Result<u16> {
        self.take().map(u16::from_le_bytes)
    }

    fn u8(&mut self) -> Result<u8> {
        self.take::<1>().map(|b| b[0])
    }

    fn f32(&mut self) -> Result<f32> {
        self.take().map(f32::from_le_bytes)
    }

    fn magic(&mut self, want: &[u8; 4]) -> Result<()> {
        let got = self.take::<4>()?;
        if &got != want {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(&got),
                String::from_utf8_lossy(want)
            )));
        }
        Ok(())
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.data.len() {
            return Err(Error::Format(format!("{} trailing bytes", self.data.len() - self.pos)));
        }
        Ok(())
    }
}

pub fn encode_depth(depth: &DepthMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 4 * depth.data.len());
    out.extend_from_slice(DEPTH_MAGIC);
    out.extend_from_slice(&depth.width.to_le_bytes());
    out.extend_from_slice(&depth.height.to_le_bytes());
    for &d in &depth.data {
        out.extend_from_slice(&(d as f32).to_le_bytes());
    }
    out
}

pub fn decode_depth(data: &[u8]) -> Result<DepthMap> {
    let mut r = Reader { data, pos: 0 };
    r.magic(DEPTH_MAGIC)?;
    let (width, height) = (r.u32()?, r.u32()?);
    let n = width as usize * height as usize;
    if data.len() != 12 + 4 * n {
        return Err(Error::Format(format!("depth payload of {} bytes does not match {width}×{height}", data.len() - 12)));
    }
    let data = (0..n).map(|_| r.f32().map(f64::from)).collect::<Result<_>>()?;
    r.finish()?;
    Ok(DepthMap { width, height, data })
}

/// Label records pair each cloud point with its targets.
pub fn encode_labels(cloud: &PointCloud, labels: &[PointLabel]) -> Result<Vec<u8>> {
    if cloud.len() != labels.len() {
        return Err(Error::Shape(format!("{} points but {} labels", cloud.len(), labels.len())));
    }
    let count = u32::try_from(labels.len()).map_err(|_| Error::Format("too many points".into()))?;
    let mut out = Vec::with_capacity(8 + LABEL_RECORD * labels.len());
    out.extend_from_slice(LABEL_MAGIC);
    out.extend_from_slice(&count.to_le_bytes());
    let f = |out: &mut Vec<u8>, x: f64| out.extend_from_slice(&(x as f32).to_le_bytes());
    for (p, l) in cloud.points.iter().zip(labels) {
        for &x in p.position.iter().chain(p.normal.iter()) {
            f(&mut out, x);
        }
        out.push(l.graspable as u8);
        out.push(l.finger);
        f(&mut out, l.x);
        f(&mut out, l.y);
        for &(bin, res) in &l.joints {
            out.extend_from_slice(&bin.to_le_bytes());
            // Keep residuals just below 0.5 from rounding up to it.
            let r = (res as f32).min(f32::from_bits(0.5f32.to_bits() - 1));
            out.extend_from_slice(&r.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_labels(data: &[u8]) -> Result<(PointCloud, Vec<PointLabel>)> {
    let mut r = Reader { data, pos: 0 };
    r.magic(LABEL_MAGIC)?;
    let count = r.u32()? as usize;
    if data.len() != 8 + LABEL_RECORD * count {
        return Err(Error::Format(format!("label payload of {} bytes does not match {count} records", data.len() - 8)));
    }
    let mut points = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for _ in 0..count {
        let mut v = [0.0f64; 6];
        for x in &mut v {
            *x = r.f32()? as f64;
        }
        let graspable = match r.u8()? {
            0 => false,
            1 => true,
            b => return Err(Error::Format(format!("graspable flag {b} is not 0 or 1"))),
        };
        let finger = r.u8()?;
        let (x, y) = (r.f32()? as f64, r.f32()? as f64);
        let mut joints = [(0u16, 0.0); 4];
        for j in &mut joints {
            *j = (r.u16()?, r.f32()? as f64);
        }
        points.push(OrientedPoint3 {
            position: Vector3::new(v[0], v[1], v[2]),
            normal: Vector3::new(v[3], v[4], v[5]),
        });
        labels.push(PointLabel { graspable, finger, x, y, joints });
    }
    r.finish()?;
    Ok((PointCloud::new(points), labels))
}

pub fn write_depth(path: &Path, depth: &DepthMap) -> Result<()> {
    std::fs::write(path, encode_depth(depth)).map_err(|e| Error::io(path, e))
}

pub fn read_depth(path: &Path) -> Result<DepthMap> {
    decode_depth(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}

pub fn write_labels(path: &Path, cloud: &PointCloud, labels: &[PointLabel]) -> Result<()> {
    std::fs::write(path, encode_labels(cloud, labels)?).map_err(|e| Error::io(path, e))
}

pub fn read_labels(path: &Path) -> Result<(PointCloud, Vec<PointLabel>)> {
    decode_labels(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_layout() {
        let d = DepthMap { width: 2, height: 1, data: vec![0.5, 0.0] };
        let bytes = encode_depth(&d);
        assert_eq!(&bytes[..4], b"CMGD");
        assert_eq!(&bytes[4..12], &[2, 0, 0, 0, 1, 0, 0, 0]);
        assert_eq!(&bytes[12..16], &0.5f32.to_le_bytes());
        assert_eq!(decode_depth(&bytes).unwrap(), d);
        assert!(decode_depth(&bytes[..15]).is_err());
    }

    #[test]
    fn label_round_trip() {
        let cloud = PointCloud::new(vec![OrientedPoint3 { position: Vector3::new(0.25, 0.5, 1.0), normal: Vector3::z() }]);
        let labels = vec![PointLabel { graspable: true, finger: 2, x: 0.5, y: -0.25, joints: [(3, 0.125); 4] }];
        let bytes = encode_labels(&cloud, &labels).unwrap();
        assert_eq!(bytes.len(), 8 + LABEL_RECORD);
        let (c, l) = decode_labels(&bytes).unwrap();
        assert_eq!((c, l), (cloud, labels));
        assert!(decode_labels(&bytes[..bytes.len() - 1]).is_err());
    }
}
