//! OFF and OBJ readers/writers. Polygonal faces are fan-triangulated.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;

use super::TriangleMesh;
use crate::error::{Error, Result};

/// Loads a mesh by extension (`.off` or `.obj`), multiplying coordinates by `scale`.
pub fn load_mesh(path: &Path, scale: f64) -> Result<TriangleMesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    let mesh = match ext.as_str() {
        "off" => parse_off(&text, path)?,
        "obj" => parse_obj(&text, path)?,
        other => return Err(Error::Format(format!("unsupported mesh extension {other:?} for {}", path.display()))),
    };
    Ok(if scale == 1.0 { mesh } else { mesh.scaled(scale) })
}

fn fan(face: &[u32], out: &mut Vec<[u32; 3]>) {
    for k in 1..face.len().saturating_sub(1) {
        out.push([face[0], face[k], face[k + 1]]);
    }
}

/// Parses OFF text (optionally `NOFF` with per-vertex normals).
pub fn parse_off(text: &str, path: &Path) -> Result<TriangleMesh> {
    // Tokens with their 1-based line numbers, comments stripped.
    let mut tokens = text.lines().enumerate().flat_map(|(ln, line)| {
        let line = line.split('#').next().unwrap_or("");
        line.split_whitespace().map(move |t| (ln + 1, t))
    });
    let (ln, header) = tokens.next().ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    let with_normals = match header {
        "OFF" => false,
        "NOFF" => true,
        _ => return Err(Error::parse(path, ln, format!("expected OFF header, found {header:?}"))),
    };
    let mut next_num = |what: &str| -> Result<(usize, f64)> {
        let (ln, tok) = tokens.next().ok_or_else(|| Error::parse(path, 0, format!("unexpected end of file reading {what}")))?;
        tok.parse::<f64>()
            .map(|v| (ln, v))
            .map_err(|_| Error::parse(path, ln, format!("bad {what} {tok:?}")))
    };
    let (_, nv) = next_num("vertex count")?;
    let (_, nf) = next_num("face count")?;
    let _ = next_num("edge count")?;
    let mut vertices = Vec::with_capacity(nv as usize);
    let mut normals = Vec::new();
    for _ in 0..nv as usize {
        let (_, x) = next_num("vertex")?;
        let (_, y) = next_num("vertex")?;
        let (_, z) = next_num("vertex")?;
        vertices.push(Vector3::new(x, y, z));
        if with_normals {
            let (_, a) = next_num("normal")?;
            let (_, b) = next_num("normal")?;
            let (_, c) = next_num("normal")?;
            normals.push(Vector3::new(a, b, c));
        }
    }
    let mut triangles = Vec::with_capacity(nf as usize);
    for _ in 0..nf as usize {
        let (ln, k) = next_num("face size")?;
        if k < 3.0 || k.fract() != 0.0 {
            return Err(Error::parse(path, ln, format!("face with {k} vertices")));
        }
        let mut face = Vec::with_capacity(k as usize);
        for _ in 0..k as usize {
            let (ln, i) = next_num("face index")?;
            if i < 0.0 || i.fract() != 0.0 || i >= nv {
                return Err(Error::parse(path, ln, format!("face index {i} out of range")));
            }
            face.push(i as u32);
        }
        fan(&face, &mut triangles);
    }
    if with_normals {
        TriangleMesh::with_normals(vertices, triangles, normals)
    } else {
        TriangleMesh::new(vertices, triangles)
    }
}

/// Parses the `v`, `vn` and `f` records of Wavefront OBJ text.
///
/// Normals are used only when every face corner references one and each
/// vertex is paired with a single normal; otherwise they are recomputed.
pub fn parse_obj(text: &str, path: &Path) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut vn = Vec::new();
    let mut triangles = Vec::new();
    let mut corner_normals: Vec<Option<usize>> = Vec::new();
    let mut consistent = true;
    let num = |tok: Option<&str>, ln: usize| -> Result<f64> {
        let tok = tok.ok_or_else(|| Error::parse(path, ln, "missing coordinate"))?;
        tok.parse().map_err(|_| Error::parse(path, ln, format!("bad number {tok:?}")))
    };
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => vertices.push(Vector3::new(num(it.next(), ln)?, num(it.next(), ln)?, num(it.next(), ln)?)),
            Some("vn") => vn.push(Vector3::new(num(it.next(), ln)?, num(it.next(), ln)?, num(it.next(), ln)?)),
            Some("f") => {
                let mut face = Vec::new();
                for corner in it {
                    let mut parts = corner.split('/');
                    let vi = resolve_index(parts.next(), vertices.len(), path, ln)?
                        .ok_or_else(|| Error::parse(path, ln, "face corner without vertex index"))?;
                    let ni = resolve_index(parts.nth(1), vn.len(), path, ln)?;
                    if corner_normals.len() < vertices.len() {
                        corner_normals.resize(vertices.len(), None);
                    }
                    match (corner_normals[vi], ni) {
                        (_, None) => consistent = false,
                        (None, Some(n)) => corner_normals[vi] = Some(n),
                        (Some(a), Some(b)) if a != b => consistent = false,
                        _ => {}
                    }
                    face.push(vi as u32);
                }
                if face.len() < 3 {
                    return Err(Error::parse(path, ln, "face with fewer than 3 vertices"));
                }
                fan(&face, &mut triangles);
            }
            _ => {}
        }
    }
    corner_normals.resize(vertices.len(), None);
    if consistent && !vn.is_empty() && corner_normals.iter().all(Option::is_some) {
        let normals = corner_normals.iter().map(|n| vn[n.unwrap()]).collect();
        TriangleMesh::with_normals(vertices, triangles, normals)
    } else {
        TriangleMesh::new(vertices, triangles)
    }
}

fn resolve_index(tok: Option<&str>, len: usize, path: &Path, ln: usize) -> Result<Option<usize>> {
    let Some(tok) = tok.filter(|t| !t.is_empty()) else {
        return Ok(None);
    };
    let i: i64 = tok.parse().map_err(|_| Error::parse(path, ln, format!("bad index {tok:?}")))?;
    let idx = if i > 0 { i - 1 } else { len as i64 + i };
    if idx < 0 || idx as usize >= len {
        return Err(Error::parse(path, ln, format!("index {i} out of range")));
    }
    Ok(Some(idx as usize))
}

/// Serializes as `NOFF` so normals survive a round trip.
pub fn to_off(mesh: &TriangleMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "NOFF\n{} {} 0", mesh.vertices().len(), mesh.triangles().len());
    for (v, n) in mesh.vertices().iter().zip(mesh.normals()) {
        let _ = writeln!(s, "{:?} {:?} {:?} {:?} {:?} {:?}", v.x, v.y, v.z, n.x, n.y, n.z);
    }
    for t in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    s
}

pub fn save_off(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    std::fs::write(path, to_off(mesh)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::primitives;

    #[test]
    fn off_quad_is_fan_triangulated() {
        let text = "OFF\n# a square\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        let m = parse_off(text, Path::new("q.off")).unwrap();
        assert_eq!(m.triangles(), &[[0, 1, 2], [0, 2, 3]]);
        assert!((m.normals()[0] - Vector3::z()).norm() < 1e-12);
    }

    #[test]
    fn off_errors_carry_line_numbers() {
        let err = parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n", Path::new("bad.off")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 6, .. }), "{err}");
        assert!(parse_off("PLY\n", Path::new("x.off")).is_err());
        assert!(parse_off("OFF\n3 1 0\n0 0 0\n", Path::new("t.off")).is_err());
    }

    #[test]
    fn obj_with_negative_indices_and_slashes() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvt 0 0\nf 1/1 2/1 -2/1 -1/1\n";
        let m = parse_obj(text, Path::new("q.obj")).unwrap();
        assert_eq!(m.triangles().len(), 2);
        assert!(parse_obj("v 0 0 0\nf 1 2 3\n", Path::new("b.obj")).is_err());
    }

    #[test]
    fn noff_round_trip() {
        let c = primitives::cuboid(Vector3::new(1.0, 2.0, 3.0));
        let back = parse_off(&to_off(&c), Path::new("c.off")).unwrap();
        assert_eq!(back.vertices(), c.vertices());
        assert_eq!(back.normals(), c.normals());
        assert_eq!(back.triangles(), c.triangles());
    }
}
