use std::fmt::Write;

use super::{MeshError, SimplicialMesh};

pub(super) fn write(mesh: &SimplicialMesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "simplicial-mesh 1");
    let _ = writeln!(out, "ambient {}", mesh.ambient);
    let _ = writeln!(out, "dim {}", mesh.dim);
    let _ = writeln!(out, "oriented {}", u8::from(mesh.oriented));
    let _ = writeln!(out, "vertices {}", mesh.vertex_count());
    for v in mesh.vertices() {
        let line: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    let _ = writeln!(out, "simplices {}", mesh.simplex_count());
    for (s, cell) in mesh.simplices().enumerate() {
        let _ = write!(out, "{}", mesh.signs[s]);
        for i in cell {
            let _ = write!(out, " {i}");
        }
        out.push('\n');
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<(usize, &'a str), MeshError> {
        for (i, line) in self.inner.by_ref() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            self.last = i + 1;
            return Ok((i + 1, t));
        }
        Err(MeshError::Format { line: self.last + 1, message: "unexpected end of input".into() })
    }

    fn header(&mut self, key: &str) -> Result<usize, MeshError> {
        let (no, line) = self.next_line()?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(MeshError::Format { line: no, message: format!("expected `{key} <value>`") });
        }
        let value = parts
            .next()
            .and_then(|v| v.parse::<usize>().ok())
            .ok_or_else(|| MeshError::Format { line: no, message: format!("`{key}` needs a non-negative integer") })?;
        if parts.next().is_some() {
            return Err(MeshError::Format { line: no, message: "trailing tokens".into() });
        }
        Ok(value)
    }
}

pub(super) fn read(text: &str) -> Result<SimplicialMesh, MeshError> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
    let version = lines.header("simplicial-mesh")?;
    if version != 1 {
        return Err(MeshError::Format { line: lines.last, message: format!("unsupported version {version}") });
    }
    let ambient = lines.header("ambient")?;
    let dim = lines.header("dim")?;
    let oriented = match lines.header("oriented")? {
        0 => false,
        1 => true,
        _ => return Err(MeshError::Format { line: lines.last, message: "`oriented` must be 0 or 1".into() }),
    };
    if ambient == 0 || dim > ambient {
        return Err(MeshError::Format { line: lines.last, message: "need ambient >= 1 and dim <= ambient".into() });
    }
    let nv = lines.header("vertices")?;
    let mut coords = Vec::with_capacity(nv * ambient);
    for _ in 0..nv {
        let (no, line) = lines.next_line()?;
        let row: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
        let row = row.map_err(|e| MeshError::Format { line: no, message: e.to_string() })?;
        if row.len() != ambient {
            return Err(MeshError::Format { line: no, message: format!("expected {ambient} coordinates, found {}", row.len()) });
        }
        coords.extend(row);
    }
    let ns = lines.header("simplices")?;
    let mut cells = Vec::with_capacity(ns * (dim + 1));
    let mut signs = Vec::with_capacity(ns);
    for _ in 0..ns {
        let (no, line) = lines.next_line()?;
        let mut parts = line.split_whitespace();
        let sign: i64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| MeshError::Format { line: no, message: "missing sign".into() })?;
        if sign != 1 && sign != -1 {
            return Err(MeshError::Format { line: no, message: format!("sign must be +1 or -1, found {sign}") });
        }
        let idx: Result<Vec<usize>, _> = parts.map(str::parse::<usize>).collect();
        let idx = idx.map_err(|e| MeshError::Format { line: no, message: e.to_string() })?;
        if idx.len() != dim + 1 {
            return Err(MeshError::Format { line: no, message: format!("expected {} indices, found {}", dim + 1, idx.len()) });
        }
        signs.push(sign as i8);
        cells.extend(idx);
    }
    if let Some((i, line)) = lines.inner.find(|(_, l)| !l.trim().is_empty() && !l.trim().starts_with('#')) {
        return Err(MeshError::Format { line: i + 1, message: format!("trailing content `{}`", line.trim()) });
    }
    SimplicialMesh::new(ambient, dim, coords, cells, signs, oriented)
}
