//! Line-based mesh files.
//!
//! ```text
//! nv nt
//! x y flag        (nv lines, flag 1 on the boundary)
//! i j k           (nt lines, 0-based vertex indices)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use fhsim_core::Mesh;

use crate::error::{Error, Result};

/// Text of `mesh` in the mesh file format. Coordinates use the shortest
/// representation that reads back to the same `f64`.
pub fn format_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", mesh.num_vertices(), mesh.num_triangles());
    for (p, &b) in mesh.vertices().iter().zip(mesh.boundary_flags()) {
        let _ = writeln!(s, "{} {} {}", p[0], p[1], u8::from(b));
    }
    for t in mesh.triangles() {
        let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
    }
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank line split into fields, with its 1-based number.
    fn next_fields(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if !fields.is_empty() {
                return Some((i + 1, fields));
            }
        }
        None
    }
}

fn field<T: std::str::FromStr>(line: usize, text: &str, what: &str) -> Result<T> {
    text.parse().map_err(|_| Error::parse(line, format!("invalid {what} `{text}`")))
}

fn expect_len(line: usize, fields: &[&str], n: usize, what: &str) -> Result<()> {
    if fields.len() != n {
        return Err(Error::parse(line, format!("expected {n} fields for {what}, found {}", fields.len())));
    }
    Ok(())
}

/// Parses a mesh file. Clockwise triangles are accepted and reoriented; see
/// [`Mesh::reoriented_count`].
pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
    let (l, header) = lines.next_fields().ok_or_else(|| Error::parse(1, "empty mesh file"))?;
    expect_len(l, &header, 2, "the header")?;
    let nv: usize = field(l, header[0], "vertex count")?;
    let nt: usize = field(l, header[1], "triangle count")?;

    let mut vertices = Vec::with_capacity(nv);
    let mut boundary = Vec::with_capacity(nv);
    for k in 0..nv {
        let (l, f) = lines
            .next_fields()
            .ok_or_else(|| Error::parse(lines.last + 1, format!("expected {nv} vertices, found {k}")))?;
        expect_len(l, &f, 3, "a vertex")?;
        let x: f64 = field(l, f[0], "coordinate")?;
        let y: f64 = field(l, f[1], "coordinate")?;
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::parse(l, "non-finite coordinate"));
        }
        boundary.push(match f[2] {
            "0" => false,
            "1" => true,
            other => return Err(Error::parse(l, format!("boundary flag must be 0 or 1, found `{other}`"))),
        });
        vertices.push([x, y]);
    }

    let mut triangles = Vec::with_capacity(nt);
    for k in 0..nt {
        let (l, f) = lines
            .next_fields()
            .ok_or_else(|| Error::parse(lines.last + 1, format!("expected {nt} triangles, found {k}")))?;
        expect_len(l, &f, 3, "a triangle")?;
        triangles.push([field(l, f[0], "vertex index")?, field(l, f[1], "vertex index")?, field(l, f[2], "vertex index")?]);
    }
    if let Some((l, _)) = lines.next_fields() {
        return Err(Error::parse(l, "unexpected content after the last triangle"));
    }
    Ok(Mesh::from_parts(vertices, triangles, boundary)?)
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mesh(&text)
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_mesh(mesh)).map_err(|e| Error::io(path, e))
}
