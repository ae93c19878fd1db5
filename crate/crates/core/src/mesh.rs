//! Triangular meshes of polygonal domains.
//!
//! Structured meshes of rectangles are generated on an `(n+1) x (n+1)` vertex
//! grid numbered row-major, so interior degrees of freedom inherit a bandwidth
//! of about `n`. General triangulations enter through [`Mesh::from_parts`].

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{floor, hypot, sqrt};

pub type Point = [f64; 2];

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub const UNIT_SQUARE: Rect = Rect { x0: 0.0, y0: 0.0, x1: 1.0, y1: 1.0 };

    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        let r = Rect { x0, y0, x1, y1 };
        r.validate()?;
        Ok(r)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn scaled(&self, s: f64) -> Rect {
        Rect { x0: self.x0 * s, y0: self.y0 * s, x1: self.x1 * s, y1: self.y1 * s }
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.x0, self.y0, self.x1, self.y1].iter().all(|v| v.is_finite());
        if !finite || !(self.x1 > self.x0) || !(self.y1 > self.y0) {
            return Err(Error::invalid("degenerate rectangle"));
        }
        Ok(())
    }
}

/// How each grid cell of a structured mesh is split into triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CellPattern {
    /// Two triangles separated by the lower-left to upper-right diagonal.
    #[default]
    Diagonal,
    /// Two triangles separated by the lower-right to upper-left diagonal.
    AntiDiagonal,
    /// Four triangles meeting at an added cell-center vertex.
    CrissCross,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    h: f64,
    reoriented: usize,
}

/// Twice the signed area of `(a, b, c)`.
pub fn signed_area2(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
}

impl Mesh {
    /// Structured mesh of `rect` with `n` cells per side, split by the default
    /// diagonal.
    pub fn uniform(n: usize, rect: Rect) -> Result<Mesh> {
        Self::uniform_with_pattern(n, rect, CellPattern::Diagonal)
    }

    pub fn uniform_with_pattern(n: usize, rect: Rect, pattern: CellPattern) -> Result<Mesh> {
        if n == 0 {
            return Err(Error::invalid("grid count n must be at least 1"));
        }
        rect.validate()?;
        let side = n + 1;
        let mut vertices = Vec::with_capacity(side * side);
        let mut boundary = Vec::with_capacity(side * side);
        for j in 0..side {
            for i in 0..side {
                vertices.push(grid_point(&rect, n, i, j));
                boundary.push(i == 0 || j == 0 || i == n || j == n);
            }
        }
        let id = |i: usize, j: usize| j * side + i;
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (ll, lr, ur, ul) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                match pattern {
                    CellPattern::Diagonal => {
                        triangles.push([ll, lr, ur]);
                        triangles.push([ll, ur, ul]);
                    }
                    CellPattern::AntiDiagonal => {
                        triangles.push([ll, lr, ul]);
                        triangles.push([lr, ur, ul]);
                    }
                    CellPattern::CrissCross => {
                        let c = vertices.len();
                        let (a, b) = (vertices[ll], vertices[ur]);
                        vertices.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
                        boundary.push(false);
                        triangles.push([ll, lr, c]);
                        triangles.push([lr, ur, c]);
                        triangles.push([ur, ul, c]);
                        triangles.push([ul, ll, c]);
                    }
                }
            }
        }
        // Reported mesh size is the axis edge length, 1/n on the unit square.
        let h = rect.width().max(rect.height()) / n as f64;
        Ok(Mesh { vertices, triangles, boundary, h, reoriented: 0 })
    }

    /// Builds a mesh from raw parts, validating indices and element areas.
    ///
    /// Clockwise triangles are reoriented; the count is available from
    /// [`Mesh::reoriented_count`]. `h` is the longest edge length.
    pub fn from_parts(vertices: Vec<Point>, mut triangles: Vec<[usize; 3]>, boundary: Vec<bool>) -> Result<Mesh> {
        if boundary.len() != vertices.len() {
            return Err(Error::InvalidMesh(format!(
                "{} boundary flags for {} vertices",
                boundary.len(),
                vertices.len()
            )));
        }
        if vertices.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::InvalidMesh("non-finite vertex coordinate".into()));
        }
        let nv = vertices.len();
        let mut reoriented = 0;
        for (t, tri) in triangles.iter_mut().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&v| v >= nv) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} references vertex {bad}, but there are only {nv} vertices"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!("triangle {t} repeats a vertex")));
            }
            let a2 = signed_area2(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if a2 == 0.0 {
                return Err(Error::DegenerateElement { triangle: t });
            }
            if a2 < 0.0 {
                tri.swap(1, 2);
                reoriented += 1;
            }
        }
        let mut mesh = Mesh { vertices, triangles, boundary, h: 0.0, reoriented };
        mesh.h = mesh.longest_edge();
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of clockwise triangles flipped by [`Mesh::from_parts`].
    pub fn reoriented_count(&self) -> usize {
        self.reoriented
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_interior(&self) -> usize {
        self.boundary.iter().filter(|&&b| !b).count()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * signed_area2(a, b, c)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn longest_edge(&self) -> f64 {
        let mut h: f64 = 0.0;
        for tri in &self.triangles {
            for k in 0..3 {
                let (p, q) = (self.vertices[tri[k]], self.vertices[tri[(k + 1) % 3]]);
                h = h.max(hypot(q[0] - p[0], q[1] - p[1]));
            }
        }
        h
    }

    /// Unique undirected edges with the number of triangles sharing each.
    pub fn edges(&self) -> BTreeMap<(usize, usize), usize> {
        let mut edges = BTreeMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                *edges.entry(edge_key(tri[k], tri[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        edges
    }

    /// Structural checks: positive areas, manifold edges, and boundary flags
    /// that agree with the boundary edges.
    pub fn check(&self) -> Result<()> {
        for t in 0..self.triangles.len() {
            if !(self.triangle_area(t) > 0.0) {
                return Err(Error::DegenerateElement { triangle: t });
            }
        }
        let mut on_boundary = vec![false; self.vertices.len()];
        for (&(a, b), &count) in &self.edges() {
            match count {
                1 => {
                    on_boundary[a] = true;
                    on_boundary[b] = true;
                }
                2 => {}
                _ => return Err(Error::InvalidMesh(format!("edge ({a}, {b}) shared by {count} triangles"))),
            }
        }
        if let Some(v) = (0..self.vertices.len()).find(|&v| on_boundary[v] != self.boundary[v]) {
            return Err(Error::InvalidMesh(format!("boundary flag of vertex {v} disagrees with the edge structure")));
        }
        Ok(())
    }

    /// Splits every triangle into four through its edge midpoints.
    ///
    /// Original vertices keep their indices; midpoints follow in edge order.
    /// Midpoints of boundary edges are flagged as boundary.
    pub fn refine_uniform(&self) -> Mesh {
        let edges = self.edges();
        let mut vertices = self.vertices.clone();
        let mut boundary = self.boundary.clone();
        let mut midpoint = BTreeMap::new();
        for (&(a, b), &count) in &edges {
            let (p, q) = (self.vertices[a], self.vertices[b]);
            midpoint.insert((a, b), vertices.len());
            vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
            boundary.push(count == 1);
        }
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let ab = midpoint[&edge_key(a, b)];
            let bc = midpoint[&edge_key(b, c)];
            let ca = midpoint[&edge_key(c, a)];
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        Mesh { vertices, triangles, boundary, h: 0.5 * self.h, reoriented: 0 }
    }

    /// Bucket-grid point locator over this mesh.
    pub fn locator(&self) -> PointLocator<'_> {
        PointLocator::new(self)
    }
}

fn grid_point(rect: &Rect, n: usize, i: usize, j: usize) -> Point {
    let x = if i == n { rect.x1 } else { rect.x0 + rect.width() * (i as f64 / n as f64) };
    let y = if j == n { rect.y1 } else { rect.y0 + rect.height() * (j as f64 / n as f64) };
    [x, y]
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Barycentric coordinates of `p` in triangle `(a, b, c)`.
pub fn barycentric(p: Point, [a, b, c]: [Point; 3]) -> [f64; 3] {
    let det = signed_area2(a, b, c);
    let l1 = signed_area2(p, b, c) / det;
    let l2 = signed_area2(a, p, c) / det;
    [l1, l2, 1.0 - l1 - l2]
}

/// Finds the triangle containing a point. Triangles are binned by bounding
/// box into a uniform grid of roughly one bucket per triangle.
pub struct PointLocator<'a> {
    mesh: &'a Mesh,
    origin: Point,
    cell: [f64; 2],
    dims: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl<'a> PointLocator<'a> {
    fn new(mesh: &'a Mesh) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &mesh.vertices {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let side = (sqrt(mesh.triangles.len() as f64) as usize).max(1);
        let dims = [side, side];
        let cell = [((hi[0] - lo[0]) / side as f64).max(f64::MIN_POSITIVE), ((hi[1] - lo[1]) / side as f64).max(f64::MIN_POSITIVE)];
        let mut loc = PointLocator { mesh, origin: lo, cell, dims, buckets: vec![Vec::new(); side * side] };
        for t in 0..mesh.triangles.len() {
            let pts = mesh.triangle_points(t);
            let (mut bl, mut bh) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for p in pts {
                for d in 0..2 {
                    bl[d] = bl[d].min(p[d]);
                    bh[d] = bh[d].max(p[d]);
                }
            }
            let (i0, j0) = loc.bucket_of(bl);
            let (i1, j1) = loc.bucket_of(bh);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    loc.buckets[j * dims[0] + i].push(t);
                }
            }
        }
        loc
    }

    fn bucket_of(&self, p: Point) -> (usize, usize) {
        let clamp = |v: f64, d: usize| {
            let k = floor((v - self.origin[d]) / self.cell[d]);
            if k < 0.0 {
                0
            } else {
                (k as usize).min(self.dims[d] - 1)
            }
        };
        (clamp(p[0], 0), clamp(p[1], 1))
    }

    /// Triangle containing `p` with its barycentric coordinates, or `None`
    /// when `p` lies outside the mesh (beyond a small tolerance).
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        let (i, j) = self.bucket_of(p);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in &self.buckets[j * self.dims[0] + i] {
            let lam = barycentric(p, self.mesh.triangle_points(t));
            let worst = lam.iter().cloned().fold(f64::INFINITY, f64::min);
            if worst >= 0.0 {
                return Some((t, lam));
            }
            if best.is_none_or(|b| worst > b.2) {
                best = Some((t, lam, worst));
            }
        }
        best.filter(|b| b.2 > -1e-10).map(|b| (b.0, b.1))
    }

    /// Evaluates the piecewise linear function with nodal `values` at `p`.
    pub fn eval_p1(&self, values: &[f64], p: Point) -> Option<f64> {
        self.locate(p).map(|(t, lam)| {
            let tri = self.mesh.triangles[t];
            (0..3).map(|k| lam[k] * values[tri[k]]).sum()
        })
    }
}
