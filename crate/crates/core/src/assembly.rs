//! P1 Galerkin matrices with Dirichlet elimination, and the L2 projection.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linsolve::Factorization;
use crate::mesh::{signed_area2, Mesh, Point};
use crate::sparse::CsrMatrix;

pub type Local = [[f64; 3]; 3];

/// Element stiffness `∫ ∇φ_i·∇φ_j` and consistent mass `∫ φ_i φ_j` on one
/// triangle. Either orientation is accepted.
pub fn local_matrices(p1: Point, p2: Point, p3: Point) -> Result<(Local, Local)> {
    let det = signed_area2(p1, p2, p3);
    if det == 0.0 || !det.is_finite() {
        return Err(Error::DegenerateElement { triangle: 0 });
    }
    let area = 0.5 * det.abs();
    let p = [p1, p2, p3];
    // ∇φ_i = (y_j - y_k, x_k - x_j) / det over cyclic (i, j, k).
    let mut grad = [[0.0; 2]; 3];
    for (i, g) in grad.iter_mut().enumerate() {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        *g = [(p[j][1] - p[k][1]) / det, (p[k][0] - p[j][0]) / det];
    }
    let mut stiff = [[0.0; 3]; 3];
    let mut mass = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            stiff[i][j] = area * (grad[i][0] * grad[j][0] + grad[i][1] * grad[j][1]);
            mass[i][j] = area / 12.0 * if i == j { 2.0 } else { 1.0 };
        }
    }
    Ok((stiff, mass))
}

/// Global stiffness and mass over all vertices, before boundary rows are
/// removed.
pub fn assemble_unreduced(mesh: &Mesh) -> Result<(CsrMatrix, CsrMatrix)> {
    let nt = mesh.num_triangles();
    let mut ks = Vec::with_capacity(9 * nt);
    let mut ms = Vec::with_capacity(9 * nt);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let [a, b, c] = mesh.triangle_points(t);
        let (kl, ml) = local_matrices(a, b, c).map_err(|_| Error::DegenerateElement { triangle: t })?;
        for i in 0..3 {
            for j in 0..3 {
                ks.push((tri[i], tri[j], kl[i][j]));
                ms.push((tri[i], tri[j], ml[i][j]));
            }
        }
    }
    let nv = mesh.num_vertices();
    Ok((CsrMatrix::from_triplets(nv, &ks)?, CsrMatrix::from_triplets(nv, &ms)?))
}

/// Stiffness and mass restricted to interior vertices.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    stiffness: CsrMatrix,
    mass: CsrMatrix,
    /// Interior dof -> global vertex index, increasing.
    dof_map: Vec<usize>,
    /// Global vertex index -> interior dof.
    vertex_to_dof: Vec<Option<usize>>,
}

pub fn assemble(mesh: &Mesh) -> Result<AssembledSystem> {
    let (k, m) = assemble_unreduced(mesh)?;
    let dof_map: Vec<usize> = (0..mesh.num_vertices()).filter(|&v| !mesh.boundary_flags()[v]).collect();
    if dof_map.is_empty() {
        return Err(Error::EmptySystem);
    }
    let mut vertex_to_dof = vec![None; mesh.num_vertices()];
    for (d, &v) in dof_map.iter().enumerate() {
        vertex_to_dof[v] = Some(d);
    }
    Ok(AssembledSystem { stiffness: k.restrict(&dof_map), mass: m.restrict(&dof_map), dof_map, vertex_to_dof })
}

impl AssembledSystem {
    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    pub fn n_dof(&self) -> usize {
        self.dof_map.len()
    }

    pub fn dof_map(&self) -> &[usize] {
        &self.dof_map
    }

    pub fn dof_of_vertex(&self, v: usize) -> Option<usize> {
        self.vertex_to_dof[v]
    }

    /// Expands interior coefficients to all vertices, zero on the boundary.
    pub fn to_global(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.vertex_to_dof.len()];
        for (d, &v) in self.dof_map.iter().enumerate() {
            g[v] = coeffs[d];
        }
        g
    }

    /// Nodal interpolation of `f` at the interior vertices.
    pub fn interpolate(&self, mesh: &Mesh, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.dof_map.iter().map(|&v| f(mesh.vertices()[v][0], mesh.vertices()[v][1])).collect()
    }

    /// `√(xᵀ M x)`.
    pub fn mass_norm(&self, x: &[f64]) -> f64 {
        crate::math::sqrt(self.mass.bilinear(x, x).max(0.0))
    }
}

/// Load vector `b_i = ∫ f φ_i` by the mid-edge rule on each triangle after
/// splitting it `levels` times into four. With `levels = 0` the rule is exact
/// for quadratic integrands; with `levels = L` it is exact whenever `f` is
/// linear on each piece of the `L`-times refined triangle.
pub fn load_vector(mesh: &Mesh, system: &AssembledSystem, f: impl Fn(f64, f64) -> f64, levels: u32) -> Vec<f64> {
    let mut b = vec![0.0; system.n_dof()];
    let mut pieces: Vec<[[f64; 3]; 3]> = Vec::new();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let dofs = tri.map(|v| system.dof_of_vertex(v));
        if dofs.iter().all(Option::is_none) {
            continue;
        }
        let pts = mesh.triangle_points(t);
        let area = mesh.triangle_area(t).abs();
        // Sub-triangles in barycentric coordinates of the parent.
        pieces.clear();
        pieces.push([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        for _ in 0..levels {
            let mut next = Vec::with_capacity(4 * pieces.len());
            for &[a, bb, c] in &pieces {
                let mid = |p: [f64; 3], q: [f64; 3]| [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]), 0.5 * (p[2] + q[2])];
                let (ab, bc, ca) = (mid(a, bb), mid(bb, c), mid(c, a));
                next.extend([[a, ab, ca], [ab, bb, bc], [ca, bc, c], [ab, bc, ca]]);
            }
            pieces = next;
        }
        let weight = area / pieces.len() as f64 / 3.0;
        for &[a, bb, c] in &pieces {
            for (p, q) in [(a, bb), (bb, c), (c, a)] {
                let lam = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]), 0.5 * (p[2] + q[2])];
                let x = lam[0] * pts[0][0] + lam[1] * pts[1][0] + lam[2] * pts[2][0];
                let y = lam[0] * pts[0][1] + lam[1] * pts[1][1] + lam[2] * pts[2][1];
                let fx = f(x, y) * weight;
                for k in 0..3 {
                    if let Some(d) = dofs[k] {
                        b[d] += fx * lam[k];
                    }
                }
            }
        }
    }
    b
}

/// Coefficients of the L2 projection of `f` onto the interior P1 space.
pub fn l2_project(mesh: &Mesh, system: &AssembledSystem, f: impl Fn(f64, f64) -> f64) -> Result<Vec<f64>> {
    l2_project_refined(mesh, system, f, 0)
}

/// [`l2_project`] with the load integrated on `levels`-times subdivided
/// triangles; see [`load_vector`].
pub fn l2_project_refined(
    mesh: &Mesh,
    system: &AssembledSystem,
    f: impl Fn(f64, f64) -> f64,
    levels: u32,
) -> Result<Vec<f64>> {
    let b = load_vector(mesh, system, f, levels);
    let m = Factorization::<f64>::factor(system.mass())?;
    m.solve(&b)
}
