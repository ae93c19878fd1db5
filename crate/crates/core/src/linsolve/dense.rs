use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::sqrt;
use crate::sparse::CsrMatrix;

/// Largest problem the dense reference solver accepts.
pub const ORACLE_MAX_DIM: usize = 2000;

const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("dense matrix is not square"));
        }
        Ok(DenseMatrix { n, data: rows.concat() })
    }

    pub fn from_csr(a: &CsrMatrix) -> Self {
        let mut m = Self::zeros(a.dim());
        for (i, j, v) in a.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.data.chunks(self.n).map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn frobenius(&self) -> f64 {
        sqrt(self.data.iter().map(|v| v * v).sum())
    }

    fn off_diagonal(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    s += self[(i, j)] * self[(i, j)];
                }
            }
        }
        sqrt(s)
    }
}

impl core::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Lower Cholesky factor `L` with `M = L Lᵀ`.
pub fn cholesky(m: &DenseMatrix) -> Result<DenseMatrix> {
    let n = m.n;
    let mut l = DenseMatrix::zeros(n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let d = sqrt(d);
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps stop once the off-diagonal Frobenius norm is below `1e-12` times the
/// full norm. Returns eigenvalues (unsorted) and the rotation matrix whose
/// columns are the eigenvectors.
pub fn jacobi_eigen(a: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let n = a.n;
    let mut a = a.clone();
    let mut v = DenseMatrix::identity(n);
    let norm = a.frobenius();
    for _ in 0..MAX_SWEEPS {
        if a.off_diagonal() <= OFF_DIAGONAL_TOL * norm {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = {
                    let r = 1.0 / (theta.abs() + sqrt(theta * theta + 1.0));
                    if theta < 0.0 {
                        -r
                    } else {
                        r
                    }
                };
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)]).collect(), v)
}

#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// `vectors[k]` pairs with `values[k]` and has unit `M`-norm.
    pub vectors: Option<Vec<Vec<f64>>>,
}

/// All eigenpairs of `A v = λ M v` for symmetric `A` and SPD `M`.
///
/// `M = L Lᵀ` turns the pencil into the symmetric matrix `L⁻¹ A L⁻ᵀ`, which
/// is diagonalized by [`jacobi_eigen`].
pub fn dense_generalized_eig(a: &DenseMatrix, m: &DenseMatrix, want_vectors: bool) -> Result<GeneralizedEigen> {
    let n = a.n;
    if m.n != n {
        return Err(Error::DimensionMismatch { expected: n, found: m.n });
    }
    if n > ORACLE_MAX_DIM {
        return Err(Error::invalid("dense eigensolver limited to 2000 unknowns"));
    }
    let l = cholesky(m).map_err(|_| Error::invalid("mass matrix is not symmetric positive definite"))?;
    // X = L⁻¹ A, then C = L⁻¹ Xᵀ = L⁻¹ A L⁻ᵀ.
    let lower_solve = |b: &mut [f64]| {
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= l[(i, k)] * b[k];
            }
            b[i] = s / l[(i, i)];
        }
    };
    let mut x = DenseMatrix::zeros(n);
    let mut col = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            col[i] = a[(i, j)];
        }
        lower_solve(&mut col);
        for i in 0..n {
            x[(i, j)] = col[i];
        }
    }
    let mut c = DenseMatrix::zeros(n);
    for j in 0..n {
        for i in 0..n {
            col[i] = x[(j, i)];
        }
        lower_solve(&mut col);
        for i in 0..n {
            c[(i, j)] = col[i];
        }
    }
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = s;
            c[(j, i)] = s;
        }
    }
    let (values, y) = jacobi_eigen(&c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| values[p].total_cmp(&values[q]));
    let sorted = order.iter().map(|&k| values[k]).collect();
    let vectors = want_vectors.then(|| {
        order
            .iter()
            .map(|&k| {
                // v = L⁻ᵀ y_k
                let mut v: Vec<f64> = (0..n).map(|i| y[(i, k)]).collect();
                for i in (0..n).rev() {
                    let mut s = v[i];
                    for r in i + 1..n {
                        s -= l[(r, i)] * v[r];
                    }
                    v[i] = s / l[(i, i)];
                }
                v
            })
            .collect()
    });
    Ok(GeneralizedEigen { values: sorted, vectors })
}
