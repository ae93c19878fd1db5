use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{Field, Scalar};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Pivots with magnitude at or below `PIVOT_TOL` times the pivot scale are
/// rejected as singular.
pub const PIVOT_TOL: f64 = 1e-14;

/// Profile (skyline) `L D Lᵀ` factorization without pivoting.
///
/// Row `i` of `L` is stored densely from its first structural nonzero column
/// up to the diagonal. For complex entries this is the complex-symmetric
/// factorization (transpose, not conjugate transpose).
#[derive(Debug, Clone)]
pub struct Factorization<T> {
    first: Vec<usize>,
    offset: Vec<usize>,
    lower: Vec<T>,
    diag: Vec<T>,
}

fn profile(terms: &[&CsrMatrix], n: usize) -> Vec<usize> {
    let mut first: Vec<usize> = (0..n).collect();
    for a in terms {
        for (i, j, _) in a.triplets() {
            let (lo, hi) = if i < j { (i, j) } else { (j, i) };
            first[hi] = first[hi].min(lo);
        }
    }
    first
}

impl<T: Scalar> Factorization<T> {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        Self::factor_combination(&[(T::from_real(1.0), a)])
    }

    /// Factors `Σ c_k A_k` for structurally symmetric `A_k` of equal size.
    ///
    /// The pivot scale is `max_i Σ |c_k| |(A_k)_ii|`, so a shifted pencil is
    /// judged singular relative to the size of its unshifted parts.
    pub fn factor_combination(terms: &[(T, &CsrMatrix)]) -> Result<Self> {
        let n = match terms.first() {
            Some((_, a)) => a.dim(),
            None => return Err(Error::invalid("empty linear combination")),
        };
        if let Some((_, a)) = terms.iter().find(|(_, a)| a.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: a.dim() });
        }
        let mats: Vec<&CsrMatrix> = terms.iter().map(|t| t.1).collect();
        let first = profile(&mats, n);
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            offset.push(offset[i] + (i - first[i]));
        }
        let mut lower = vec![T::default(); offset[n]];
        let mut diag = vec![T::default(); n];
        let mut scale = vec![0.0; n];
        for &(c, a) in terms {
            for i in 0..n {
                for (j, v) in a.row(i) {
                    if j < i {
                        lower[offset[i] + j - first[i]] += c * v;
                    } else if j == i {
                        diag[i] += c * v;
                        scale[i] += c.modulus() * v.abs();
                    }
                }
            }
        }
        let threshold = PIVOT_TOL * scale.iter().fold(0.0f64, |m, &s| m.max(s));
        let mut f = Factorization { first, offset, lower, diag };
        f.decompose(threshold)?;
        Ok(f)
    }

    fn decompose(&mut self, threshold: f64) -> Result<()> {
        let n = self.diag.len();
        for i in 0..n {
            let fi = self.first[i];
            let (done, rest) = self.lower.split_at_mut(self.offset[i]);
            let row = &mut rest[..i - fi];
            // Pass 1: row[j] <- w_j = l_ij d_j.
            for j in fi..i {
                let fj = self.first[j];
                let k0 = fi.max(fj);
                if k0 < j {
                    let lj = &done[self.offset[j] + (k0 - fj)..self.offset[j] + (j - fj)];
                    let wi = &row[k0 - fi..j - fi];
                    row[j - fi] -= T::dot(wi, lj);
                }
            }
            // Pass 2: l_ij = w_j / d_j and d_i = a_ii - Σ w_j l_ij.
            let mut dsum = T::default();
            for j in fi..i {
                let w = row[j - fi];
                let l = w / self.diag[j];
                dsum += w * l;
                row[j - fi] = l;
            }
            let d = self.diag[i] - dsum;
            let magnitude = d.modulus();
            if !d.is_finite() || magnitude <= threshold {
                return Err(Error::NearSingular { index: i, magnitude });
            }
            self.diag[i] = d;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn field(&self) -> Field {
        T::FIELD
    }

    /// The pivots `D` of `L D Lᵀ`.
    pub fn pivots(&self) -> &[T] {
        &self.diag
    }

    /// Number of stored off-diagonal entries of `L`.
    pub fn profile_size(&self) -> usize {
        self.lower.len()
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, x: &mut [T]) -> Result<()> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: x.len() });
        }
        for i in 0..n {
            let fi = self.first[i];
            let li = &self.lower[self.offset[i]..self.offset[i + 1]];
            let s = T::dot(li, &x[fi..i]);
            x[i] -= s;
        }
        for (xi, &d) in x.iter_mut().zip(&self.diag) {
            *xi = *xi / d;
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let xi = x[i];
            let li = &self.lower[self.offset[i]..self.offset[i + 1]];
            for (&l, y) in li.iter().zip(&mut x[fi..i]) {
                *y -= l * xi;
            }
        }
        Ok(())
    }
}

impl Factorization<f64> {
    /// Solves with a complex right-hand side by treating the real and
    /// imaginary parts separately.
    pub fn solve_complex(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let re: Vec<f64> = b.iter().map(|z| z.re).collect();
        let im: Vec<f64> = b.iter().map(|z| z.im).collect();
        let (re, im) = (self.solve(&re)?, self.solve(&im)?);
        Ok(re.into_iter().zip(im).map(|(r, i)| Complex64::new(r, i)).collect())
    }

    pub fn all_pivots_positive(&self) -> bool {
        self.diag.iter().all(|&d| d > 0.0)
    }
}
