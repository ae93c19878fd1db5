//! Direct solvers for the stiffness, mass and shifted systems, plus a dense
//! generalized eigensolver used as an independent reference.

mod dense;
mod skyline;

use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

pub use dense::{cholesky, dense_generalized_eig, jacobi_eigen, DenseMatrix, GeneralizedEigen, ORACLE_MAX_DIM};
pub use skyline::{Factorization, PIVOT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

/// Entry type of a factorization: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + Default
    + PartialEq
    + Send
    + Sync
    + core::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + Mul<f64, Output = Self>
    + 'static
{
    const FIELD: Field;

    fn from_real(x: f64) -> Self;

    fn modulus(self) -> f64;

    fn is_finite(self) -> bool;

    /// `Σ a_k b_k` (no conjugation).
    fn dot(a: &[Self], b: &[Self]) -> Self;
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;

    fn from_real(x: f64) -> Self {
        x
    }

    fn modulus(self) -> f64 {
        self.abs()
    }

    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        let mut acc = [0.0; 4];
        let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
        let (ra, rb) = (ca.remainder(), cb.remainder());
        for (x, y) in ca.zip(cb) {
            for k in 0..4 {
                acc[k] += x[k] * y[k];
            }
        }
        let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
        (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
    }
}

impl Scalar for Complex64 {
    const FIELD: Field = Field::Complex;

    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }

    fn modulus(self) -> f64 {
        crate::math::hypot(self.re, self.im)
    }

    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    // Profile factorizations spend nearly all their time here; independent
    // accumulators break the add-latency chain.
    fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
        // p accumulates (x.re·y.re, x.im·y.re) and q (x.re·y.im, x.im·y.im),
        // one lane pair per complex entry.
        let mut p = [[0.0; 2]; 4];
        let mut q = [[0.0; 2]; 4];
        let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
        let (ra, rb) = (ca.remainder(), cb.remainder());
        for (x, y) in ca.zip(cb) {
            for k in 0..4 {
                p[k][0] += x[k].re * y[k].re;
                p[k][1] += x[k].im * y[k].re;
                q[k][0] += x[k].re * y[k].im;
                q[k][1] += x[k].im * y[k].im;
            }
        }
        let sum = |v: [[f64; 2]; 4], l: usize| (v[0][l] + v[1][l]) + (v[2][l] + v[3][l]);
        let mut s = Complex64::new(sum(p, 0) - sum(q, 1), sum(p, 1) + sum(q, 0));
        for (x, y) in ra.iter().zip(rb) {
            s += x * y;
        }
        s
    }
}
