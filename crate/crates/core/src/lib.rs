//! Dirichlet Laplacian eigenvalues on polygonal domains, computed as the
//! eigenvalues of the operator function `F_h(z) = T_h - z^{-1} I`.
//!
//! The pipeline is:
//!
//! 1. [`mesh`]: structured triangulations of rectangles and uniform refinement.
//! 2. [`assembly`]: P1 stiffness/mass matrices on interior degrees of freedom
//!    and the L2 projection onto the discrete space.
//! 3. [`linsolve`]: profile LDLᵀ factorizations (real and complex) and a dense
//!    Jacobi eigensolver used as an independent reference.
//! 4. [`opfun`]: the discrete solution operator `T_h`, the operator function
//!    and its resolvent, all in interior coefficient space with the mass inner
//!    product.
//! 5. [`sim`]: the spectral indicator search. Boxes of the complex plane are
//!    tested with a contour quadrature of the resolvent and subdivided until the
//!    eigenvalues are isolated, then polished by Rayleigh quotient iteration.
//! 6. [`study`]: exact rectangle eigenvalues and mesh-refinement studies.
//!
//! The crate is `no_std` with `alloc` when the default `std` feature is off.

#![cfg_attr(not(feature = "std"), no_std)]
// Negated comparisons such as `!(x > 0.0)` are used on purpose to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod assembly;
pub mod error;
pub mod linsolve;
mod math;
pub mod mesh;
pub mod opfun;
pub mod probes;
pub mod rng;
pub mod sim;
pub mod sparse;
pub mod study;

pub use num_complex::Complex64;

pub use assembly::AssembledSystem;
pub use error::{Error, Result};
pub use mesh::{CellPattern, Mesh, Rect};
pub use opfun::OperatorFunction;
pub use sim::{EigenvalueEstimate, RegionBox, SearchOutcome, SimOptions};
pub use study::ConvergenceRecord;
