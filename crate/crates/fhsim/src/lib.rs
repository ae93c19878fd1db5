//! File formats, reports, settings and the command-line driver around
//! [`fhsim_core`].

pub mod check;
pub mod cli;
pub mod config;
pub mod error;
pub mod matrixio;
pub mod meshio;
pub mod report;

pub use error::{Error, Result};
pub use fhsim_core;
