//! Numerical toolkit for almost complex structures on `R^2n = C^n` that decay to
//! the standard structure at infinity.
//!
//! The crate is organised around four areas:
//!
//! * [`acs`]: structure fields, the gallery of analytic test structures, and the
//!   pointwise tensor calculus (Nijenhuis tensor, deformation matrix, coframes,
//!   Levi form, volume density, decay envelopes).
//! * [`cauchy_green`]: the planar Cauchy-Green transform on a uniform grid with
//!   closed-form cell integrals, and the weighted norm toolbox.
//! * [`curve`]: the quasilinear Cauchy-Riemann system, its fixed-point solver for
//!   J-holomorphic lines and discs, and the evaluation/covering map.
//! * [`dilation`]: isotropic rescaling and audits of the scaled decay bounds.
//!
//! Points of `R^2n` are plain `&[f64]` slices in the interleaved layout
//! `(x_1, y_1, ..., x_n, y_n)` with `z_k = x_k + i y_k`.

pub mod acs;
pub mod cauchy_green;
pub mod curve;
pub mod dilation;
mod error;
pub mod fd;
pub mod linalg;
pub mod sampling;

pub use error::{Error, Result};

pub use num_complex::Complex64;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
