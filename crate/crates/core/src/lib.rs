//! Numerical quantum geometry for parametrized Hamiltonian families.
//!
//! The crate is organised bottom-up:
//!
//! - [`models`]: Hamiltonian families, eigensystems with gauge fixing, reference models.
//! - [`geometry`]: covariant tangent frames, quantum geometric tensor, quantum
//!   Christoffel symbols and the curvature tensor.
//! - [`path`] and [`transport`]: parameter paths, Berry phase, parallel transport
//!   of tangent kets and holonomy.
//! - [`apt`]: adiabatic perturbation theory to arbitrary order.
//! - [`oracle`]: exact Schrödinger propagation and convergence-order fits.
//! - [`numerics`]: quadrature, ODE integration and finite-difference stencils.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apt;
pub mod error;
pub mod geometry;
pub mod models;
pub mod numerics;
pub mod oracle;
pub mod path;
pub mod tensor;
pub mod transport;

pub use error::{Error, Result};

/// Complex scalar.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<C64>;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense real matrix.
pub type RMat = nalgebra::DMatrix<f64>;
