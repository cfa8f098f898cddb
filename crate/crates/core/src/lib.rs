//! Numerical coorbit theory on the wavelet index set `R x ((0,1) u {inf})`.
//!
//! The crate discretizes the index set on a periodic grid with a geometric
//! scale axis and provides variable-exponent norms, 2-microlocal weights,
//! admissible wavelet pairs, the continuous wavelet transform with its
//! maximal functions, Besov and Triebel-Lizorkin type norms, and the
//! discretization machinery behind atomic decompositions.

pub mod analyzers;
pub mod coorbit;
pub mod error;
pub mod grid;
pub mod io;
pub mod quadrature;
pub mod signals;
pub mod spaces;
pub mod transform;
pub mod varexp;
pub mod weights;

pub use error::{Error, Result};
