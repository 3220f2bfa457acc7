//! Reduced `BC_n` Ruijsenaars-type integrable system obtained from the
//! Heisenberg double of `SU(n,n)`.
//!
//! Everything numerical is generic over [`Real`] (`f32`, `f64`, or the
//! forward-mode [`dual::Dual`]); the aliases below fix the common cases.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decomposition;
pub mod dual;
pub mod dynamics;
pub mod error;
pub mod hamiltonians;
pub mod limits;
pub mod matops;
pub mod model;
pub mod reconstruction;
pub mod sampling;
pub mod scalar;

pub use error::{Error, Result};
pub use matops::CMatrix;
pub use model::{ModelParams, ReducedPoint};
pub use scalar::{Real, C};

pub type Matrix64 = CMatrix<f64>;
pub type Matrix32 = CMatrix<f32>;
pub type Params64 = ModelParams<f64>;
pub type Params32 = ModelParams<f32>;
pub type Point64 = ReducedPoint<f64>;
pub type Point32 = ReducedPoint<f32>;
