//! Solvers for time-fractional Moore-Gibson-Thompson acoustic models.
//!
//! Numerical routines are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the double-precision instantiation used by
//! the analysis harness and the command-line driver.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fractional;
pub mod mittag_leffler;
pub mod quadrature;
pub mod scalar;
pub mod special;
pub mod spectral;
pub mod model;
pub mod trajectory;
pub mod volterra;
pub mod memory;
pub mod analysis;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Grid = fractional::TimeGrid<f64>;
pub type Signal = fractional::SampledSignal<f64>;
pub type Kernel = mittag_leffler::RelaxationKernel<f64>;
pub type Basis = spectral::EigenBasis<f64>;
pub type Field = spectral::SpectralField<f64>;
