//! Fractional integrals and Caputo derivatives on uniform time grids.

mod grid;
mod operators;
pub(crate) mod weights;

pub use grid::{SampledSignal, TimeGrid};
pub use operators::{
    abel_integral, alikhanov_gap, caputo_derivative, coercivity_quadform, difference_derivative, gamma_kernel,
    limit_discrepancy, second_difference_derivative, FractionalOrder, SingularKernel,
};
pub use weights::ProductWeights;
