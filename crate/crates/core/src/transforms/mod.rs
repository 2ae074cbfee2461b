//! Planar singular integral operators and the discrete Wirtinger
//! derivatives used to check them.

mod beltrami;
mod cauchy;
pub mod dbar;
mod estimates;
pub mod kernels;

pub use beltrami::{
    beltrami_solve, beurling_norm_estimate, integrate_holomorphic, smooth_test_function,
    BeltramiProblem, BeltramiSolution,
};
pub use cauchy::{
    beurling_transform, beurling_transform_on, cauchy_transform, cauchy_transform_on,
    newton_potential, padded_grid,
};
pub use dbar::{dbar, dbar_flagged, dz, dzbar};
pub use estimates::{default_deltas, phi, verify_cauchy_estimates, EstimateReport};
