//! Integrating factors for `∂̄ f = A f`.

pub mod counterexample;
pub mod extension;
pub mod manufactured;
pub mod matrix;
pub mod params;
pub mod scalar;
pub mod zeros;

pub use manufactured::{manufactured_system, ManufacturedSystem};
pub use matrix::{
    coefficient_bound, integrating_factor_matrix, integrating_factor_tiled, row_sum_norms,
    MatrixFactor, Tile, TiledFactor, FIXED_POINT_TOL,
};
pub use params::{analytic_cp, calibrate, Calibration, ContractionParams, CONTRACTION_LIMIT};
pub use scalar::{extend_by_zero, integrating_factor_scalar, ScalarFactor, ZERO_FLOOR};
pub use extension::{
    dbar_log_coefficient, trivial_extension, SliceBoundReport, TrivialExtension, TubeCheck,
};
pub use zeros::{check_isolated_zeros, ZeroReport};
pub use counterexample::{
    counterexample_field, pole, Counterexample, NormTable, OUTER_RADIUS, TABLE_EXPONENTS,
};
