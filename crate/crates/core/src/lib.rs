//! Numerical ∂̄-calculus in one and two complex variables.
//!
//! The crate is organised bottom-up: [`grid`] provides lattices and sampled
//! fields, [`transforms`] the singular integral operators built on them,
//! and the remaining modules assemble integrating factors, zero-set
//! geometry and removability checks out of those pieces.

pub mod error;
pub mod factor;
pub mod grid;
pub mod numeric;
pub mod removability;
pub mod transforms;
pub mod zeroset;

pub use error::{DbarError, Result};
pub use grid::{ComplexGrid, Domain, Field, OneForm};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;
