//! Discrete parameter sphere: grid, harmonic transforms and nodal fields.

pub mod field;
pub mod grid;
pub mod harmonics;

pub use field::{same_grid, ScalarField, SymTensorField};
pub use grid::{Derivatives, SphereGrid};
