//! Surfaces in the spatial Schwarzschild manifold.
//!
//! Closed-form ambient geometry, a pseudospectral calculus for star-shaped
//! surfaces, the linearized isometric-embedding system, the quasi-local mass
//! and its first variation, and a numerical isometric continuation.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod ambient;
pub mod continuation;
pub mod error;
pub mod io;
pub mod linalg;
pub mod linearization;
pub mod mass;
pub mod random;
pub mod sphere;
pub mod surface;

pub use ambient::{AmbientGeometry, AmbientPoint, Rotation};
pub use error::{Error, Result};
pub use sphere::{ScalarField, SphereGrid, SymTensorField};
pub use surface::{SurfaceGeometry, TangentField};
