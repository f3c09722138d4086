use thiserror::Error;

/// Failures raised by the geometry, solver and continuation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("radius {r} lies inside the horizon r = {horizon}")]
    Domain { r: f64, horizon: f64 },

    #[error("colatitude {theta} is at a coordinate pole")]
    PoleSingularity { theta: f64 },

    #[error("surface does not enclose the horizon: min rho = {min_rho}, 2m = {horizon}")]
    HorizonViolation { min_rho: f64, horizon: f64 },

    #[error("surface is not strictly convex: min principal curvature {min_curvature:e}")]
    ConvexityViolation { min_curvature: f64 },

    #[error("mean curvature is degenerate: min |H| = {min_abs:e} below floor {floor:e}")]
    MeanCurvatureDegenerate { min_abs: f64, floor: f64 },

    #[error("linearized isometry solve failed: {0}")]
    SolverFailure(String),

    #[error("surface is no longer a star-shaped graph: min radial transversality {transversality:e}")]
    StarShapeLost { transversality: f64 },

    #[error("metric drift {drift:e} not corrected to {tolerance:e} after {iterations} Gauss-Newton iterations")]
    DriftUncorrectable { drift: f64, tolerance: f64, iterations: usize },

    #[error("fields are defined on different grids")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("surface file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
