use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("polygon is not strictly convex: vertex {index} turns the wrong way (cross product {cross:e})")]
    ReflexVertex { index: usize, cross: f64 },

    #[error("polygon has collinear or repeated vertices at index {index}")]
    CollinearVertices { index: usize },

    #[error("degenerate domain: {0}")]
    Degenerate(String),

    #[error("grid too coarse: {nodes_across:.1} nodes across the diameter, at least {required} needed")]
    GridTooCoarse { nodes_across: f64, required: usize },

    #[error("grid spacing must be positive and finite, got {0}")]
    InvalidSpacing(f64),

    #[error("field does not match mask: {0}")]
    MaskMismatch(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("linear solver stalled after {iterations} iterations (relative residual {residual:e})")]
    LinearSolve { iterations: usize, residual: f64 },

    #[error("argument out of domain: {what} = {value}")]
    DomainViolation { what: &'static str, value: f64 },

    #[error("inconsistent inputs: {0}")]
    InconsistentInputs(String),

    #[error("need at least {required} included nodes, found {found}")]
    TooFewNodes { found: usize, required: usize },

    #[error("point ({0}, {1}) lies outside the hull of the included nodes")]
    OutsideHull(f64, f64),

    #[error("the interior band is empty (band width {0})")]
    EmptyBand(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
