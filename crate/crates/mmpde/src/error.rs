use thiserror::Error;

/// Errors produced by mesh construction, energy evaluation, and the mesh flow.
#[derive(Error, Debug)]
pub enum Error {
    #[error("degenerate simplex (element {element})")]
    DegenerateSimplex { element: usize },

    #[error("matrix is not symmetric positive definite")]
    NotSpd,

    #[error("unsupported dimensions m={m}, d={d}")]
    UnsupportedDims { m: usize, d: usize },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("vertex {vertex} has valence {valence}, expected 1 or 2 on a curve mesh")]
    CurveValence { vertex: usize, valence: usize },

    #[error("inconsistent triangle orientation across edge ({0}, {1})")]
    InconsistentOrientation(usize, usize),

    #[error("zero mixed area at vertex {0}")]
    ZeroMixedArea(usize),

    #[error("projection vector is not unit length (norm {0})")]
    NonUnitDirection(f64),

    #[error("slide boundary policy requires boundary geometry at vertex {0}")]
    MissingBoundaryGeometry(usize),

    #[error("step rejected: dt underflow after {0} halvings")]
    StepRejected(usize),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
