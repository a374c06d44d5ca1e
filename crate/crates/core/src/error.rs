use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{what}: expected length {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid body model: {0}")]
    InvalidModel(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("point is at or behind the camera plane (depth {depth})")]
    BehindCamera { depth: f64 },
    #[error("need at least {needed} rays, got {got}")]
    TooFewRays { needed: usize, got: usize },
    #[error("rays are parallel, triangulation is singular")]
    ParallelRays,
    #[error("cannot sample {requested} points from {available}")]
    TooManySamples { requested: usize, available: usize },
    #[error("all sampling weights are zero")]
    ZeroWeights,
    #[error("vertex {0} has no incident face")]
    IsolatedVertex(usize),
    #[error("incident triangle {face} of vertex {vertex} is degenerate")]
    DegenerateTriangle { vertex: usize, face: usize },
    #[error("sigma must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("zero render resolution")]
    ZeroResolution,
    #[error("non-finite objective at iterate {iterate:?}")]
    NonFinite { iterate: alloc::vec::Vec<f64> },
    #[error("initialization failed: {0}")]
    Initialization(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}
