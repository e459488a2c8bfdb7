use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("structure too far from standard at {point:?}: J + J_st is singular")]
    TooFarFromStandard { point: Vec<f64> },

    #[error("J is not tamed by the standard splitting at {point:?}: coframe system is singular")]
    CoframeSingular { point: Vec<f64> },

    #[error("deformation matrix failed at grid node ({j}, {k}): {source}")]
    AtNode {
        j: usize,
        k: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown gallery family `{0}`")]
    UnknownFamily(String),

    #[error("degenerate pair: the two maps coincide")]
    DegeneratePair,

    #[error("fixed-point map is not contracting (ratio {ratio:.3e} at iteration {iteration})")]
    NotContracting {
        iteration: usize,
        ratio: f64,
        log: Vec<crate::curve::IterationRecord>,
    },

    #[error("point is outside the covered region: |p| = {norm} <= 1")]
    OutOfRegion { norm: f64 },

    #[error("insufficient centers: foliation check needs at least two discs, got {0}")]
    InsufficientCenters(usize),

    #[error("disc solve failed at center {center:?}: {source}")]
    DiscFailed {
        center: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed grid data: {0}")]
    Parse(String),
}
