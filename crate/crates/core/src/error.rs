use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite input")]
    NonFinite,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("homogeneity spot-check failed on ray {ray:?} (scale {scale}): relative error {rel_err:e}")]
    Homogeneity {
        ray: Vec<[f64; 2]>,
        scale: f64,
        rel_err: f64,
    },

    #[error("gauge modulus unavailable: {0}")]
    ModulusUnavailable(String),

    #[error("outside closed disk: |z| = {0}")]
    OutsideDisk(f64),

    #[error("duplicate nodes at angle {0}")]
    DuplicateNodes(f64),

    #[error("ill-conditioned nodes: separation {sep:e} below {min:e}")]
    IllConditionedNodes { sep: f64, min: f64 },

    #[error("size mismatch: {what} ({expected} expected, {got} given)")]
    SizeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("insufficient shrink or resolution: {0}")]
    Containment(String),

    #[error("conformal fit failed: {0}")]
    ConformalFit(String),

    #[error("data does not reach the boundary scale: omega(diam) = {0} < 1")]
    BoundaryScale(f64),

    #[error("omega inverse argument {arg} outside [0, {max}]")]
    OmegaDomain { arg: f64, max: f64 },

    #[error("schedule depth cap: k_max = {0} exceeds 8")]
    DepthCap(usize),

    #[error("non-monotone Psi near t = {0}")]
    NonMonotone(f64),

    #[error("compact set touches S: max |chi| on E = {0}")]
    CompactTouchesPeakSet(f64),

    #[error("target epsilon {0} unreachable at this resolution")]
    EpsilonUnreachable(f64),

    #[error("degenerate data: gauge of f vanishes identically")]
    DegenerateData,

    #[error("data outside the closed body: gauge {gauge} at node {node}")]
    DataOutsideBody { node: usize, gauge: f64 },

    #[error("neighbourhood U is not proper (delta = {0})")]
    ImproperNeighbourhood(f64),

    #[error("not in C\\{{0}}: target value at node {0} is zero")]
    ZeroTarget(usize),

    #[error("stage {stage}: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid problem: {0}")]
    Problem(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn at_stage(self, stage: usize) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
