use thiserror::Error;

/// Errors produced anywhere in the reconstruction / tracking pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty stream")]
    EmptyStream,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point is behind the camera (depth {depth})")]
    BehindCamera { depth: f64 },

    #[error("degenerate stereo rig: {0}")]
    DegenerateRig(String),

    #[error("coincident points do not define a line")]
    CoincidentPoints,

    #[error("no unique intersection: planes are parallel")]
    NoUniqueIntersection,

    #[error("degenerate projection: line passes through the camera center")]
    DegenerateProjection,

    #[error("ill-conditioned triangulation")]
    IllConditionedTriangulation,

    #[error("no lines detected")]
    NoLinesDetected,

    #[error("stereo matching failed")]
    StereoMatchingFailed,

    #[error("endpoint determination failed: {0}")]
    EndpointDeterminationFailed(String),

    #[error("model initialization produced {found} segments, at least {required} required")]
    TooFewSegments { found: usize, required: usize },

    #[error("insufficient associations ({count})")]
    InsufficientAssociations { count: usize },

    #[error("object never visible in either camera")]
    ObjectNeverVisible,

    #[error("time {t} outside [0, {duration}]")]
    TimeOutOfRange { t: f64, duration: f64 },

    #[error("trajectories do not overlap in time")]
    NoOverlap,

    #[error("insufficient span: need at least {required} s, have {available} s")]
    InsufficientSpan { required: f64, available: f64 },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
