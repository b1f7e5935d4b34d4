use thiserror::Error;

/// Errors raised while parsing, validating or writing models.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported format `{0}` (expected ascii or binary_little_endian 1.0)")]
    UnsupportedFormat(String),
    #[error("missing vertex property `{0}`")]
    MissingProperty(&'static str),
    #[error("unsupported type `{ty}` for property `{property}`")]
    UnsupportedPropertyType { property: String, ty: String },
    #[error("truncated body: element `{element}` declares {expected} records, found {found}")]
    TruncatedBody {
        element: String,
        expected: usize,
        found: usize,
    },
    #[error("face {face} has {vertices} vertices; only triangles are supported")]
    NonTriangleFace { face: usize, vertices: usize },
    #[error("face {face} references vertex {index}, but the model has {vertex_count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: i64,
        vertex_count: usize,
    },
    #[error("face {face} repeats a vertex index")]
    RepeatedFaceIndex { face: usize },
    #[error("invalid value on line {line}: {message}")]
    InvalidValue { line: usize, message: String },
    #[error("vertex on line {line} has no color while other vertices do")]
    MixedVertexColors { line: usize },
    #[error("model has no points")]
    Empty,
    #[error("mesh has no faces")]
    NoFaces,
    #[error("non-finite coordinate at element {index}")]
    NonFiniteCoordinate { index: usize },
    #[error("{positions} positions but {colors} colors")]
    LengthMismatch { positions: usize, colors: usize },
    #[error("unrecognized model file extension for `{0}`")]
    UnknownExtension(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Errors from geometry feature projection.
#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("need at least 2 points for neighborhood queries, got {0}")]
    InsufficientPoints(usize),
    #[error("non-manifold edge ({0}, {1}) is shared by {2} faces")]
    NonManifoldEdge(u32, u32, usize),
    #[error("mesh has no faces")]
    NoFaces,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Errors from distribution-parameter estimation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least {required} samples, got {got}")]
    TooFewSamples { required: usize, got: usize },
    #[error("degenerate distribution: {0}")]
    Degenerate(&'static str),
    #[error("non-finite sample value")]
    NonFinite,
}

/// Errors from SVR training, prediction and model persistence.
#[derive(Debug, Error)]
pub enum SvrError {
    #[error("invalid hyperparameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{rows} feature rows but {targets} targets")]
    RowCountMismatch { rows: usize, targets: usize },
    #[error("need at least 2 training rows, got {0}")]
    TooFewRows(usize),
    #[error("SMO did not converge within {0} iterations")]
    NonConvergence(usize),
    #[error("unsupported model file version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("corrupt model file: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Errors from metrics and evaluation protocols.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error("correlation undefined: zero variance input (rmse = {rmse})")]
    ZeroVariance { rmse: f64 },
    #[error("length mismatch: {0} predictions vs {1} scores")]
    LengthMismatch(usize, usize),
    #[error("need at least {required} samples, got {got}")]
    TooFewSamples { required: usize, got: usize },
    #[error("need at least 2 content groups, got {0}")]
    TooFewGroups(usize),
    #[error("unknown feature group `{0}` (expected F1..F8)")]
    UnknownFeatureGroup(String),
    #[error("no feature groups selected")]
    EmptyGroupSelection,
    #[error("invalid training fraction {0}: {1}")]
    InvalidFraction(f64, String),
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error("{} model(s) failed: {}", .0.len(), .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Extraction(Vec<ModelFailure>),
    #[error(transparent)]
    Svr(#[from] SvrError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Top-level error for whole-model feature extraction.
#[derive(Debug, Error)]
pub enum ExtractError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Extraction failure for one model file.
#[derive(Debug, Error)]
#[error("{}: {source}", path.display())]
pub struct ModelFailure {
    pub path: std::path::PathBuf,
    #[source]
    pub source: ExtractError,
}

/// Errors from synthetic model generation and distortion.
#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("distortion keeps {kept} elements; at least {min} are required")]
    TooFewElements { kept: usize, min: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}
