use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    #[error("non-finite value {value} at row {row}, component {component}")]
    NonFinite {
        row: usize,
        component: usize,
        value: f64,
    },

    #[error("corpus shape mismatch: {0}")]
    Shape(String),

    #[error("corpus is already normalized")]
    AlreadyNormalized,

    #[error("corpus must be normalized before {0}")]
    NotNormalized(&'static str),

    #[error("invalid partition: p={p} with m={m} ({reason})")]
    Partition {
        p: usize,
        m: usize,
        reason: &'static str,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("unbiased MMD needs at least 2 vectors per point, got q={0}; use euclidean distance")]
    MmdTooFewVectors(usize),

    #[error("points have unequal sizes: q={0} and q={1}")]
    MixedPointSize(usize, usize),

    #[error("invalid kernel: {0}")]
    Kernel(String),

    #[error("invalid distance matrix: {0}")]
    DistanceMatrix(String),

    #[error("LOF needs at least k+1={needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("invalid LOF neighborhood size k={0}")]
    InvalidK(usize),

    #[error("length mismatch: {0} scores for {1} points")]
    LengthMismatch(usize, usize),

    #[error("actor {actor} appears {count} times, expected {expected}")]
    ActorMultiplicity {
        actor: usize,
        count: usize,
        expected: usize,
    },

    #[error("invalid ranking: {0}")]
    Ranking(String),

    #[error("invalid subspace: {0}")]
    Subspace(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing {0} rank in trial {1}")]
    MissingRank(&'static str, usize),

    #[error("feature file: {0}")]
    FeatureFile(#[from] FeatureFileError),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Diagnostics for malformed feature CSV files. Lines are 1-based and count the header.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureFileError {
    #[error("empty file: no header or no data rows")]
    Empty,

    #[error("bad header: {0}")]
    BadHeader(String),

    #[error("line {line}: expected {expected} fields, found {found}")]
    FieldCount {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("line {line}, column {column}: non-numeric value {value:?}")]
    NonNumeric {
        line: u64,
        column: String,
        value: String,
    },

    #[error("line {line}, column {column}: non-finite value {value:?}")]
    NonFinite {
        line: u64,
        column: String,
        value: String,
    },

    #[error("line {line}: duplicate (actor_id, image_id) pair ({actor:?}, {image:?})")]
    DuplicateImage {
        line: u64,
        actor: String,
        image: String,
    },

    #[error("actor {actor:?} has {rows} rows, expected {expected} like the first actor")]
    RaggedActor {
        actor: String,
        rows: usize,
        expected: usize,
    },

    #[error("{0}")]
    Csv(String),
}
