use std::path::PathBuf;

use crate::enumerate::WalkClass;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed walk: step {index} is not a unit lattice step")]
    MalformedWalk { index: usize },

    #[error("walk must start at the origin and contain at least one vertex")]
    NotRooted,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("unsupported dimension {d} for class {class}")]
    UnsupportedDimension { d: usize, class: WalkClass },

    #[error("count overflow at n={n}, v={v}, h={h}")]
    Overflow { n: usize, v: u32, h: i32 },

    #[error("enumeration exceeded its node budget of {limit}; partial results discarded")]
    ResourceLimit { limit: u64 },

    #[error("symmetry reduction is not valid for class {0}")]
    SymmetryUnsupported(WalkClass),

    #[error("expected a table of class {expected}, got {found}")]
    ClassMismatch { expected: String, found: WalkClass },

    #[error("length {n} exceeds table n_max {n_max}")]
    LengthOutOfRange { n: usize, n_max: usize },

    #[error("partition function slice is empty at n={n}")]
    EmptyPartition { n: usize },

    #[error("extrapolation needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("no interior variance peak at n={n} (peak index {index} of {len})")]
    NoInteriorPeak { n: usize, index: usize, len: usize },

    #[error("root not bracketed: f({lo})={f_lo}, f({hi})={f_hi}")]
    NotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("estimate and exact table do not overlap in length")]
    DisjointRanges,

    #[error("missing table of class {0}")]
    MissingTable(String),

    #[error("invalid grid spec `{0}`")]
    GridSpec(String),

    #[error("table parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("manifest checksum mismatch for {0}")]
    Checksum(PathBuf),

    #[error("unsupported schema version {0}")]
    Schema(u32),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Short stable identifier used in machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MalformedWalk { .. } => "malformed-walk",
            Error::NotRooted => "not-rooted",
            Error::Dimension { .. } => "dimension",
            Error::UnsupportedDimension { .. } => "unsupported-dimension",
            Error::Overflow { .. } => "overflow",
            Error::ResourceLimit { .. } => "resource-limit",
            Error::SymmetryUnsupported(_) => "symmetry-unsupported",
            Error::ClassMismatch { .. } => "class-mismatch",
            Error::LengthOutOfRange { .. } => "length-out-of-range",
            Error::EmptyPartition { .. } => "empty-partition",
            Error::TooFewPoints { .. } => "too-few-points",
            Error::InvalidWeight(_) => "invalid-weight",
            Error::NoInteriorPeak { .. } => "bracket-failure",
            Error::NotBracketed { .. } => "not-bracketed",
            Error::DisjointRanges => "disjoint-ranges",
            Error::MissingTable(_) => "missing-table",
            Error::GridSpec(_) => "grid-spec",
            Error::Parse { .. } => "parse",
            Error::Checksum(_) => "checksum",
            Error::Schema(_) => "schema",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }
}
