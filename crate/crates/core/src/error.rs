use thiserror::Error;

/// Errors produced by the tensor kernel and the algebra builders.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("unknown space label `{0}`")]
    UnknownSpace(String),

    #[error("duplicate space label `{0}`")]
    DuplicateLabel(String),

    #[error("dimension mismatch for space `{label}`: {expected} vs {found}")]
    DimMismatch {
        label: String,
        expected: usize,
        found: usize,
    },

    #[error("matrix is {rows}x{cols} but the space list implies dimension {expected}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
    },

    #[error("index sets overlap on label `{0}`")]
    OverlappingIndexSets(String),

    #[error("space `{0}` has no spectral value but one is required here")]
    MissingSpectral(String),

    #[error("certification failed for `{identity}`: residual {residual:.3e} exceeds {tolerance:.3e}")]
    CertificationFailed {
        identity: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("operator is numerically singular ({0})")]
    Singular(String),

    #[error("degenerate parameter: {0}")]
    DegenerateParameter(String),

    #[error("dressing operator is not certified for this index set")]
    UncertifiedDressing,

    #[error("spectral values must coincide within the index set ({0})")]
    NonCoincident(String),

    #[error("total dimension {total} exceeds the guard limit {limit}")]
    DimensionGuard { total: usize, limit: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
