use thiserror::Error;

/// Errors raised anywhere in the toolchain.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("map value {value} at position {position} is out of range for target set of size {target_size}")]
    IndexOutOfRange {
        position: usize,
        value: usize,
        target_size: usize,
    },
    #[error("map table has {got} entries, expected {expected} (source size x arity)")]
    ArityMismatch { expected: usize, got: usize },
    #[error("map `{map}` has source set `{found}`, expected `{expected}`")]
    SourceMismatch {
        map: String,
        expected: String,
        found: String,
    },
    #[error("adjacency is not symmetric: {from} lists {to} but not vice versa")]
    AsymmetricAdjacency { from: usize, to: usize },

    #[error("entry ({row}, {col}) is outside the sparsity pattern")]
    OutsideSparsity { row: usize, col: usize },
    #[error("reduction over an empty list of partials")]
    EmptyPartials,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("unbound identifier `{0}`")]
    UnboundIdentifier(String),
    #[error("unroll factor {factor} does not divide trip count {trip_count}")]
    NonDividingFactor { factor: usize, trip_count: usize },
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("no loop with id {0}")]
    NoSuchLoop(usize),
    #[error("vector width {0} is not one of 2, 4, 8")]
    InvalidVectorWidth(usize),

    #[error("illegal access: {0}")]
    IllegalAccess(String),
    #[error("map source mismatch: {0}")]
    MapSourceMismatch(String),

    #[error("mesh subdivision count must be at least 1, got {0}")]
    InvalidSubdivision(usize),
    #[error("parse error on line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("facet {0:?} is shared by more than two cells")]
    NonManifold(Vec<usize>),
    #[error("I/O error: {0}")]
    Io(String),

    #[error("element and quadrature rule are defined on different cells")]
    CellMismatch,
    #[error("unsupported element: {0}")]
    UnsupportedElement(String),
    #[error("unsupported form: {0}")]
    UnsupportedForm(String),
    #[error("functions are defined on different spaces")]
    SpaceMismatch,
    #[error("diagonal entry ({0}, {0}) is missing from the sparsity pattern")]
    MissingDiagonal(usize),

    #[error("CG breakdown at iteration {iteration}: p^T A p = {curvature:e}")]
    IndefiniteBreakdown { iteration: usize, curvature: f64 },
    #[error("Jacobi preconditioner: zero or non-finite diagonal at row {0}")]
    ZeroDiagonal(usize),

    #[error("instability detected at step {step}: |p|_inf = {norm:e} exceeds bound {bound:e}")]
    InstabilityDetected { step: usize, norm: f64, bound: f64 },
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
