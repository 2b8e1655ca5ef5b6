use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("directed cycle through variable `{0}`")]
    Cycle(String),
    #[error("row {row} of `{node}` sums to {sum} (expected 1)")]
    RowSum { node: String, row: usize, sum: f64 },
    #[error("probability {value} in `{node}` is outside [0, 1]")]
    ProbabilityRange { node: String, value: f64 },
    #[error("additive weights of `{node}` sum to {sum} (expected 1)")]
    WeightSum { node: String, sum: f64 },
    #[error("additive terms of `{node}` do not cover parent `{missing}`")]
    SubsetUnion { node: String, missing: String },
    #[error("reference to undeclared {kind} `{name}`")]
    DanglingReference { kind: &'static str, name: String },
    #[error("invalid declaration: {0}")]
    Declaration(String),
    #[error("table shape mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown state `{state}` for variable `{variable}`")]
    UnknownState { variable: String, state: String },
    #[error("{what} of size {size} exceeds the limit {limit}")]
    SizeLimit {
        what: &'static str,
        size: u128,
        limit: u128,
    },
    #[error("evidence has zero probability")]
    ImpossibleEvidence,
    #[error("variable `{0}` does not have an additive CPT with at least two terms")]
    NotAdditive(String),
    #[error("term index {index} out of range for `{node}` ({terms} terms)")]
    BadTermIndex {
        node: String,
        index: usize,
        terms: usize,
    },
    #[error("graph is not chordal under the given elimination order (vertex `{0}`)")]
    NonChordal(String),
    #[error("family of `{0}` is not contained in any clique")]
    FamilyNotCovered(String),
    #[error("variable `{0}` is not binary")]
    NonBinary(String),
    #[error(
        "weights lie on the simplex boundary; the stationarity residual needs interior weights"
    )]
    BoundaryWeights,
    #[error("networks differ in structure: {0}")]
    StructureMismatch(String),
    #[error("graph has no vertices")]
    EmptyVertexSet,
    #[error("every grid point assigns zero likelihood to the case")]
    ImpossibleCase,
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("{0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable identifier for each failure kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "syntax",
            Error::Cycle(_) => "cycle",
            Error::RowSum { .. } => "row-sum",
            Error::ProbabilityRange { .. } => "probability-range",
            Error::WeightSum { .. } => "weight-sum",
            Error::SubsetUnion { .. } => "subset-union",
            Error::DanglingReference { .. } => "dangling-reference",
            Error::Declaration(_) => "declaration",
            Error::DimensionMismatch(_) => "dimension-mismatch",
            Error::UnknownVariable(_) => "unknown-variable",
            Error::UnknownState { .. } => "unknown-state",
            Error::SizeLimit { .. } => "size-limit",
            Error::ImpossibleEvidence => "impossible-evidence",
            Error::NotAdditive(_) => "not-additive",
            Error::BadTermIndex { .. } => "bad-term-index",
            Error::NonChordal(_) => "non-chordal",
            Error::FamilyNotCovered(_) => "family-not-covered",
            Error::NonBinary(_) => "non-binary",
            Error::BoundaryWeights => "boundary-weights",
            Error::StructureMismatch(_) => "structure-mismatch",
            Error::EmptyVertexSet => "empty-vertex-set",
            Error::ImpossibleCase => "impossible-case",
            Error::InvalidWeights(_) => "invalid-weights",
            Error::Io(_) => "io",
        }
    }

    /// Errors that indicate a defect in this crate rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::NonChordal(_) | Error::FamilyNotCovered(_))
    }
}
