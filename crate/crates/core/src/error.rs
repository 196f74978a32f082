use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operation needs the complex configuration")]
    FieldMismatch,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("element outside the domain algebra")]
    DomainMismatch,
    #[error("incompatible data: {0}")]
    IncompatibleData(String),
    #[error("morphism is not sharp (residual {0:e})")]
    NotSharp(f64),
    #[error("incidence is only defined between elements of distinct kinds")]
    KindMismatch,
    #[error("lines are not coplanar")]
    NotCoplanar,
    #[error("lines have the same shadow")]
    SameShadow,
    #[error("lines have different shadows")]
    DifferentShadows,
    #[error("points coincide")]
    CoincidentPoints,
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("element {0} is not in the residue")]
    NotInResidue(usize),
    #[error("search failed: {0}")]
    SearchFailed(String),
    #[error("line is not admissible: {0}")]
    NotAdmissible(String),
    #[error("point is not on the shadow of the line")]
    PointOffLine,
    #[error("invariant must have modulus < 1, got {0:e}")]
    BadInvariant(f64),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
