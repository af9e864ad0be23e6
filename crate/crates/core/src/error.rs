use thiserror::Error;

/// Errors raised by the numerical and combinatorial routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is singular or its smallest singular value underflows the log-scale representation")]
    SingularInput,
    #[error("eigensolver failed to converge")]
    EigensolveFailure,
    #[error("singular value decomposition failed to converge")]
    SvdFailure,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("columns are linearly dependent")]
    RankDeficient,
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("index out of range: {0}")]
    InvalidIndex(String),
    #[error("unknown letter {0:?}")]
    UnknownLetter(char),
    #[error("determinant is not one (got {0})")]
    DeterminantNotOne(f64),
    #[error("representations act on different presentations")]
    PresentationMismatch,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid perturbation magnitude {0}")]
    InvalidMagnitude(f64),
    #[error("construction failed: {0}")]
    ConstructionFailure(String),
    #[error("relator defect {0:e} exceeds tolerance")]
    RelatorDefect(f64),
    #[error("profile radius {radius} is too small for ell_min = {ell_min}")]
    InsufficientRadius { radius: usize, ell_min: usize },
    #[error("no ball element is P_{0}-proximal")]
    NoProximalElements(usize),
    #[error("element is not biproximal")]
    NotBiproximal,
    #[error("attracting and repelling data are not transverse: {0}")]
    TransversalityFailure(String),
    #[error("malformed representation document: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
