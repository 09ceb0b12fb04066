use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("face ({0}, {1}, {2}) is shared by more than two tetrahedra")]
    NonManifoldFace(usize, usize, usize),
    #[error("tetrahedron {0} has non-positive signed volume")]
    InvertedTet(usize),
    #[error("degenerate element map, |det J| = {0:e}")]
    DegenerateTet(f64),
    #[error("unsupported edge element order {0}, supported orders are 0 and 1")]
    UnsupportedOrder(usize),
    #[error("unsupported quadrature degree {0}, supported range is 1..=10")]
    UnsupportedDegree(usize),
    #[error("unknown coefficient preset `{0}`")]
    UnknownPreset(String),
    #[error("sampled coefficient bounds straddle 1; no coercivity case applies")]
    NoCaseMatch,
    #[error("coefficient case could not be classified: {0}")]
    CaseUnsupported(String),
    #[error("spaces are incompatible: {0}")]
    SpaceMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("sparse factorization failed (the shift may coincide with an eigenvalue)")]
    FactorizationFailed,
    #[error("eigensolver converged {converged} of {requested} requested pairs")]
    NoConvergence { converged: usize, requested: usize },
    #[error("problem dimension {0} exceeds the dense-solve limit {1}")]
    DimensionTooLarge(usize, usize),
    #[error("no eigenvalues found in the requested window")]
    NoEigenvaluesInWindow,
    #[error("extrapolation needs at least 3 values, got {0}")]
    InsufficientData(usize),
    #[error("singular system in source-problem solve")]
    SingularSystem,
    #[error("|k - k_h| underflows, convergence rate undefined")]
    DegenerateError,
    #[error("convergence run failed at n = {n}: {source}")]
    Convergence { n: usize, source: Box<Error> },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
