use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A†| = {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("operator is not skew-Hermitian (max |A + A†| = {defect:e})")]
    NotSkewHermitian { defect: f64 },
    #[error("operator symmetry flag does not match its entries (defect {defect:e})")]
    SymmetryMismatch { defect: f64 },
    #[error("operator has a nonzero entry outside its declared band at ({row}, {col})")]
    BandViolation { row: usize, col: usize },
    #[error("eigenvalue iteration did not converge")]
    ConvergenceFailure,
    #[error("matrix is singular")]
    Singular,
    #[error("non-finite entry encountered")]
    NonFinite,
    #[error("bases do not match")]
    BasisMismatch,
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid basis: {0}")]
    InvalidBasis(&'static str),
    #[error("operation not supported on this basis kind")]
    UnsupportedBasis,
    #[error("state is not supported on the truncation-safe subspace (max index {max_index})")]
    UnsafeSubspace { max_index: isize },
    #[error("no truncation-safe subspace remains after {applications} applications")]
    DomainExhausted { applications: usize },
    #[error("zero vector has no ray / level-set image")]
    ZeroVector,
    #[error("momentum level must be negative, got {0}")]
    NonNegativeMu(f64),
    #[error("direction is not tangent to the level set (T J = {value:e})")]
    NotTangent { value: f64 },
    #[error("exact_eig integrator requires time-independent coefficients")]
    IntegratorMismatch,
    #[error("invalid time span [{t0}, {t1}]")]
    InvalidTimeSpan { t0: f64, t1: f64 },
    #[error("invalid step: {0}")]
    InvalidStep(&'static str),
    #[error("invalid coefficient function: {0}")]
    InvalidCoefficient(&'static str),
    #[error("Hamiltonian has no terms")]
    EmptyHamiltonian,
    #[error("projector lost rank one (dominant eigenvalue {eigenvalue} at t = {t})")]
    RankCollapse { eigenvalue: f64, t: f64 },
}
