use thiserror::Error;

/// Errors raised by the computational modules.
///
/// Validation failures (bad input) are distinguished from [`Error::InternalInconsistency`],
/// which signals that two independent numerical routes disagreed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input not Hermitian: max |M - M*| = {deviation:e} exceeds {bound:e}")]
    NotHermitian { deviation: f64, bound: f64 },

    #[error("input not positive semidefinite: eigenvalue {min_eigenvalue:e} below -{threshold:e}")]
    NotPsd { min_eigenvalue: f64, threshold: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("subspace basis not orthonormal: max |B*B - I| = {deviation:e}")]
    NotOrthonormal { deviation: f64 },

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("no convergence after {iterations} doublings (discrepancy {discrepancy:e})")]
    NoConvergence { iterations: usize, discrepancy: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("not a ring of sets: {0}")]
    NotARing(String),

    #[error("invalid charge: {0}")]
    InvalidCharge(String),

    #[error("charges live on different rings")]
    RingMismatch,

    #[error("invalid *-algebra: {0}")]
    InvalidAlgebra(String),

    #[error("functionals live on different algebras")]
    AlgebraMismatch,

    #[error("functional not representable: Riesz system residual {residual:e} exceeds {bound:e}")]
    NotRepresentable { residual: f64, bound: f64 },

    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    /// True for disagreements between independent oracles, as opposed to bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::InternalInconsistency(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
