use thiserror::Error;

/// Failures raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("vectors are linearly dependent (vector {index})")]
    LinearDependence { index: usize },
    #[error("null vector encountered under the indefinite inner product (vector {index}, norm {norm:e})")]
    NullNormEncountered { index: usize, norm: f64 },
    #[error("matrix is not pseudohermitian (deviation {deviation:e})")]
    NotPseudoHermitian { deviation: f64 },
    #[error("pseudounitary diagonalization failed: {0}")]
    PseudoDiagonalizationFailure(String),
    #[error("matrix is not an orthogonal projector (deviation {deviation:e})")]
    NotAProjector { deviation: f64 },
    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not pseudounitary (deviation {deviation:e})")]
    NotPseudoUnitary { deviation: f64 },
    #[error("error-correction conditions violated (residual {residual:e})")]
    ConditionsViolated { residual: f64 },
    #[error("syndrome subspaces {first} and {second} are not orthogonal (overlap {overlap:e})")]
    OrthogonalityViolation {
        first: usize,
        second: usize,
        overlap: f64,
    },
    #[error("negative part is nonzero on the code space but no scanned state gives a negative outcome")]
    WitnessSearchFailed,
    #[error("recovered state has vanishing trace ({trace:e})")]
    ZeroTrace { trace: f64 },
    #[error("the two operator sets generate different maps (B-matrix deviation {deviation:e})")]
    MapsNotEqual { deviation: f64 },
    #[error("the two signed ensembles generate different operators (deviation {deviation:e})")]
    OperatorsNotEqual { deviation: f64 },
    #[error("coefficient matrix is singular (smallest singular value {smallest:e}); the operator set is not a base map")]
    SingularCoefficientMatrix { smallest: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn dims(expected: impl ToString, actual: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
