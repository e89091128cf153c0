//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A factorization pivot underflowed; the input is singular to
    /// working precision.
    #[error("singular input: {0}")]
    SingularInput(String),

    /// A Cartan vector was required to be regular (strictly decreasing
    /// entries) and is not.
    #[error("not a regular Cartan vector: {0}")]
    NotRegular(String),

    /// The operation needs a group representative and the point does
    /// not carry one.
    #[error("point carries no group representative")]
    MissingRepresentative,

    /// A boundary direction was required to be regular.
    #[error("boundary direction is not regular: {0}")]
    NotRegularDirection(String),

    /// Two chambers (or a chamber and a flag) are not opposite; a
    /// transversality minor fell below tolerance.
    #[error("chambers are not opposite: {0}")]
    NotOpposite(String),

    /// A boundary point does not lie in the boundary of the given flat.
    #[error("boundary point not asymptotic to the flat: {0}")]
    NotInFlat(String),

    /// Iterative minimization stalled above tolerance.
    #[error("descent failed to converge: {0}")]
    NonConvergence(String),

    /// The Busemann level was never crossed along the ray; a
    /// precondition was violated upstream.
    #[error("ray does not cross the horosphere: {0}")]
    NoCrossing(String),

    /// The chamber-to-center angular margin is degenerate.
    #[error("degenerate chamber margin: {0}")]
    DegenerateChamber(String),

    /// A sampled post-condition of a calibrated construction failed at
    /// the configured constants.
    #[error("calibration failure in {construction}: {detail}")]
    CalibrationFailure { construction: String, detail: String },

    /// A constructed pair left the admissible direction/point set.
    #[error("membership violation: {0}")]
    MembershipViolation(String),

    /// The Whitney decomposition exceeded its configured cube budget.
    #[error("resolution budget exceeded: {0}")]
    ResolutionExceeded(String),

    /// Randomized search exhausted its tries.
    #[error("exhausted {0} randomized tries")]
    ExhaustedTries(usize),

    /// An eigensolve or similar numeric kernel failed.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// Invalid run configuration or input file.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Input file violates the documented schema.
    #[error("schema violation: {0}")]
    SchemaViolation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
