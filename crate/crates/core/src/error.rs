use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the numerical layers.
///
/// Orbit fates are never errors; they are reported as verdicts.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular parameter: {0}")]
    SingularParameter(String),

    #[error("point lies within pole tolerance of pole p_{0}")]
    PoleProximity(i64),

    #[error("{0} is an omitted asymptotic value")]
    OmittedValue(Complex64),

    #[error("Newton iteration diverged from seed {seed}")]
    NewtonDivergence { seed: Complex64 },

    #[error("Newton iteration left the search window (seed {seed})")]
    SeedEscaped { seed: Complex64 },

    #[error("orbit of {0} is not attracted to the fixed point within budget")]
    NotInBasin(Complex64),

    #[error("parameter is not in the shift locus")]
    NotShiftLocus,

    #[error("parameter is not in S_lambda")]
    NotSLambda,

    #[error("could not decide which asymptotic value bounds the linearization domain")]
    PartitionUnresolved,

    #[error("inverse branch label is ambiguous (fractional part {0})")]
    BranchAmbiguity(f64),

    #[error("prepole composition passed through an omitted value")]
    CompositionThroughOmittedValue,

    #[error("path continuation stalled at t = {t}")]
    ContinuationStuck { t: f64 },

    #[error("S_* trace lost on ray {ray} after {found} points")]
    TraceLost {
        ray: usize,
        found: usize,
        partial: Vec<Complex64>,
    },

    #[error("invalid render specification: {0}")]
    InvalidSpec(String),

    #[error("failed to encode image: {0}")]
    Encode(String),
}

pub type Result<T> = std::result::Result<T, Error>;
