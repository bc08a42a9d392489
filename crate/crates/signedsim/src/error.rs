use thiserror::Error;

/// Crate-wide error type.
///
/// Variants mirror the failure modes of the individual operations; see the
/// module docs for which operations raise which variants.
#[derive(Debug, Error)]
pub enum Error {
    #[error("label mismatch: {0}")]
    LabelMismatch(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("empty sample: counts sum to zero")]
    EmptySample,

    #[error("missing context: {0}")]
    MissingContext(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("solver stalled after {0} simplex iterations")]
    SolverStall(usize),

    #[error("pushforward image is negative at index {index}: {value}")]
    NegativeImage { index: usize, value: f64 },

    #[error("signed normalization failure: total net mass {0} is not positive")]
    SignedNormalizationFailure(f64),

    #[error("negative net mass {value} at index {index}; raw net masses {net_masses:?}")]
    NegativeNetMass {
        index: usize,
        value: f64,
        net_masses: Vec<f64>,
    },

    #[error("count-vector lattice too large: {size} exceeds cap {cap}")]
    TooLarge { size: u128, cap: u128 },

    #[error("ball event has zero probability")]
    ZeroProbability,

    #[error("singular covariance: p[{0}] = 0 where q differs from p")]
    SingularCovariance(usize),

    #[error("optimizer failed to converge: {0}")]
    NonConvergence(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("finite-difference step {0} above supported range (max 1e-3)")]
    StepTooLarge(f64),

    #[error("negativity shape violation: {0}")]
    ShapeViolation(String),

    #[error("model parse error: {0}")]
    ModelParse(String),

    #[error("model violates no-signaling: worst marginal gap {0}")]
    SignalingModel(f64),

    #[error("internal consistency check failed: {0}")]
    InternalCheck(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
