use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("incompatible spaces: {left} vs {right} modes")]
    DimensionMismatch { left: usize, right: usize },

    #[error("basis labels differ between operands")]
    LabelMismatch,

    #[error("operator dimension {0} is outside the supported range 1..=4")]
    UnsupportedDimension(usize),

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("state has squared norm {0}, which exceeds 1")]
    OverNormalized(f64),

    #[error("weight {index} is negative ({value})")]
    NegativeWeight { index: usize, value: f64 },

    #[error("weights sum to {0}, which exceeds 1")]
    WeightsExceedOne(f64),

    #[error("mean photon number must be finite and non-negative, got {0}")]
    InvalidMeanPhotonNumber(f64),

    #[error("signal set is degenerate at mu = {mu}: perpendicular vector is not unique")]
    DegenerateSignals { mu: f64 },

    #[error("POVM element {outcome} has negative eigenvalue {eigenvalue:e}")]
    PovmNotPositive { outcome: &'static str, eigenvalue: f64 },

    #[error("POVM elements deviate from identity by {deviation:e}")]
    PovmIncomplete { deviation: f64 },

    #[error("detection rate must be in (0, 1], got {0}")]
    InvalidDetectionRate(f64),

    #[error("multiphoton fraction {0} exceeds 1: more multiphotons than detections")]
    InconsistentMultiphotonFraction(f64),

    #[error("{name} = {value} is outside [0, 1]")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },

    #[error("cannot estimate an error rate from an empty sifted key")]
    EmptySiftedKey,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("output failed: {0}")]
    Output(String),
}

impl Error {
    /// Whether the error stems from caller-supplied parameters rather than
    /// the environment.
    pub fn is_usage(&self) -> bool {
        !matches!(self, Error::Output(_))
    }
}
