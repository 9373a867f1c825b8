use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// Variants are split into input problems ([`Error::is_validation`]) and
/// failures that happen while computing on otherwise valid input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: unsupported section [{section}]")]
    UnsupportedSection { line: usize, section: String },

    #[error("missing required section [{0}]")]
    MissingSection(&'static str),

    #[error("line {line}: unknown node \"{id}\"")]
    UnknownNode { line: usize, id: String },

    #[error("line {line}: duplicate id \"{id}\"")]
    DuplicateId { line: usize, id: String },

    #[error("network is disconnected: node \"{0}\" is unreachable")]
    Disconnected(String),

    #[error("network has no reservoir")]
    NoReservoir,

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular hydraulic system: {0}")]
    SingularSystem(String),

    #[error("CFL violation on pipe \"{pipe}\": velocity*timestep = {travel} m exceeds segment length {segment} m")]
    CflViolation { pipe: String, travel: f64, segment: f64 },

    #[error("scenario {scenario}: {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },

    #[error("data matrix has rank 0")]
    RankZero,

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("sampling set does not reach full rank: sigma_min = {0:e}")]
    RankDeficient(f64),

    #[error("exhaustive search over {0} subsets exceeds the 1e6 limit")]
    SearchTooLarge(u128),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("threshold {threshold} selects no node; the maximum usable threshold is {max}")]
    EmptyPlan { threshold: usize, max: usize },

    #[error("full plan fails the accuracy threshold: nrmse {achieved} > {threshold}")]
    ThresholdUnreachable { achieved: f64, threshold: f64 },

    #[error("training diverged at epoch {0}: non-finite loss")]
    Diverged(usize),

    #[error("model has no normalization metadata")]
    MissingNormalization,

    #[error("pipeline stage \"{stage}\" failed (partial manifest: {partial}): {source}")]
    Stage {
        stage: String,
        partial: bool,
        #[source]
        source: Box<Error>,
    },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// `true` when the error stems from malformed or inconsistent input rather
    /// than from a failure during computation.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Syntax { .. }
            | Error::UnsupportedSection { .. }
            | Error::MissingSection(_)
            | Error::UnknownNode { .. }
            | Error::DuplicateId { .. }
            | Error::Disconnected(_)
            | Error::NoReservoir
            | Error::InvalidScenario(_)
            | Error::InvalidArgument(_)
            | Error::DimensionMismatch { .. }
            | Error::Json(_)
            | Error::Csv(_)
            | Error::Config(_) => true,
            Error::Scenario { source, .. } | Error::Stage { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
