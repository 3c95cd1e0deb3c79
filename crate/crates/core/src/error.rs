use thiserror::Error;

/// Errors produced by the evaluation library.
#[derive(Error, Debug)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// A malformed input row. `line` is 1-based and counts the header.
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("duplicate quality score for sample `{sample}` and algorithm `{algorithm}`")]
    DuplicateKey { sample: String, algorithm: String },

    #[error("line {line}: self-comparison of sample `{sample}`")]
    SelfComparison { line: u64, sample: String },

    #[error("no quality score for sample `{sample}` under algorithm `{algorithm}`")]
    MissingScore { sample: String, algorithm: String },

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("comparison set mixes mated and non-mated comparisons")]
    MixedKinds,

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate calibration: all calibration scores equal {0}")]
    DegenerateCalibration(f64),

    #[error("curve divergence undefined: raw curve pAUC is zero")]
    UndefinedDivergence,

    #[error("correlation undefined: {0} has zero variance")]
    UndefinedCorrelation(&'static str),

    #[error("d' undefined at discard fraction {discard_fraction}: both score variances are zero")]
    SingularStep { discard_fraction: f64 },

    #[error("all offset scales are equal; expected placements undefined")]
    DegenerateScales,

    #[error("serialisation error: {0}")]
    Serialise(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
