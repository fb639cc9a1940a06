use thiserror::Error;

/// Errors raised by diagnostics, numerics and model adapters.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AuditError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown model label `{0}`")]
    UnknownModel(String),

    #[error("unknown ordering axis `{0}`")]
    UnknownOrderKey(String),

    #[error("ordering axis `{0}` is categorical; a numeric column is required")]
    CategoricalOrderKey(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("design matrix is rank deficient at column {column} (`{name}`)")]
    Singular { column: usize, name: String },

    #[error("score `{score}` is undefined: {reason}")]
    UndefinedScore { score: String, reason: String },

    #[error("degenerate runs statistic: {0}")]
    DegenerateRuns(String),

    #[error("degenerate bandwidth: {0}")]
    DegenerateBandwidth(String),

    #[error(
        "classification input needs both classes (positives: {positives}, negatives: {negatives})"
    )]
    SingleClass { positives: usize, negatives: usize },

    #[error("model `{model}` lacks capability `{capability}`")]
    MissingCapability { model: String, capability: String },

    #[error("probability {0} outside the open interval (0, 1)")]
    ProbabilityOutOfRange(f64),

    #[error("adapter launch failed: {0}")]
    AdapterLaunch(String),

    #[error("adapter protocol error: {message} (last line: {line:?})")]
    AdapterProtocol { message: String, line: String },

    #[error("adapter failure: {0}")]
    AdapterFailure(String),
}

impl AuditError {
    /// True for failures originating in an external adapter process.
    pub fn is_adapter_error(&self) -> bool {
        matches!(
            self,
            AuditError::AdapterLaunch(_)
                | AuditError::AdapterProtocol { .. }
                | AuditError::AdapterFailure(_)
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        AuditError::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, AuditError>;
