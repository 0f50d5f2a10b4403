use qhs_core::QhsError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("resource cap: {0}")]
    ResourceCap(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn field(name: &str, msg: impl std::fmt::Display) -> Self {
        CliError::Config(format!("{name}: {msg}"))
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    /// 2 config, 3 resource cap, 4 internal invariant or output failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::ResourceCap(_) => 3,
            CliError::Internal(_) | CliError::Io { .. } => 4,
        }
    }
}

impl From<QhsError> for CliError {
    fn from(e: QhsError) -> Self {
        match e {
            QhsError::OrderLimit { .. } | QhsError::ResourceCap(_) => CliError::ResourceCap(e.to_string()),
            QhsError::Integrity(_) | QhsError::NotUnitary { .. } | QhsError::DimensionMismatch { .. } => {
                CliError::Internal(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}
