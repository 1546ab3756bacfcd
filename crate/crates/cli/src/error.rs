use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("output failed validation: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] plasmon_shift::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable label for the stderr summary.
    pub fn kind(&self) -> &'static str {
        use plasmon_shift::Error as E;
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config { .. } => "config",
            CliError::Io { .. } => "io",
            CliError::Validation(_) => "validation",
            CliError::Core(e) => match e {
                E::InvalidParameter(_) | E::Domain(_) | E::OutOfRange { .. } => "invalid-parameter",
                E::Unsupported(_) | E::UnsupportedContinuation(_) | E::NotDrude => "unsupported",
                E::Parse { .. } | E::TooFewSamples { .. } => "input",
                E::Io { .. } => "io",
                E::UnderResolved { .. } | E::HorizonExceeded { .. } => "under-resolved",
                E::Normalization { .. } | E::Validation(_) => "validation",
                _ => "numerical",
            },
        }
    }

    /// 2 for problems with the request itself, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "usage" | "config" | "invalid-parameter" | "unsupported" => 2,
            _ => 1,
        }
    }

    /// One JSON object for machine consumption.
    pub fn summary(&self) -> String {
        serde_json::json!({
            "status": "error",
            "kind": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        })
        .to_string()
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
