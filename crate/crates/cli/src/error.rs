use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("invalid {key}: {reason}")]
    Semantic { key: String, reason: String },
    #[error("unknown key {0}")]
    UnknownKey(String),
    #[error(transparent)]
    Model(#[from] qreg_dephasing::Error),
    #[error("tolerance breach: {0}")]
    Tolerance(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 validation, 2 tolerance breach, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        use qreg_dephasing::Error as E;
        match self {
            CliError::Tolerance(_) | CliError::Model(E::TruncationLeakage { .. } | E::NormDrift(_)) => 2,
            CliError::Io { .. } => 3,
            _ => 1,
        }
    }
}
