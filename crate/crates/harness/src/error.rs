use kdv_core::KdvError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    /// Bad input; `line` points into the config file when known.
    #[error("{}", match line { Some(l) => format!("config error at line {l}: {message}"), None => format!("config error: {message}") })]
    Config { message: String, line: Option<usize> },

    #[error("numerical failure: {0}")]
    Numerical(#[from] KdvError),

    #[error("i/o error: {0}")]
    Io(String),
}

impl HarnessError {
    pub fn config(message: impl Into<String>) -> Self {
        Self::Config { message: message.into(), line: None }
    }

    pub fn at_line(message: impl Into<String>, line: Option<usize>) -> Self {
        Self::Config { message: message.into(), line }
    }

    /// Parameter problems reported by the core become config errors; the rest stay numerical.
    pub fn from_core_config(e: KdvError) -> Self {
        match e {
            KdvError::InvalidConfig(m) | KdvError::InvalidSolution(m) | KdvError::InvalidLayer(m) => Self::config(m),
            KdvError::ModulusOutOfRange(_) => Self::config(e.to_string()),
            other => Self::Numerical(other),
        }
    }

    /// Process exit status: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } => 2,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}
