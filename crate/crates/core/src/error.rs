use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A function was called with an argument outside its contract.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unsupported instruction class: {0}")]
    UnsupportedClass(String),

    #[error("invalid machine description: {0}")]
    InvalidSpec(String),

    #[error("empty spectrum")]
    EmptySpectrum,

    /// The characteristic equation has no root above 1, so capacity would be <= 0.
    #[error("degenerate spectrum: total instruction count {total} < 2")]
    DegenerateSpectrum { total: String },

    #[error("N({t}) = 0: T is not a multiple of the latency gcd {gcd}")]
    PeriodMisaligned { t: u64, gcd: u64 },

    #[error("unknown memory level `{0}`")]
    UnknownLevel(String),

    #[error("invalid factor {0}: must be finite and > 0")]
    InvalidFactor(f64),

    #[error("selector `{0}` matches no instruction class")]
    NoMatchingClass(String),

    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("normalization: {0}")]
    Normalization(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            file: "<input>".to_owned(),
            line,
            message: message.into(),
        }
    }

    /// Attach a file name to a parse diagnostic. Other variants pass through.
    pub fn in_file(self, name: &str) -> Self {
        match self {
            Error::Parse { line, message, .. } => Error::Parse {
                file: name.to_owned(),
                line,
                message,
            },
            other => other,
        }
    }
}
