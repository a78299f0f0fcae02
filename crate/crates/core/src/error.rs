use thiserror::Error;

/// Errors raised by the numeric modules and the command-line front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid precision policy: {0}")]
    InvalidPolicy(String),

    #[error("no agreement within tolerance up to {max_bits} bits (last relative discrepancy {discrepancy:e})")]
    NoConvergenceAtMaxBits { max_bits: u32, discrepancy: f64 },

    #[error("degenerate nodes: {0}")]
    DegenerateNodes(String),

    #[error("node out of range: {0}")]
    OutOfRange(String),

    #[error("outside radius of convergence: {0}")]
    OutsideRadius(String),

    #[error("tail not bounded: {0}")]
    TailNotBounded(String),

    #[error("not of exponential type: {0}")]
    NotExponentialType(String),

    #[error("norm not certifiable: {0}")]
    NormNotCertifiable(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the CLI for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidPolicy(_)
            | Error::InvalidInput(_)
            | Error::InvalidConfig(_)
            | Error::DegenerateNodes(_)
            | Error::OutOfRange(_) => 2,
            Error::TailNotBounded(_)
            | Error::NoConvergenceAtMaxBits { .. }
            | Error::NotExponentialType(_) => 3,
            Error::OutsideRadius(_) | Error::NormNotCertifiable(_) => 4,
            Error::Io(_) => 5,
        }
    }

    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidPolicy(_) => "InvalidPolicy",
            Error::NoConvergenceAtMaxBits { .. } => "NoConvergenceAtMaxBits",
            Error::DegenerateNodes(_) => "DegenerateNodes",
            Error::OutOfRange(_) => "OutOfRange",
            Error::OutsideRadius(_) => "OutsideRadius",
            Error::TailNotBounded(_) => "TailNotBounded",
            Error::NotExponentialType(_) => "NotExponentialType",
            Error::NormNotCertifiable(_) => "NormNotCertifiable",
            Error::InvalidInput(_) => "InvalidInput",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
