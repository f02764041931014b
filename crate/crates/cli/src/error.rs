use std::fmt;

/// A failure carrying the process exit code it maps to.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input, invalid configuration.
    Usage(String),
    /// Divergent variance, undefined band, EM breakdown.
    Numerical(String),
    /// `--method both` found the two estimators apart.
    Equivalence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Numerical(_) => 2,
            Self::Equivalence(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) | Self::Numerical(m) | Self::Equivalence(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<kmest_core::Error> for CliError {
    fn from(e: kmest_core::Error) -> Self {
        use kmest_core::Error as E;
        match e {
            E::NoObservations
            | E::InvalidTime(_)
            | E::NegativeTime(_)
            | E::InvalidParameter(_)
            | E::InvalidMeasure(_) => Self::Usage(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Usage(format!("I/O error: {e}"))
    }
}
