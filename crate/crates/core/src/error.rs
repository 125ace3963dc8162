use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the engine can report.
///
/// The CLI maps these onto process exit codes via [`Error::exit_code`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown action label `{0}`")]
    UnknownAction(String),
    #[error("unknown nature-state label `{0}`")]
    UnknownState(String),
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("invalid mixed action: {0}")]
    InvalidMixture(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("attack classification: {0}")]
    Classification(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("parse error: {0}")]
    Parse(String),
    /// A proven implication failed on a concrete instance. Always an engine bug.
    #[error("internal consistency violation: {0}")]
    Consistency(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 2,
            Error::Capacity(_) => 4,
            Error::Consistency(_) => 5,
            _ => 3,
        }
    }
}
