use crate::space::Element;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("element {element} is not in the space ({context})")]
    OutOfSpace { element: Element, context: String },

    #[error("spaces do not match: {0}")]
    SpaceMismatch(String),

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("map is not injective: {first} and {second} have the same image")]
    NotInjective { first: Element, second: Element },

    #[error("map is not a bijection: {0}")]
    NotBijective(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("undecided after {steps} steps: {context}")]
    Undecided { steps: u64, context: String },

    #[error("not eventually periodic: {0}")]
    NotPeriodic(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn undecided(steps: u64, context: impl Into<String>) -> Error {
        Error::Undecided { steps, context: context.into() }
    }

    /// Exit status the command-line tool uses for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 1,
            Error::Undecided { .. } => 3,
            _ => 2,
        }
    }
}
