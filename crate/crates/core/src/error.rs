use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter fell outside its legal range.
    #[error("{field} must be {}{range}, got {value}", range_preposition(.range))]
    InvalidParameter {
        field: String,
        range: String,
        value: String,
    },

    #[error("{0}: photon collection is empty")]
    EmptyPhotons(&'static str),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn range_preposition(range: &str) -> &'static str {
    if range.starts_with(['[', '(']) {
        "in "
    } else {
        ""
    }
}

impl Error {
    pub fn invalid(field: impl Into<String>, range: impl Into<String>, value: impl ToString) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            range: range.into(),
            value: value.to_string(),
        }
    }

    /// True for errors caused by the caller's input rather than the environment.
    pub fn is_config(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
