use std::fmt;
use std::path::Path;

use thiserror::Error;
use volsent::cnn_sentiment::SentimentError;
use volsent::eval::EvalError;
use volsent::garch::GarchError;
use volsent::lstm::LstmError;
use volsent::marketdata::DataError;
use volsent::svr::SvrError;
use volsent::textprep::TextError;
use volsent::word2vec::W2vError;

/// Error category; each maps to one process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Config,
    Data,
    Numeric,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Config => 2,
            Category::Data => 3,
            Category::Numeric => 4,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Config => "config",
            Category::Data => "data",
            Category::Numeric => "numeric",
        })
    }
}

#[derive(Debug, Error)]
#[error("{message}")]
pub struct CliError {
    pub category: Category,
    pub message: String,
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { category: Category::Config, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self { category: Category::Data, message: message.into() }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self { category: Category::Numeric, message: message.into() }
    }

    pub fn missing_input(what: &str, path: &Path) -> Self {
        Self::data(format!("MissingInput: {what} not found: {}", path.display()))
    }

    /// Prefixes the message with the file it concerns.
    pub fn in_file(mut self, path: &Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }

    /// The single diagnostic line written to stderr.
    pub fn diagnostic(&self) -> String {
        format!("error[{}]: {}", self.category, self.message)
    }
}

pub fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::data(format!("{}: {e}", path.display()))
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<TextError> for CliError {
    fn from(e: TextError) -> Self {
        match e {
            TextError::InvalidMinCount => CliError::config(e.to_string()),
            _ => CliError::data(e.to_string()),
        }
    }
}

impl From<W2vError> for CliError {
    fn from(e: W2vError) -> Self {
        match e {
            W2vError::InvalidConfig(_) => CliError::config(e.to_string()),
            _ => CliError::data(e.to_string()),
        }
    }
}

impl From<SentimentError> for CliError {
    fn from(e: SentimentError) -> Self {
        match e {
            SentimentError::InvalidConfig(_) => CliError::config(e.to_string()),
            SentimentError::Diverged => CliError::numeric(e.to_string()),
            SentimentError::SingleClassCorpus => CliError::data(format!("SingleClassCorpus: {e}")),
            _ => CliError::data(e.to_string()),
        }
    }
}

impl From<GarchError> for CliError {
    fn from(e: GarchError) -> Self {
        match e {
            GarchError::InvalidOrder(_) => CliError::config(e.to_string()),
            GarchError::SeriesTooShort { .. } | GarchError::Parse(_) => CliError::data(e.to_string()),
            _ => CliError::numeric(e.to_string()),
        }
    }
}

impl From<SvrError> for CliError {
    fn from(e: SvrError) -> Self {
        match e {
            SvrError::InvalidHyper(_) | SvrError::InvalidGrid(_) => CliError::config(e.to_string()),
            SvrError::NonFiniteTarget(_) => CliError::numeric(e.to_string()),
            _ => CliError::data(e.to_string()),
        }
    }
}

impl From<LstmError> for CliError {
    fn from(e: LstmError) -> Self {
        match e {
            LstmError::InvalidConfig(_) => CliError::config(e.to_string()),
            LstmError::Diverged => CliError::numeric(e.to_string()),
            _ => CliError::data(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::LengthMismatch { .. } | EvalError::EmptySequence | EvalError::TooFewPoints(_) => {
                CliError::data(e.to_string())
            }
            _ => CliError::numeric(e.to_string()),
        }
    }
}
