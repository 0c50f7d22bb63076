use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors surfaced by every stage of the pipeline. The display string is
/// prefixed with the stage that raised it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("models: {0}")]
    Model(String),
    #[error("svgd: non-finite posterior gradient at particle {index}")]
    NonFiniteGradient { index: usize },
    #[error("svgd: {0}")]
    Svgd(String),
    #[error("roadmap: {0}")]
    Roadmap(String),
    #[error("planner: query rejected, {which} configuration has p(z=1|x) = {probability:.4} < beta = {beta}")]
    QueryRejected { which: &'static str, probability: f64, beta: f64 },
    #[error("metrics: {0}")]
    Metrics(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("io: {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse { path: path.into(), message: message.to_string() }
    }
}
