use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("config field `{field}`: {msg}")]
    Field { field: String, msg: String },

    #[error("forcing: {msg} at position {pos}")]
    Forcing { pos: usize, msg: String },

    #[error(transparent)]
    Lab(#[from] qprenorm_lab::Error),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("thread pool: {0}")]
    Threads(String),
}
