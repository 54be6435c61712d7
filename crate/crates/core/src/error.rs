use std::io;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {msg}")]
    MalformedLine { line: u64, msg: String },

    #[error("line {line}: unmapped event `{event}`")]
    UnmappedEvent { line: u64, event: String },

    #[error(
        "user `{user}` position {position}: transition {from} -> {to} is impossible under every pattern"
    )]
    ZeroProbability {
        user: String,
        position: usize,
        from: usize,
        to: usize,
    },

    #[error("unknown atomic proposition `{0}`")]
    UnknownProposition(String),

    #[error("no state satisfies {0}")]
    EmptyStateSet(String),

    #[error("model has no dummy init state")]
    NoInitState,

    #[error("path enumeration needs {paths} paths, above the guard of {guard}")]
    GuardExceeded { paths: u128, guard: u128 },

    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("PRISM text, line {line}: {msg}")]
    PrismSyntax { line: usize, msg: String },

    #[error("term {index}: {source}")]
    Term {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
