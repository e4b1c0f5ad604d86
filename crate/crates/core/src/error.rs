use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while building or reading a [`Multigraph`](crate::graph::Multigraph).
#[derive(Debug, Error)]
pub enum GraphError {
    #[error("{file}:{line}: {message}")]
    Load {
        file: PathBuf,
        line: u64,
        message: String,
    },
    #[error("io error on {file}: {source}")]
    Io {
        file: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown node id {0}")]
    UnknownNode(usize),
    #[error("duplicate node id {0}")]
    DuplicateNode(u64),
    #[error("duplicate edge id {0}")]
    DuplicateEdge(u64),
    #[error("edge {edge} references missing node {node}")]
    DanglingEndpoint { edge: u64, node: u64 },
    #[error("invalid graph: {0}")]
    Invalid(String),
}

/// Index snapshot read/write failures.
#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not an index snapshot (bad magic)")]
    BadMagic,
    #[error("unsupported snapshot version {0}")]
    Version(u32),
    #[error("corrupt snapshot: {0}")]
    Corrupt(String),
}

/// Position-bearing CYPHER syntax or semantic error.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
        }
    }
}

/// Invalid engine or generator configuration.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("configuration error: {0}")]
pub struct ConfigError(pub String);

/// Top-level error of a query execution.
#[derive(Debug, Error)]
pub enum EngineError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("graph error: {0}")]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}
