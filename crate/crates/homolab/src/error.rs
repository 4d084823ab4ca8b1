//! Error types shared across the library.

use thiserror::Error;

/// Library-wide error type.
///
/// Variants map onto the CLI exit-code classes: validation problems,
/// degenerate mathematical setups, and I/O or parse failures.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid user-supplied value; the message names the offending field.
    #[error("validation: {0}")]
    Validation(String),

    /// A parameter combination makes the underlying linear system singular.
    #[error("degenerate setup: {0}")]
    Degenerate(String),

    /// A metric that requires at least one edge was asked of an edgeless graph.
    #[error("no edges")]
    NoEdges,

    /// Local homophily is undefined for nodes without neighbors.
    #[error("undefined local homophily: node {0} is isolated")]
    IsolatedNode(usize),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input document (JSON syntax and similar).
    #[error("parse: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        if e.is_syntax() || e.is_eof() || e.is_io() {
            Error::Parse(e.to_string())
        } else {
            // Data errors (unknown keys, wrong types, bad ranges) are the
            // caller's input being invalid, not a broken document.
            Error::Validation(e.to_string())
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
