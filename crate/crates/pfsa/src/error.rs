//! Crate-wide error type.

use thiserror::Error;

/// Errors produced while parsing inputs, validating machines, or searching.
#[derive(Debug, Error)]
pub enum Error {
    /// A dataset could not be parsed. `position` is the 1-based sentence
    /// index (slash format) or line number (line format).
    #[error("dataset parse error at sentence {position}: {message}")]
    DatasetParse { position: usize, message: String },

    /// A serialized machine could not be parsed.
    #[error("machine parse error on line {line}: {message}")]
    MachineParse { line: usize, message: String },

    /// A machine failed a structural invariant.
    #[error("invalid machine: {0}")]
    InvalidMachine(String),

    /// An argument was outside its valid domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A sentence is not accepted by the machine it was traced through.
    #[error("sentence {sentence} not accepted: no arc from state {state} at position {position}")]
    SentenceRejected {
        sentence: usize,
        position: usize,
        state: u32,
    },

    /// Two operands were built over different alphabets.
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    /// The search budget expired before any complete machine was scored.
    #[error("no model found within budget")]
    NoModelFound,

    /// Exhaustive enumeration exceeded its node budget.
    #[error("construction tree too large to enumerate: visited {nodes} nodes ({leaves} complete) before hitting the budget")]
    EnumerationBudget { nodes: u64, leaves: u64 },

    /// Random machine generation cannot satisfy the requested density.
    #[error("arc density {density} infeasible: at most {max} arcs per state")]
    InfeasibleDensity { density: f64, max: u32 },

    /// Random sampling failed to terminate.
    #[error("sampling stuck: {0}")]
    SamplingStuck(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed result document: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, Error>;
