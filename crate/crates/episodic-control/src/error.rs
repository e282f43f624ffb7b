//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by memory buffers, embeddings, models, environments and
/// the experiment harness.
#[derive(Debug, Error)]
pub enum EcError {
    /// A vector had a different length than the component it was given to.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A value that must be finite was NaN or infinite.
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    /// An action id outside `0..num_actions`.
    #[error("invalid action {action} (environment has {num_actions} actions)")]
    InvalidAction { action: usize, num_actions: usize },

    /// A value lookup hit a buffer with no entries.
    #[error("value buffer for action {action} is empty")]
    EmptyBuffer { action: usize },

    /// Eviction was requested from a buffer that is not full.
    #[error("buffer below capacity ({len}/{capacity}): nothing must be evicted")]
    BufferBelowCapacity { len: usize, capacity: usize },

    /// A statistic was requested before any of its inputs existed.
    #[error("{what} is undefined: {why}")]
    UndefinedStatistic { what: &'static str, why: String },

    /// A random projection that does not reduce dimensionality.
    #[error("projection must reduce dimension: asked for {output} from {input}")]
    NotAReduction { input: usize, output: usize },

    /// A structurally invalid argument (zero k, empty seed list, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A gridworld description that violates its structural rules.
    #[error("invalid gridworld spec:\n{}", .0.join("\n"))]
    InvalidSpec(Vec<String>),

    /// An action was applied to an episode that already ended.
    #[error("episode is finished; reset before stepping again")]
    EpisodeFinished,

    /// A config or spec file line that could not be interpreted.
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    /// A snapshot or checkpoint file with unexpected structure.
    #[error("malformed {kind} file: {message}")]
    Format { kind: &'static str, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, EcError>;
