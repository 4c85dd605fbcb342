//! Error type shared across the library.

use thiserror::Error;

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by profile handling, mode solving, signal processing,
/// extraction and inversion.
#[derive(Debug, Error)]
pub enum Error {
    /// A profile violates its structural invariants (ordering, bounds).
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    /// Duct parameters outside the representable region.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A query point lies outside the supported depth/frequency/time range.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// An input profile or signal does not cover the required span.
    #[error("insufficient coverage: {0}")]
    Coverage(String),

    /// The vertical grid is too coarse for the requested frequency.
    #[error("grid too coarse: {0}")]
    Resolution(String),

    /// A synthesis or analysis window cannot hold the modeled content.
    #[error("window too short: {0}")]
    Window(String),

    /// A search or evaluation grid is empty or malformed.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Curve supports do not overlap enough to form a cost.
    #[error("insufficient overlap: {0}")]
    Overlap(String),

    /// A reference anchor is missing from the curve set.
    #[error("anchor not covered: {0}")]
    Anchor(String),

    /// A warp function fails its monotonicity/domain requirements.
    #[error("invalid warp: {0}")]
    InvalidWarp(String),

    /// Group-velocity table construction or lookup failure.
    #[error("table: {0}")]
    Table(String),

    /// Persisted cache is unreadable or inconsistent.
    #[error("cache: {0}")]
    Cache(String),

    /// Malformed input file.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Underlying I/O failure.
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
