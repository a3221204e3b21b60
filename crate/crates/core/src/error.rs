use thiserror::Error;

/// What went wrong while reading a set literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    MalformedToken,
    DescendingRange,
    EmptyResult,
    RangeTooLarge,
}

impl std::fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ParseErrorKind::MalformedToken => "malformed token",
            ParseErrorKind::DescendingRange => "descending range",
            ParseErrorKind::EmptyResult => "empty set",
            ParseErrorKind::RangeTooLarge => "range too large",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{kind} at byte {offset}")]
    Parse { offset: usize, kind: ParseErrorKind },
    #[error("empty set")]
    EmptySet,
    #[error("integer overflow while {0}")]
    Overflow(&'static str),
    #[error("progressions have different differences ({0} vs {1})")]
    DifferenceMismatch(u64, u64),
    #[error("not a bijection: {0}")]
    NotBijection(String),
    #[error("set is not covered by the bi-arithmetic progression")]
    NotCovered,
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("degenerate window [{lo}, {hi}]")]
    DegenerateWindow { lo: u64, hi: u64 },
    #[error("hypotheses not met: {0}")]
    Inapplicable(String),
    #[error("resource ceiling exceeded: {0}")]
    ResourceCeiling(String),
}

pub type Result<T> = std::result::Result<T, Error>;
