use thiserror::Error;

/// What went wrong while reading a `.dioph` system description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownVariable(String),
    DuplicateVariable(String),
    LimitExceeded(String),
    NotPowerOfTwo(u128),
    Missing(&'static str),
}

impl std::fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error: {msg}"),
            ParseErrorKind::UnknownVariable(name) => write!(f, "unknown variable `{name}`"),
            ParseErrorKind::DuplicateVariable(name) => write!(f, "variable `{name}` declared twice"),
            ParseErrorKind::LimitExceeded(msg) => write!(f, "limit exceeded: {msg}"),
            ParseErrorKind::NotPowerOfTwo(n) => {
                write!(f, "interval length {n} is not a power of two")
            }
            ParseErrorKind::Missing(what) => write!(f, "missing {what}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {kind}")]
    Parse {
        line: usize,
        column: usize,
        kind: ParseErrorKind,
    },

    #[error("dimension mismatch: expected {expected} values, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("integer overflow while {0}")]
    Overflow(&'static str),

    #[error("value {value} does not fit in {width}-bit two's complement")]
    OutOfRange { value: i128, width: u32 },

    #[error("domain of {size} points exceeds the enumeration cap of {cap}")]
    DomainTooLarge { size: u128, cap: u128 },

    #[error("{what} needs {needed} qubits, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        needed: usize,
        cap: usize,
    },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("gate {index} ({kind}) is not a classical permutation")]
    NonPermutationGate { index: usize, kind: &'static str },

    #[error("qubit {qubit} is outside the {limit}-qubit range")]
    QubitOutOfRange { qubit: usize, limit: usize },

    #[error("circuit text line {line}: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("register spans overlap: {0}")]
    OverlappingSpans(String),

    #[error("width violation: {0}")]
    WidthViolation(String),

    #[error("missing workspace register D_{0}")]
    MissingWorkspace(usize),

    #[error("workspace or ancilla not restored: {0}")]
    GarbageDetected(String),

    #[error("assignment {0:?} is already excluded")]
    DuplicateExclusion(Vec<i64>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
