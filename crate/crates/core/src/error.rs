use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Every failure the kernels can report.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand dimensions do not chain.
    Shape {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    /// A non-finite value showed up where the math requires a finite one.
    Numeric { context: String, index: usize },
    /// A value lies outside its admissible range.
    Range { context: String },
    /// Caller-supplied arguments violate a precondition.
    Argument(String),
    /// A record lacks a feature the encoding needs.
    Ingestion { arch_id: String, feature: String },
    /// The object is not in a state that permits the call.
    State(String),
    /// An identifier is not registered.
    Lookup { kind: &'static str, id: String },
    /// Measurements required by the operation are absent.
    Data {
        context: String,
        missing: Vec<String>,
    },
    /// Rank correlation undefined (too few points or constant ranks).
    UndefinedCorrelation(String),
    /// Filtering left no admissible training device.
    InfeasibleSplit { threshold: f64 },
    /// Cross-space transfer requested for a topology-bearing encoding.
    UnsupportedTransfer(String),
    /// Synthetic generator parameters are degenerate.
    Spec(String),
    /// Duplicate or inconsistent identifiers.
    Integrity(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Shape {
                context,
                expected,
                found,
            } => write!(
                f,
                "shape mismatch in {context}: expected {expected}, found {found}"
            ),
            Self::Numeric { context, index } => {
                write!(f, "non-finite value in {context} at index {index}")
            }
            Self::Range { context } => write!(f, "out of range: {context}"),
            Self::Argument(msg) => write!(f, "invalid argument: {msg}"),
            Self::Ingestion { arch_id, feature } => {
                write!(f, "architecture `{arch_id}` is missing feature `{feature}`")
            }
            Self::State(msg) => write!(f, "invalid state: {msg}"),
            Self::Lookup { kind, id } => write!(f, "unknown {kind} `{id}`"),
            Self::Data { context, missing } => {
                write!(f, "{context}: missing ")?;
                for (i, id) in missing.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    f.write_str(id)?;
                }
                Ok(())
            }
            Self::UndefinedCorrelation(msg) => write!(f, "correlation undefined: {msg}"),
            Self::InfeasibleSplit { threshold } => {
                write!(
                    f,
                    "no training device left below correlation threshold {threshold}"
                )
            }
            Self::UnsupportedTransfer(msg) => write!(f, "unsupported transfer: {msg}"),
            Self::Spec(msg) => write!(f, "invalid synthetic spec: {msg}"),
            Self::Integrity(msg) => write!(f, "integrity violation: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
