use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("precision budget of {budget} bits exhausted")]
    PrecisionExhausted { budget: u32 },
    #[error("invalid angle: {0}")]
    InvalidAngle(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("partition is trivial")]
    TrivialPartition,
    #[error("alphabet mismatch: expected {expected}, found {found}")]
    AlphabetMismatch { expected: u32, found: u32 },
    #[error("partitions live over different angles")]
    AngleMismatch,
    #[error("invalid rule: {0}")]
    InvalidRule(String),
    #[error("lookup table of {size} entries exceeds the limit")]
    TableTooLarge { size: u128 },
    #[error("window of length {len} is shorter than the required {needed}")]
    WindowTooSmall { needed: usize, len: usize },
    #[error("windows do not overlap")]
    EmptyOverlap,
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("partition would need {arcs} arcs, above the cap of {cap}")]
    ArcBudgetExceeded { arcs: u128, cap: usize },
    #[error("tower reaches epsilon {achieved:.6}, target was {target:.6}")]
    EpsilonUnreachable { achieved: f64, target: f64 },
    #[error("core word is not admissible for the shift")]
    CoreNotAdmissible,
    #[error("no admissible seam found while extending the core")]
    ExtensionFailed,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("integer overflow in orbit index")]
    Overflow,
    #[error("cannot parse {what}: {detail}")]
    Parse { what: &'static str, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(what: &'static str, detail: impl Into<String>) -> Error {
    Error::Parse {
        what,
        detail: detail.into(),
    }
}
