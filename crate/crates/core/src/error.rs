use alloc::string::String;

use crate::state::ModeId;

pub type Result<T, E = QpqError> = core::result::Result<T, E>;

/// Errors raised by the simulator.
///
/// Everything except [`QpqError::Parse`] is a domain error: the inputs were
/// well-formed but violate an operation's preconditions.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QpqError {
    #[error("mode {0} is not part of the register")]
    UnknownMode(ModeId),
    #[error("mode {0} appears more than once in the register")]
    DuplicateMode(ModeId),
    #[error("a register needs at least one mode")]
    EmptyRegister,
    #[error("operands live on different mode registers")]
    RegisterMismatch,
    #[error("beam splitter needs two distinct modes, got {0} twice")]
    SameMode(ModeId),
    #[error("mode groups must be disjoint")]
    OverlappingGroups,
    #[error("dephasing factor {0} outside [0, 1]")]
    GammaOutOfRange(f64),
    #[error("index {index} outside 1..={n}")]
    IndexOutOfRange { index: u32, n: u32 },
    #[error("register has no ancilla for database mode {0}")]
    MissingAncilla(u32),
    #[error("database has {db} entries but the register has {register} database modes")]
    DatabaseSizeMismatch { db: usize, register: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cannot parse {0}")]
    Parse(String),
}
