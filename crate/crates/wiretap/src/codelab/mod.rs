//! Explicit codes, typical-set machinery and the blocklength-n simulators.

pub mod code;
pub mod rv;
pub mod sim;
pub mod table;
pub mod typical;

pub use code::*;
pub use rv::*;
pub use sim::*;
pub use table::UniformTable;
pub use typical::*;

#[derive(Debug, thiserror::Error)]
pub enum CodeError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("inconsistent code: {0}")]
    Inconsistent(String),
    #[error("state space of {size} exceeds cap {cap}")]
    StateCap { size: String, cap: u64 },
    #[error(transparent)]
    Typical(#[from] TypicalError),
}
