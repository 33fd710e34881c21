//! Turning a weakly secure code into a strongly secure one by repetition,
//! syndrome side messages and Toeplitz hashing of each source's message block.

mod amplify;
mod coupling;
mod extractor;
mod gf2;
mod minentropy;
mod weak;

pub use amplify::*;
pub use coupling::*;
pub use extractor::*;
pub use gf2::*;
pub use minentropy::*;
pub use weak::*;

#[derive(Debug, thiserror::Error)]
pub enum AmpError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("weak code rejected: {0}")]
    Registration(String),
    #[error("sizing failed: {0}")]
    Sizing(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("malformed input: {0}")]
    Shape(String),
    #[error("distribution has empty support")]
    EmptySupport,
    #[error("state space of {size} exceeds cap {cap}")]
    StateCap { size: String, cap: u64 },
}
