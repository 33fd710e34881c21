pub mod amplifier;
pub mod bounds;
pub mod codelab;
pub mod entropy;
pub mod lp;
pub mod network;
pub mod rational;

/// Tolerance applied whenever a quantity is only available in double precision.
pub const FLOAT_TOL: f64 = 1e-9;
