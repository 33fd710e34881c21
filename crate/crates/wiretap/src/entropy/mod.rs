//! Entropy-vector coordinates over the ground set of message, key and edge variables.
//!
//! A subset of the ground set is a `u32` bitmask over the label order
//! `m_0 .. m_{S-1}, k_0 .. k_{S-1}, e_0 .. e_{E-1}` (sources in declaration
//! order, edges in declaration order). Coordinate `h[mask]` is the joint
//! entropy of the variables whose bits are set; `h[0] = 0`.

mod elemental;
mod gamma;
mod system;
mod vector;

pub use elemental::elemental_inequalities;
pub use gamma::{c_m, finite_block_relax, gamma_constraints, Family, Relax};
pub use system::{Constraint, ConstraintSystem, TextFormatError};
pub use vector::{
    check_membership, dominates, entropy_vector_of_pmf, project_sources, scale, ConstraintCheck, EntropyVector,
    MembershipReport, Pmf,
};

use crate::network::Network;

/// Ground-set size used when `WIRETAP_MAX_N` is unset.
pub const DEFAULT_MAX_N: usize = 12;
/// Masks are `u32`, so no configuration may go beyond this.
pub const HARD_MAX_N: usize = 24;

/// Largest ground set the entropy-space builders accept.
pub fn max_n() -> usize {
    std::env::var("WIRETAP_MAX_N")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .map_or(DEFAULT_MAX_N, |n| n.min(HARD_MAX_N))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EntropyError {
    #[error("ground set size {n} exceeds the configured maximum {max} (set WIRETAP_MAX_N to raise it)")]
    TooLarge { n: usize, max: usize },
    #[error("intermediate node {0:?} has outgoing edges but no incoming edges")]
    UnsourcedEmitter(String),
    #[error("dimension mismatch: vector has n = {vector}, system has n = {system}")]
    DimensionMismatch { vector: usize, system: usize },
    #[error("pmf is not normalized: total probability {0}")]
    NotNormalized(String),
    #[error("pmf point has {got} values, expected {expected}")]
    PointArity { got: usize, expected: usize },
}

/// Label order and mask helpers for one network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundSet {
    pub labels: Vec<String>,
    pub sources: usize,
    pub edges: usize,
}

impl GroundSet {
    pub fn of(net: &Network) -> Self {
        let mut labels: Vec<String> = net.sources.iter().map(|s| format!("m_{s}")).collect();
        labels.extend(net.sources.iter().map(|s| format!("k_{s}")));
        labels.extend(net.edges.iter().map(|e| e.id.clone()));
        GroundSet { labels, sources: net.sources.len(), edges: net.edges.len() }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn m(&self, s: usize) -> u32 {
        1 << s
    }

    pub fn k(&self, s: usize) -> u32 {
        1 << (self.sources + s)
    }

    pub fn e(&self, i: usize) -> u32 {
        1 << (2 * self.sources + i)
    }

    /// All message variables.
    pub fn messages(&self) -> u32 {
        (1u32 << self.sources) - 1
    }

    /// All key variables.
    pub fn keys(&self) -> u32 {
        self.messages() << self.sources
    }

    pub fn edge_set(&self, idx: impl IntoIterator<Item = usize>) -> u32 {
        idx.into_iter().fold(0, |acc, i| acc | self.e(i))
    }

    pub fn check_size(&self) -> Result<(), EntropyError> {
        check_n(self.n())
    }

    /// Human-readable name of a subset, e.g. `{m_s,e3}`.
    pub fn describe(&self, mask: u32) -> String {
        let names: Vec<&str> = (0..self.n()).filter(|i| mask >> i & 1 == 1).map(|i| self.labels[i].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }
}

pub(crate) fn check_n(n: usize) -> Result<(), EntropyError> {
    let max = max_n();
    if n > max {
        Err(EntropyError::TooLarge { n, max })
    } else {
        Ok(())
    }
}

/// Iterates the bit positions of `mask` in increasing order.
pub fn bits(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| mask >> i & 1 == 1)
}
