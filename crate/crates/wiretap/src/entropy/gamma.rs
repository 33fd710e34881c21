use super::system::{terms, Constraint, ConstraintSystem};
use super::{EntropyError, GroundSet};
use crate::lp::Relation;
use crate::network::Network;
use crate::rational::Q;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

/// One of the six structural constraint families of a wiretap network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    /// Messages and keys are mutually independent.
    Independence = 1,
    /// Source outputs are functions of the source's message and key.
    SourceEncoding = 2,
    /// Intermediate outputs are functions of the node's inputs.
    NodeEncoding = 3,
    /// Each sink recovers its demanded messages from its inputs.
    Decoding = 4,
    /// Edge entropies respect capacities.
    Capacity = 5,
    /// Every wiretap set is independent of the messages.
    Secrecy = 6,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Independence,
        Family::SourceEncoding,
        Family::NodeEncoding,
        Family::Decoding,
        Family::Capacity,
        Family::Secrecy,
    ];

    pub fn from_index(i: u8) -> Option<Family> {
        Family::ALL.get((i as usize).checked_sub(1)?).copied()
    }

    pub fn index(self) -> u8 {
        self as u8
    }
}

/// Right-hand sides of the inequality forms of the decoding and secrecy families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relax {
    pub decoding: Q,
    pub secrecy: Q,
}

impl Relax {
    pub fn zero() -> Self {
        Relax { decoding: Q::zero(), secrecy: Q::zero() }
    }
}

/// Total capacity leaving the sources; bounds `H(M_S)/n` for any block code.
pub fn c_m(net: &Network) -> Q {
    net.source_out_capacity()
}

/// Relaxation at block length `n` and slack `eps`:
/// decoding bound `1/n + c_M eps`, secrecy bound `eps`.
pub fn finite_block_relax(net: &Network, n: u64, eps: &Q) -> Relax {
    Relax { decoding: Q::new(1.into(), n.into()) + c_m(net) * eps, secrecy: eps.clone() }
}

/// Emits the requested families in family order; within a family, network order.
/// With `relax`, decoding and secrecy become `<=` constraints with the given bounds.
pub fn gamma_constraints(net: &Network, families: &[Family], relax: Option<&Relax>) -> Result<ConstraintSystem, EntropyError> {
    let g = GroundSet::of(net);
    g.check_size()?;
    let mut fams = families.to_vec();
    fams.sort();
    fams.dedup();
    let mut sys = ConstraintSystem::new(g.n());
    let zero = Q::zero;
    let in_set = |v: &str| g.edge_set(net.in_edges(v));
    let out_set = |v: &str| g.edge_set(net.out_edges(v));
    for fam in fams {
        match fam {
            Family::Independence => {
                let all = g.messages() | g.keys();
                let singles: Vec<u32> = (0..g.sources).flat_map(|s| [g.m(s), g.k(s)]).collect();
                sys.push(Constraint::new(terms(&[all], &singles), Relation::Eq, zero(), "gamma1 independence"));
                for (s, name) in net.sources.iter().enumerate() {
                    if net.is_key_only(name) {
                        sys.push(Constraint::new(terms(&[g.m(s)], &[]), Relation::Eq, zero(), format!("gamma1 key-only {name}")));
                    }
                }
            }
            Family::SourceEncoding => {
                for (s, name) in net.sources.iter().enumerate() {
                    let mk = g.m(s) | g.k(s);
                    sys.push(Constraint::new(terms(&[mk | out_set(name)], &[mk]), Relation::Eq, zero(), format!("gamma2 {name}")));
                }
            }
            Family::NodeEncoding => {
                for v in net.intermediates() {
                    let (i, o) = (in_set(v), out_set(v));
                    if i == 0 && o != 0 {
                        return Err(EntropyError::UnsourcedEmitter(v.to_string()));
                    }
                    sys.push(Constraint::new(terms(&[i | o], &[i]), Relation::Eq, zero(), format!("gamma3 {v}")));
                }
            }
            Family::Decoding => {
                for t in &net.sinks {
                    let beta = t.beta.iter().filter_map(|b| net.source_index(b)).fold(0, |acc, s| acc | g.m(s));
                    let i = in_set(&t.node);
                    let tm = terms(&[beta | i], &[i]);
                    let c = match relax {
                        Some(r) => Constraint::new(tm, Relation::Le, r.decoding.clone(), format!("gamma4 {} relaxed", t.node)),
                        None => Constraint::new(tm, Relation::Eq, zero(), format!("gamma4 {}", t.node)),
                    };
                    sys.push(c);
                }
            }
            Family::Capacity => {
                for (i, e) in net.edges.iter().enumerate() {
                    sys.push(Constraint::new(terms(&[g.e(i)], &[]), Relation::Le, e.cap.clone(), format!("gamma5 {}", e.id)));
                }
            }
            Family::Secrecy => {
                let ms = g.messages();
                for alpha in &net.wiretap_sets {
                    let a = g.edge_set(alpha.iter().filter_map(|e| net.edge_index(e)));
                    let label = format!("{{{}}}", alpha.join(","));
                    let c = match relax {
                        Some(r) => Constraint::new(
                            terms(&[ms, a], &[ms | a]),
                            Relation::Le,
                            r.secrecy.clone(),
                            format!("gamma6 {label} relaxed"),
                        ),
                        None => Constraint::new(terms(&[ms | a], &[ms, a]), Relation::Eq, zero(), format!("gamma6 {label}")),
                    };
                    sys.push(c);
                }
            }
        }
    }
    Ok(sys)
}
