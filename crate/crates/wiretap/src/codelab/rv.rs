use super::code::{CodeSpec, CompiledCode, DecoderTable, EdgeTable, SourceAlphabets};
use super::CodeError;
use crate::entropy::{entropy_vector_of_pmf, EntropyVector, GroundSet, Pmf};
use crate::network::Network;
use crate::rational::{entropy_of_pmf, fmt_q, Bits, Q};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RvSource {
    pub node: String,
    #[serde(serialize_with = "crate::rational::serialize_q_vec", deserialize_with = "crate::rational::deserialize_q_vec")]
    pub m_pmf: Vec<Q>,
    #[serde(serialize_with = "crate::rational::serialize_q_vec", deserialize_with = "crate::rational::deserialize_q_vec")]
    pub k_pmf: Vec<Q>,
}

/// Single-letter random variables driving the random constructions: independent
/// `(U_m, U_k)` per source and edge variables given by symbolwise tables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RvSystem {
    pub network: Network,
    pub sources: Vec<RvSource>,
    pub edges: Vec<EdgeTable>,
    pub decoders: Vec<DecoderTable>,
    #[serde(serialize_with = "crate::rational::serialize_q", deserialize_with = "crate::rational::deserialize_q")]
    pub a_k: Q,
    #[serde(serialize_with = "crate::rational::serialize_q", deserialize_with = "crate::rational::deserialize_q")]
    pub eps_k: Q,
}

pub fn parse_rv(text: &str) -> Result<RvSystem, CodeError> {
    serde_json::from_str(text).map_err(|e| CodeError::Syntax { line: e.line(), column: e.column(), message: e.to_string() })
}

/// A checked [`RvSystem`] with its exact joint distribution over the ground set
/// (messages, keys, edges; the same order as the entropy coordinates).
#[derive(Debug, Clone)]
pub struct CompiledRv {
    pub net: Network,
    pub code: CompiledCode,
    pub m_pmf: Vec<Vec<Q>>,
    pub k_pmf: Vec<Vec<Q>>,
    pub a_k: Q,
    pub eps_k: Q,
    /// Support of the joint distribution with its probabilities.
    pub joint: Vec<(Vec<u32>, Q)>,
}

fn check_pmf(what: &str, p: &[Q]) -> Result<(), CodeError> {
    if p.is_empty() || p.iter().any(|x| x.is_negative()) || p.iter().sum::<Q>() != Q::one() {
        return Err(CodeError::Inconsistent(format!("{what} is not a probability vector")));
    }
    Ok(())
}

impl RvSystem {
    pub fn compile(&self) -> Result<CompiledRv, CodeError> {
        let spec = CodeSpec {
            sources: self
                .sources
                .iter()
                .map(|s| SourceAlphabets { node: s.node.clone(), msg: s.m_pmf.len() as u32, key: s.k_pmf.len() as u32 })
                .collect(),
            edges: self.edges.clone(),
            decoders: self.decoders.clone(),
        };
        let code = CompiledCode::new(&self.network, &spec)?;
        let ns = self.network.sources.len();
        let mut m_pmf = vec![Vec::new(); ns];
        let mut k_pmf = vec![Vec::new(); ns];
        for s in &self.sources {
            check_pmf(&format!("m_pmf of {}", s.node), &s.m_pmf)?;
            check_pmf(&format!("k_pmf of {}", s.node), &s.k_pmf)?;
            let i = self.network.source_index(&s.node).expect("checked by CompiledCode");
            m_pmf[i] = s.m_pmf.clone();
            k_pmf[i] = s.k_pmf.clone();
        }
        if !self.a_k.is_positive() || self.a_k > Q::one() {
            return Err(CodeError::Inconsistent(format!("a_k = {} outside (0, 1]", fmt_q(&self.a_k))));
        }
        if self.eps_k.is_negative() {
            return Err(CodeError::Inconsistent(format!("eps_k = {} is negative", fmt_q(&self.eps_k))));
        }
        let joint = joint_support(&code, &m_pmf, &k_pmf);
        Ok(CompiledRv { net: self.network.clone(), code, m_pmf, k_pmf, a_k: self.a_k.clone(), eps_k: self.eps_k.clone(), joint })
    }
}

fn joint_support(code: &CompiledCode, m_pmf: &[Vec<Q>], k_pmf: &[Vec<Q>]) -> Vec<(Vec<u32>, Q)> {
    let s = m_pmf.len();
    let mut out: BTreeMap<Vec<u32>, Q> = BTreeMap::new();
    let mut m = vec![0u32; s];
    let mut k = vec![0u32; s];
    let mut w = vec![0u32; code.alphabet.len()];
    'outer: loop {
        let p: Q = (0..s).map(|i| &m_pmf[i][m[i] as usize] * &k_pmf[i][k[i] as usize]).product();
        if !p.is_zero() {
            code.run(&m, &k, &mut w);
            let key: Vec<u32> = m.iter().chain(&k).chain(&w).copied().collect();
            *out.entry(key).or_insert_with(Q::zero) += p;
        }
        let mut i = s;
        loop {
            if i == 0 {
                break 'outer;
            }
            i -= 1;
            k[i] += 1;
            if (k[i] as usize) < k_pmf[i].len() {
                break;
            }
            k[i] = 0;
            m[i] += 1;
            if (m[i] as usize) < m_pmf[i].len() {
                break;
            }
            m[i] = 0;
        }
    }
    out.into_iter().collect()
}

impl CompiledRv {
    pub fn num_sources(&self) -> usize {
        self.m_pmf.len()
    }

    pub fn var_m(&self, s: usize) -> usize {
        s
    }

    pub fn var_k(&self, s: usize) -> usize {
        self.num_sources() + s
    }

    pub fn var_e(&self, e: usize) -> usize {
        2 * self.num_sources() + e
    }

    pub fn alphabet_of(&self, var: usize) -> u32 {
        let s = self.num_sources();
        if var < s {
            self.m_pmf[var].len() as u32
        } else if var < 2 * s {
            self.k_pmf[var - s].len() as u32
        } else {
            self.code.alphabet[var - 2 * s]
        }
    }

    /// Joint pmf of `vars`, flattened row-major (first variable most significant).
    pub fn marginal(&self, vars: &[usize]) -> Vec<Q> {
        let size: usize = vars.iter().map(|&v| self.alphabet_of(v) as usize).product();
        let mut p = vec![Q::zero(); size];
        for (x, px) in &self.joint {
            let idx = vars.iter().fold(0usize, |acc, &v| acc * self.alphabet_of(v) as usize + x[v] as usize);
            p[idx] += px;
        }
        p
    }

    pub fn entropy_of(&self, vars: &[usize]) -> Bits {
        entropy_of_pmf(&self.marginal(vars))
    }

    pub fn entropy_vector(&self) -> Result<EntropyVector, CodeError> {
        let g = GroundSet::of(&self.net);
        let pmf = Pmf::exact(g.n(), self.joint.iter().map(|(x, p)| (x.iter().map(|&v| v as u64).collect(), p.clone())).collect());
        entropy_vector_of_pmf(&pmf).map_err(|e| CodeError::Inconsistent(e.to_string()))
    }

    /// Number of symbols of edge `e` with positive probability.
    pub fn edge_support(&self, e: usize) -> usize {
        self.marginal(&[self.var_e(e)]).iter().filter(|p| !p.is_zero()).count()
    }
}
