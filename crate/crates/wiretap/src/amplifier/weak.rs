//! Abstract weak code: uniform messages, and per-use conditional pmfs of what
//! each legitimate sink and each eavesdropper set observes.

use super::AmpError;
use crate::rational::{entropy_of_pmf, fmt_q, Bits, Q};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakSource {
    pub node: String,
    /// Message alphabet size, a power of two.
    pub messages: u32,
}

/// `table[m_S][m_hat]` with `m_S` row-major over sources (first source most significant).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegitView {
    pub sink: String,
    pub source: String,
    #[serde(serialize_with = "ser_table", deserialize_with = "de_table")]
    pub table: Vec<Vec<Q>>,
}

/// `table[m_S][y]` over the eavesdropper's observation of one wiretap set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EveView {
    pub alpha: Vec<String>,
    #[serde(serialize_with = "ser_table", deserialize_with = "de_table")]
    pub table: Vec<Vec<Q>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakCode {
    /// Channel uses per block of the weak code.
    pub blocklength: u32,
    pub sources: Vec<WeakSource>,
    pub legit: Vec<LegitView>,
    pub eavesdroppers: Vec<EveView>,
    /// Declared per-use leakage `I(M_S; Y_alpha) / n`, in bits.
    #[serde(serialize_with = "crate::rational::serialize_q", deserialize_with = "crate::rational::deserialize_q")]
    pub declared_leakage: Q,
    /// Declared per-sink decoding error probability.
    #[serde(serialize_with = "crate::rational::serialize_q", deserialize_with = "crate::rational::deserialize_q")]
    pub declared_error: Q,
}

fn ser_table<S: serde::Serializer>(t: &[Vec<Q>], s: S) -> Result<S::Ok, S::Error> {
    let v: Vec<Vec<String>> = t.iter().map(|r| r.iter().map(fmt_q).collect()).collect();
    v.serialize(s)
}

fn de_table<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<Vec<Q>>, D::Error> {
    let v: Vec<Vec<String>> = Vec::deserialize(d)?;
    v.into_iter()
        .map(|r| r.into_iter().map(|x| crate::rational::parse_q(&x).map_err(serde::de::Error::custom)).collect())
        .collect()
}

pub fn parse_weak(text: &str) -> Result<WeakCode, AmpError> {
    serde_json::from_str(text).map_err(|e| AmpError::Syntax { line: e.line(), column: e.column(), message: e.to_string() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Registration {
    /// Measured `I(M_S; Y_alpha) / n` per eavesdropper view.
    pub leakage: Vec<(Vec<String>, serde_json::Value)>,
    /// Measured `P(M_hat != M)` per legitimate view.
    pub errors: Vec<(String, String, String)>,
}

impl WeakCode {
    pub fn bits(&self, s: usize) -> u32 {
        self.sources[s].messages.trailing_zeros()
    }

    pub fn total_bits(&self) -> u32 {
        (0..self.sources.len()).map(|s| self.bits(s)).sum()
    }

    pub fn num_tuples(&self) -> usize {
        self.sources.iter().map(|s| s.messages as usize).product()
    }

    /// Messages of each source in tuple `idx`.
    pub fn split(&self, mut idx: usize) -> Vec<u32> {
        let mut m = vec![0u32; self.sources.len()];
        for s in (0..self.sources.len()).rev() {
            let k = self.sources[s].messages as usize;
            m[s] = (idx % k) as u32;
            idx /= k;
        }
        m
    }

    /// Bit offset of source `s` inside one use's message vector (source 0 lowest).
    pub fn offset(&self, s: usize) -> u32 {
        (0..s).map(|i| self.bits(i)).sum()
    }

    pub fn pack_bits(&self, m: &[u32]) -> u64 {
        m.iter().enumerate().fold(0, |acc, (s, &x)| acc | ((x as u64) << self.offset(s)))
    }

    pub fn source_index(&self, node: &str) -> Option<usize> {
        self.sources.iter().position(|s| s.node == node)
    }

    /// Per-use channel `W(m_hat | m_s)` of a legitimate view, averaging out other sources.
    pub fn marginal_channel(&self, view: &LegitView) -> Vec<Vec<Q>> {
        let s = self.source_index(&view.source).expect("validated");
        let k = self.sources[s].messages as usize;
        let others = Q::new(k.into(), self.num_tuples().into());
        let mut w = vec![vec![Q::zero(); k]; k];
        for (idx, row) in view.table.iter().enumerate() {
            let m = self.split(idx)[s] as usize;
            for (j, p) in row.iter().enumerate() {
                w[m][j] += p * &others;
            }
        }
        w
    }

    /// `P(M_hat != M_s)` under uniform messages.
    pub fn error_probability(&self, view: &LegitView) -> Q {
        let s = self.source_index(&view.source).expect("validated");
        let total = Q::from_integer(self.num_tuples().into());
        let correct: Q = view.table.iter().enumerate().map(|(idx, row)| row[self.split(idx)[s] as usize].clone()).sum();
        Q::one() - correct / total
    }

    /// `H(M_s | M_hat)` in bits for one use.
    pub fn equivocation(&self, view: &LegitView) -> Bits {
        let w = self.marginal_channel(view);
        let k = w.len();
        let pk = Q::new(1.into(), k.into());
        let joint: Vec<Q> = w.iter().flat_map(|r| r.iter().map(|p| p * &pk)).collect();
        let out: Vec<Q> = (0..k).map(|j| w.iter().map(|r| &r[j] * &pk).sum()).collect();
        entropy_of_pmf(&joint).sub(&entropy_of_pmf(&out))
    }

    /// Joint pmf `p(m_S, y)` of an eavesdropper view, rows over message tuples.
    pub fn eve_joint(&self, view: &EveView) -> Vec<Vec<Q>> {
        let pm = Q::new(1.into(), self.num_tuples().into());
        view.table.iter().map(|r| r.iter().map(|p| p * &pm).collect()).collect()
    }

    /// `I(M_S; Y_alpha)` in bits for one block.
    pub fn leakage(&self, view: &EveView) -> Bits {
        let j = self.eve_joint(view);
        let flat: Vec<Q> = j.iter().flatten().cloned().collect();
        let ny = view.table[0].len();
        let py: Vec<Q> = (0..ny).map(|y| j.iter().map(|r| r[y].clone()).sum()).collect();
        let pm: Vec<Q> = j.iter().map(|r| r.iter().sum()).collect();
        entropy_of_pmf(&pm).add(&entropy_of_pmf(&py)).sub(&entropy_of_pmf(&flat))
    }

    /// Shape checks plus declared-vs-measured leakage and error.
    pub fn register(&self) -> Result<Registration, AmpError> {
        let bad = |m: String| Err(AmpError::Registration(m));
        if self.blocklength == 0 || self.sources.is_empty() {
            return bad("need blocklength >= 1 and at least one source".into());
        }
        for s in &self.sources {
            if s.messages < 2 || !s.messages.is_power_of_two() {
                return bad(format!("source {:?}: message alphabet {} is not a power of two >= 2", s.node, s.messages));
            }
        }
        if self.total_bits() > 16 {
            return bad(format!("{} message bits per use exceed the desk limit of 16", self.total_bits()));
        }
        let rows = self.num_tuples();
        let check_table = |what: String, t: &[Vec<Q>], cols: Option<usize>| -> Result<(), AmpError> {
            if t.len() != rows {
                return Err(AmpError::Registration(format!("{what}: {} rows, expected {rows}", t.len())));
            }
            let width = cols.unwrap_or(t[0].len());
            for (i, r) in t.iter().enumerate() {
                if r.len() != width || width == 0 {
                    return Err(AmpError::Registration(format!("{what}: row {i} has {} entries, expected {width}", r.len())));
                }
                if r.iter().any(|p| p.is_negative()) || r.iter().sum::<Q>() != Q::one() {
                    return Err(AmpError::Registration(format!("{what}: row {i} is not a probability vector")));
                }
            }
            Ok(())
        };
        let mut errors = Vec::new();
        for v in &self.legit {
            let Some(s) = self.source_index(&v.source) else { return bad(format!("legit view names unknown source {:?}", v.source)) };
            check_table(format!("legit view {}->{}", v.source, v.sink), &v.table, Some(self.sources[s].messages as usize))?;
            let e = self.error_probability(v);
            if e > self.declared_error {
                return bad(format!("measured error {} at {} exceeds the declared {}", fmt_q(&e), v.sink, fmt_q(&self.declared_error)));
            }
            errors.push((v.source.clone(), v.sink.clone(), fmt_q(&e)));
        }
        let mut leakage = Vec::new();
        let n = Q::from_integer(self.blocklength.into());
        for v in &self.eavesdroppers {
            check_table(format!("eavesdropper view {:?}", v.alpha), &v.table, None)?;
            let per_use = self.leakage(v).scale(&n.recip());
            let within = match &per_use.exact {
                Some(x) => *x <= self.declared_leakage,
                None => per_use.approx <= crate::rational::to_f64(&self.declared_leakage) + crate::FLOAT_TOL,
            };
            if !within {
                return bad(format!("measured leakage {:.6} bits/use on {:?} exceeds the declared {}", per_use.approx, v.alpha, fmt_q(&self.declared_leakage)));
            }
            leakage.push((v.alpha.clone(), per_use.to_json()));
        }
        Ok(Registration { leakage, errors })
    }
}
