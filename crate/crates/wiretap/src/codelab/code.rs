use super::table::UniformTable;
use super::CodeError;
use crate::entropy::{EntropyVector, GroundSet};
use crate::network::Network;
use crate::rational::{entropy_of_counts, fmt_q, log2_exact, q, Bits, Q};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

/// Default bound on the number of input tuples an exhaustive evaluation visits.
pub const DEFAULT_STATE_CAP: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceAlphabets {
    pub node: String,
    /// Message alphabet size.
    pub msg: u32,
    /// Key alphabet size.
    pub key: u32,
}

/// `table` is indexed by `m * |K| + k` on a source edge, and otherwise row-major
/// over the tail's incoming edges in edge-list order (first edge most significant).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeTable {
    pub id: String,
    pub alphabet: u32,
    pub table: Vec<u32>,
}

/// Decoder table, row-major over the sink's incoming edges like [`EdgeTable`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderTable {
    pub sink: String,
    pub source: String,
    pub table: Vec<u32>,
}

/// An explicit blocklength-1 network code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSpec {
    pub sources: Vec<SourceAlphabets>,
    pub edges: Vec<EdgeTable>,
    pub decoders: Vec<DecoderTable>,
}

pub fn parse_code(text: &str) -> Result<CodeSpec, CodeError> {
    serde_json::from_str(text).map_err(|e| CodeError::Syntax { line: e.line(), column: e.column(), message: e.to_string() })
}

#[derive(Debug, Clone)]
enum EdgeInput {
    Source(usize),
    Node(Vec<usize>),
}

/// A code checked against a network, with edges in evaluation order.
#[derive(Debug, Clone)]
pub struct CompiledCode {
    pub msg: Vec<u32>,
    pub key: Vec<u32>,
    pub alphabet: Vec<u32>,
    order: Vec<usize>,
    inputs: Vec<EdgeInput>,
    tables: Vec<Vec<u32>>,
    /// `(sink node, source index, incoming edges, table)`.
    decoders: Vec<(String, usize, Vec<usize>, Vec<u32>)>,
}

fn radix_index(vals: impl Iterator<Item = (u32, u32)>) -> usize {
    vals.fold(0usize, |acc, (v, base)| acc * base as usize + v as usize)
}

impl CompiledCode {
    pub fn new(net: &Network, code: &CodeSpec) -> Result<Self, CodeError> {
        let bad = |m: String| Err(CodeError::Inconsistent(m));
        if !net.validate().ok {
            return bad("network fails validation".into());
        }
        let mut msg = vec![0; net.sources.len()];
        let mut key = vec![0; net.sources.len()];
        let mut seen = vec![false; net.sources.len()];
        for s in &code.sources {
            let Some(i) = net.source_index(&s.node) else { return bad(format!("code source {:?} is not a network source", s.node)) };
            if seen[i] {
                return bad(format!("source {:?} listed twice", s.node));
            }
            if s.msg == 0 || s.key == 0 {
                return bad(format!("source {:?} has an empty alphabet", s.node));
            }
            seen[i] = true;
            msg[i] = s.msg;
            key[i] = s.key;
        }
        if let Some(i) = seen.iter().position(|x| !x) {
            return bad(format!("no alphabets for source {:?}", net.sources[i]));
        }
        let mut alphabet = vec![0; net.edges.len()];
        let mut tables = vec![Vec::new(); net.edges.len()];
        let mut have = vec![false; net.edges.len()];
        for e in &code.edges {
            let Some(i) = net.edge_index(&e.id) else { return bad(format!("unknown edge {:?}", e.id)) };
            if have[i] {
                return bad(format!("edge {:?} listed twice", e.id));
            }
            if e.alphabet == 0 {
                return bad(format!("edge {:?} has an empty alphabet", e.id));
            }
            have[i] = true;
            alphabet[i] = e.alphabet;
            tables[i] = e.table.clone();
        }
        if let Some(i) = have.iter().position(|x| !x) {
            return bad(format!("no table for edge {:?}", net.edges[i].id));
        }
        let order = net.edges_in_topological_order().map_err(|e| CodeError::Inconsistent(e.to_string()))?;
        let mut inputs = Vec::with_capacity(net.edges.len());
        for (i, e) in net.edges.iter().enumerate() {
            let (input, domain) = match net.source_index(&e.tail) {
                Some(s) => (EdgeInput::Source(s), msg[s] as usize * key[s] as usize),
                None => {
                    let ins = net.in_edges(&e.tail);
                    let d = ins.iter().map(|&j| alphabet[j] as usize).product();
                    (EdgeInput::Node(ins), d)
                }
            };
            if tables[i].len() != domain {
                return bad(format!("edge {:?} table has {} entries, domain has {}", e.id, tables[i].len(), domain));
            }
            if let Some(v) = tables[i].iter().find(|&&v| v >= alphabet[i]) {
                return bad(format!("edge {:?} table value {} outside alphabet {}", e.id, v, alphabet[i]));
            }
            inputs.push(input);
        }
        let mut decoders = Vec::new();
        for d in &code.decoders {
            let Some(sink) = net.sinks.iter().find(|t| t.node == d.sink) else { return bad(format!("decoder sink {:?} is not a sink", d.sink)) };
            if !sink.beta.contains(&d.source) {
                return bad(format!("sink {:?} does not demand {:?}", d.sink, d.source));
            }
            let s = net.source_index(&d.source).expect("demanded node is a source after validation");
            let ins = net.in_edges(&d.sink);
            let domain: usize = ins.iter().map(|&j| alphabet[j] as usize).product();
            if d.table.len() != domain {
                return bad(format!("decoder {}->{} has {} entries, domain has {}", d.source, d.sink, d.table.len(), domain));
            }
            if let Some(v) = d.table.iter().find(|&&v| v >= msg[s]) {
                return bad(format!("decoder {}->{} outputs {} outside message alphabet {}", d.source, d.sink, v, msg[s]));
            }
            if decoders.iter().any(|(t, ss, _, _): &(String, usize, Vec<usize>, Vec<u32>)| *t == d.sink && *ss == s) {
                return bad(format!("decoder {}->{} listed twice", d.source, d.sink));
            }
            decoders.push((d.sink.clone(), s, ins, d.table.clone()));
        }
        for t in &net.sinks {
            for b in &t.beta {
                if !decoders.iter().any(|(tt, s, _, _)| *tt == t.node && net.sources[*s] == *b) {
                    return bad(format!("no decoder for {b}->{}", t.node));
                }
            }
        }
        Ok(CompiledCode { msg, key, alphabet, order, inputs, tables, decoders })
    }

    /// Edge symbols for one input tuple.
    pub fn run(&self, m: &[u32], k: &[u32], w: &mut [u32]) {
        for &i in &self.order {
            let idx = match &self.inputs[i] {
                EdgeInput::Source(s) => m[*s] as usize * self.key[*s] as usize + k[*s] as usize,
                EdgeInput::Node(ins) => radix_index(ins.iter().map(|&j| (w[j], self.alphabet[j]))),
            };
            w[i] = self.tables[i][idx];
        }
    }

    /// Symbolwise map of edge `i` applied to already-computed parent symbols.
    pub fn edge_symbol(&self, i: usize, m: &[u32], k: &[u32], w: &[u32]) -> u32 {
        let idx = match &self.inputs[i] {
            EdgeInput::Source(s) => m[*s] as usize * self.key[*s] as usize + k[*s] as usize,
            EdgeInput::Node(ins) => radix_index(ins.iter().map(|&j| (w[j], self.alphabet[j]))),
        };
        self.tables[i][idx]
    }

    pub fn edge_order(&self) -> &[usize] {
        &self.order
    }

    /// Incoming edges feeding edge `i`'s table, or `None` for a source edge.
    pub fn edge_parents(&self, i: usize) -> Option<&[usize]> {
        match &self.inputs[i] {
            EdgeInput::Source(_) => None,
            EdgeInput::Node(ins) => Some(ins),
        }
    }

    pub fn source_of_edge(&self, i: usize) -> Option<usize> {
        match &self.inputs[i] {
            EdgeInput::Source(s) => Some(*s),
            EdgeInput::Node(_) => None,
        }
    }

    /// `(sink, source index, incoming edges)` per decoder.
    pub fn decoders(&self) -> impl Iterator<Item = (&str, usize, &[usize])> {
        self.decoders.iter().map(|(t, s, ins, _)| (t.as_str(), *s, ins.as_slice()))
    }

    pub fn decode(&self, d: usize, w: &[u32]) -> u32 {
        let (_, _, ins, table) = &self.decoders[d];
        table[radix_index(ins.iter().map(|&j| (w[j], self.alphabet[j])))]
    }

    pub fn num_inputs(&self) -> BigInt {
        self.msg.iter().zip(&self.key).map(|(&m, &k)| BigInt::from(m) * BigInt::from(k)).product()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodingError {
    pub sink: String,
    pub source: String,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub probability: Q,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Leakage {
    pub alpha: Vec<String>,
    #[serde(serialize_with = "bits_json")]
    pub bits: Bits,
    /// The joint of messages and wiretapped symbols is a product distribution.
    pub factorizes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeRate {
    pub edge: String,
    /// `H(W_e)` per use.
    #[serde(serialize_with = "bits_json")]
    pub variable: Bits,
    /// `log |W_e|` per use.
    #[serde(serialize_with = "bits_json")]
    pub fixed: Bits,
}

pub fn bits_json<S: serde::Serializer>(b: &Bits, s: S) -> Result<S::Ok, S::Error> {
    b.to_json().serialize(s)
}

/// Exact evaluation of a code under independent uniform messages and keys.
#[derive(Debug, Clone)]
pub struct CodeEvaluation {
    pub inputs: u64,
    pub errors: Vec<DecodingError>,
    pub leakage: Vec<Leakage>,
    pub rates: Vec<EdgeRate>,
    pub entropy: EntropyVector,
    pub message_entropy: Vec<Bits>,
}

impl CodeEvaluation {
    pub fn zero_error(&self) -> bool {
        self.errors.iter().all(|e| e.probability == Q::from_integer(0.into()))
    }

    pub fn zero_leakage(&self) -> bool {
        self.leakage.iter().all(|l| l.factorizes)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "inputs": self.inputs,
            "zero_error": self.zero_error(),
            "zero_leakage": self.zero_leakage(),
            "errors": self.errors,
            "leakage": self.leakage,
            "rates": self.rates,
            "message_entropy": self.message_entropy.iter().map(Bits::to_json).collect::<Vec<_>>(),
            "entropy_exact": self.entropy.exact,
        })
    }
}

fn log2_size(n: u32) -> Bits {
    let x = q(n as i64);
    match log2_exact(&x) {
        Some(k) => Bits::exact(q(k)),
        None => Bits::approx((n as f64).log2()),
    }
}

/// Enumerates every `(m_S, k_S)` and tabulates messages, keys and edge symbols.
pub fn code_table(code: &CompiledCode, cap: u64) -> Result<UniformTable, CodeError> {
    let total = code.num_inputs();
    if total > BigInt::from(cap) {
        return Err(CodeError::StateCap { size: total.to_string(), cap });
    }
    let s = code.msg.len();
    let e = code.alphabet.len();
    let mut rows = Vec::new();
    let mut m = vec![0u32; s];
    let mut k = vec![0u32; s];
    let mut w = vec![0u32; e];
    loop {
        code.run(&m, &k, &mut w);
        let mut row: Vec<u64> = m.iter().chain(&k).chain(&w).map(|&x| x as u64).collect();
        for d in 0..code.decoders.len() {
            row.push(code.decode(d, &w) as u64);
        }
        rows.push(row);
        // odometer over (m_0, k_0, m_1, k_1, ...), last source fastest
        let mut i = s;
        loop {
            if i == 0 {
                return Ok(UniformTable::new(rows));
            }
            i -= 1;
            k[i] += 1;
            if k[i] < code.key[i] {
                break;
            }
            k[i] = 0;
            m[i] += 1;
            if m[i] < code.msg[i] {
                break;
            }
            m[i] = 0;
        }
    }
}

pub fn evaluate_code(net: &Network, spec: &CodeSpec, cap: u64) -> Result<CodeEvaluation, CodeError> {
    let code = CompiledCode::new(net, spec)?;
    let g = GroundSet::of(net);
    g.check_size().map_err(|e| CodeError::Inconsistent(e.to_string()))?;
    let table = code_table(&code, cap)?;
    let s = code.msg.len();
    let col_e = |i: usize| 2 * s + i;
    let total = table.len() as u64;

    let mut errors = Vec::new();
    for (d, (sink, src, _)) in code.decoders().enumerate() {
        let wrong = table.rows.iter().filter(|r| r[2 * s + code.alphabet.len() + d] != r[src]).count();
        errors.push(DecodingError {
            sink: sink.to_string(),
            source: net.sources[src].clone(),
            probability: Q::new(wrong.into(), total.into()),
        });
    }
    let msgs: Vec<usize> = (0..s).collect();
    let leakage = net
        .wiretap_sets
        .iter()
        .map(|alpha| {
            let cols: Vec<usize> = alpha.iter().filter_map(|id| net.edge_index(id)).map(col_e).collect();
            let (bits, factorizes) = table.mutual_information(&msgs, &cols);
            Leakage { alpha: alpha.clone(), bits, factorizes }
        })
        .collect();
    let rates = net
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| EdgeRate { edge: e.id.clone(), variable: table.entropy(&[col_e(i)]), fixed: log2_size(code.alphabet[i]) })
        .collect();
    let message_entropy = (0..s).map(|i| table.entropy(&[i])).collect();

    let n = g.n();
    let masks: Vec<u32> = (1..(1u32 << n)).collect();
    use rayon::prelude::*;
    let vals: Vec<Bits> = masks
        .par_iter()
        .map(|&mask| {
            let cols: Vec<usize> = crate::entropy::bits(mask).collect();
            entropy_of_counts(table.sorted_counts(&cols).iter())
        })
        .collect();
    let exact = vals.iter().all(|b| b.exact.is_some());
    let mut coords = vec![Q::from_integer(0.into())];
    coords.extend(vals.into_iter().map(|b| b.exact.unwrap_or_else(|| crate::rational::from_f64(b.approx))));
    let entropy = EntropyVector { n, coords, exact };
    Ok(CodeEvaluation { inputs: total, errors, leakage, rates, entropy, message_entropy })
}

impl std::fmt::Display for DecodingError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "P(error {}->{}) = {}", self.source, self.sink, fmt_q(&self.probability))
    }
}
