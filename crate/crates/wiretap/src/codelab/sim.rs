//! Blocklength-`n` simulations of the random constructions behind the inner
//! bounds: typical-set codebooks, symbolwise edge maps, and either symbolwise
//! decoding (zero-error, variable-length) or erasure gating with joint-typicality
//! decoding (asymptotic, fixed-length).

use super::rv::CompiledRv;
use super::table::UniformTable;
use super::typical::{allowed_counts, big_log2, is_typical, sample_typical, typical_probability, typical_set, typical_set_size, TypicalError};
use super::CodeError;
use crate::rational::{fmt_q, log2_exact, q, to_f64, Bits, Q};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

/// Reserved column value for an erased codeword; never a packed sequence.
pub const SENTINEL: u64 = u64::MAX;

/// Trials per Monte Carlo shard; shard `j` draws from ChaCha20 seeded with the
/// run seed on stream `j`, so results do not depend on the thread count.
pub const SHARD: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SimKind {
    ZeroError,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    Exhaustive,
    MonteCarlo { trials: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimCaps {
    /// Largest codebook that is listed explicitly.
    pub enum_cap: u64,
    /// Largest number of input tuples an exhaustive run visits.
    pub state_cap: u64,
}

impl Default for SimCaps {
    fn default() -> Self {
        SimCaps { enum_cap: super::typical::DEFAULT_ENUM_CAP, state_cap: super::code::DEFAULT_STATE_CAP }
    }
}

/// A typical-set codebook, listed in lexicographic order when small enough.
#[derive(Debug, Clone)]
pub enum Codebook {
    Listed(Vec<Vec<u32>>),
    Implicit { size: BigInt },
}

impl Codebook {
    fn build(p: &[Q], n: usize, eps: &Q, cap: u64) -> Result<Codebook, CodeError> {
        match typical_set(p, n, eps, cap) {
            Ok(v) if v.is_empty() => Err(TypicalError::Empty { n }.into()),
            Ok(v) => Ok(Codebook::Listed(v)),
            Err(TypicalError::Cap { size, .. }) => Ok(Codebook::Implicit { size }),
            Err(e) => Err(e.into()),
        }
    }

    pub fn size(&self) -> BigInt {
        match self {
            Codebook::Listed(v) => BigInt::from(v.len()),
            Codebook::Implicit { size } => size.clone(),
        }
    }

    fn sample<R: Rng>(&self, p: &[Q], n: usize, eps: &Q, rng: &mut R) -> Vec<u32> {
        match self {
            Codebook::Listed(v) => v[rng.gen_range(0..v.len())].clone(),
            Codebook::Implicit { .. } => sample_typical(p, n, eps, rng).expect("nonempty typical set"),
        }
    }
}

/// Joint strong-typicality test for a tuple of sequences against a joint pmf
/// flattened row-major over `radices`.
#[derive(Debug, Clone)]
pub struct JointTest {
    radices: Vec<u32>,
    ranges: Vec<(usize, usize)>,
}

impl JointTest {
    pub fn new(p: &[Q], radices: Vec<u32>, n: usize, eps: &Q) -> Self {
        JointTest { radices, ranges: allowed_counts(p, n, eps) }
    }

    pub fn check(&self, seqs: &[&[u32]]) -> bool {
        let n = seqs.first().map_or(0, |s| s.len());
        let mut counts = vec![0usize; self.ranges.len()];
        for i in 0..n {
            let idx = seqs.iter().zip(&self.radices).fold(0usize, |a, (s, &r)| a * r as usize + s[i] as usize);
            counts[idx] += 1;
            if counts[idx] > self.ranges[idx].1 {
                return false;
            }
        }
        counts.iter().zip(&self.ranges).all(|(&c, &(lo, hi))| lo <= c && c <= hi)
    }
}

fn pack(seq: &[u32], base: u32) -> u64 {
    seq.iter().fold(0u64, |a, &x| a * base as u64 + x as u64)
}

fn log2_bits(x: &BigInt) -> Bits {
    let xq = Q::from_integer(x.clone());
    match log2_exact(&xq) {
        Some(k) => Bits::exact(q(k)),
        None => Bits::approx(big_log2(x)),
    }
}

fn bits_max(xs: impl IntoIterator<Item = Bits>) -> Option<Bits> {
    xs.into_iter().fold(None, |acc: Option<Bits>, b| match acc {
        Some(a) if a.approx >= b.approx => Some(a),
        _ => Some(b),
    })
}

fn bits_le(a: &Bits, b: &Bits) -> bool {
    match (&a.exact, &b.exact) {
        (Some(x), Some(y)) => x <= y,
        _ => a.approx <= b.approx + crate::FLOAT_TOL,
    }
}

/// An executable instance of one of the two random constructions.
#[derive(Debug, Clone)]
pub struct SimCode {
    pub kind: SimKind,
    pub rv: CompiledRv,
    pub n_t: usize,
    pub eps: Q,
    pub msg_books: Vec<Codebook>,
    pub key_books: Vec<Codebook>,
    pub edge_pmf: Vec<Vec<Q>>,
    pub edge_typical_size: Vec<BigInt>,
    /// iid probability that `U_e^{n_t}` is atypical.
    pub p_atypical: Vec<Q>,
    /// Edges left out of the slack maximum (zero capacity and constant `U_e`).
    pub skipped_edges: Vec<usize>,
    pub delta: Bits,
    pub n: u64,
    source_tests: Vec<JointTest>,
    node_tests: BTreeMap<String, (Vec<usize>, JointTest)>,
    sink_tests: Vec<JointTest>,
}

fn check_eps(eps: &Q, n_t: usize) -> Result<(), CodeError> {
    if n_t == 0 {
        return Err(CodeError::Inconsistent("n_t must be at least 1".into()));
    }
    if !eps.is_positive() || *eps >= Q::one() {
        return Err(CodeError::Inconsistent(format!("eps = {} outside (0, 1)", fmt_q(eps))));
    }
    Ok(())
}

fn blocklength(n_t: usize, delta: &Bits, a_k: &Q) -> u64 {
    let nt = Q::from_integer(n_t.into());
    match &delta.exact {
        Some(d) => {
            let v = nt * (Q::one() + d) / a_k;
            v.ceil().to_integer().to_u64().unwrap_or(u64::MAX)
        }
        None => (n_t as f64 * (1.0 + delta.approx) / to_f64(a_k)).ceil() as u64,
    }
}

fn common(rv: &CompiledRv, n_t: usize, eps: &Q, caps: SimCaps) -> Result<(Vec<Codebook>, Vec<Codebook>, Vec<Vec<Q>>), CodeError> {
    check_eps(eps, n_t)?;
    let s = rv.num_sources();
    let mut msg_books = Vec::with_capacity(s);
    let mut key_books = Vec::with_capacity(s);
    for i in 0..s {
        msg_books.push(Codebook::build(&rv.m_pmf[i], n_t, eps, caps.enum_cap)?);
        key_books.push(Codebook::build(&rv.k_pmf[i], n_t, eps, caps.enum_cap)?);
    }
    for v in 0..rv.joint[0].0.len() {
        let base = rv.alphabet_of(v) as u64;
        match base.checked_pow(n_t as u32) {
            Some(x) if x < SENTINEL => {}
            _ => return Err(CodeError::StateCap { size: format!("{base}^{n_t}"), cap: SENTINEL }),
        }
    }
    let edge_pmf = (0..rv.code.alphabet.len()).map(|e| rv.marginal(&[rv.var_e(e)])).collect();
    Ok((msg_books, key_books, edge_pmf))
}

fn is_constant(p: &[Q]) -> bool {
    p.iter().filter(|x| !x.is_zero()).count() <= 1
}

/// Zero-error construction: codebooks are the typical sets of `U_m` and `U_k`,
/// edges carry `U_e^{n_t}` unconditionally, sinks decode symbol by symbol.
pub fn build_zero_error_sim(rv: &CompiledRv, n_t: usize, eps: &Q, caps: SimCaps) -> Result<SimCode, CodeError> {
    let (msg_books, key_books, edge_pmf) = common(rv, n_t, eps, caps)?;
    let caps_e = rv.net.capacities();
    let p_atypical: Vec<Q> = edge_pmf.iter().map(|p: &Vec<Q>| Q::one() - typical_probability(p, n_t, eps)).collect();
    let edge_typical_size = edge_pmf.iter().map(|p| typical_set_size(p, n_t, eps)).collect();
    let mut skipped = Vec::new();
    let mut terms = Vec::new();
    for (e, c) in caps_e.iter().enumerate() {
        if c.is_zero() {
            if is_constant(&edge_pmf[e]) {
                skipped.push(e);
                continue;
            }
            return Err(CodeError::Inconsistent(format!("edge {} has zero capacity but a non-constant variable", rv.net.edges[e].id)));
        }
        let fixed = (Q::one() + eps) * (Q::one() + &rv.eps_k / c);
        let support = BigInt::from(rv.edge_support(e));
        let coef = &rv.a_k * &p_atypical[e] / c;
        terms.push(Bits::exact(fixed).add(&log2_bits(&support).scale(&coef)));
    }
    let max = bits_max(terms).unwrap_or_else(|| Bits::exact(Q::one()));
    let delta = max.scale(&q(2)).sub(&Bits::exact(q(2)));
    let n = blocklength(n_t, &delta, &rv.a_k);
    Ok(SimCode {
        kind: SimKind::ZeroError,
        rv: rv.clone(),
        n_t,
        eps: eps.clone(),
        msg_books,
        key_books,
        edge_pmf,
        edge_typical_size,
        p_atypical,
        skipped_edges: skipped,
        delta,
        n,
        source_tests: Vec::new(),
        node_tests: BTreeMap::new(),
        sink_tests: Vec::new(),
    })
}

/// Fixed-length construction: an atypical input tuple erases the outgoing
/// codewords, and sinks decode to the first jointly typical codeword (the
/// smallest codeword when nothing matches or an input is erased).
pub fn build_asymptotic_sim(rv: &CompiledRv, n_t: usize, eps: &Q, caps: SimCaps) -> Result<SimCode, CodeError> {
    let (msg_books, key_books, edge_pmf) = common(rv, n_t, eps, caps)?;
    if let Some(s) = msg_books.iter().position(|b| matches!(b, Codebook::Implicit { .. })) {
        return Err(CodeError::StateCap { size: msg_books[s].size().to_string(), cap: caps.enum_cap });
    }
    let caps_e = rv.net.capacities();
    let mut skipped = Vec::new();
    let mut max: Option<Q> = None;
    for (e, c) in caps_e.iter().enumerate() {
        if c.is_zero() {
            skipped.push(e);
            continue;
        }
        if eps >= c {
            return Err(CodeError::Inconsistent(format!("eps = {} must be below the capacity of {}", fmt_q(eps), rv.net.edges[e].id)));
        }
        let t = (Q::one() + eps) * (Q::one() + &rv.eps_k / c) / (Q::one() - eps / c);
        if max.as_ref().is_none_or(|m| t > *m) {
            max = Some(t);
        }
    }
    let delta = Bits::exact(max.unwrap_or_else(Q::one) * q(2) - q(2));
    let n = blocklength(n_t, &delta, &rv.a_k);
    let s = rv.num_sources();
    let source_tests = (0..s)
        .map(|i| {
            let p: Vec<Q> = rv.m_pmf[i].iter().flat_map(|a| rv.k_pmf[i].iter().map(move |b| a * b)).collect();
            JointTest::new(&p, vec![rv.m_pmf[i].len() as u32, rv.k_pmf[i].len() as u32], n_t, eps)
        })
        .collect();
    let mut node_tests = BTreeMap::new();
    for e in &rv.net.edges {
        if rv.net.is_source(&e.tail) || node_tests.contains_key(&e.tail) {
            continue;
        }
        let ins = rv.net.in_edges(&e.tail);
        let vars: Vec<usize> = ins.iter().map(|&j| rv.var_e(j)).collect();
        let radices = vars.iter().map(|&v| rv.alphabet_of(v)).collect();
        node_tests.insert(e.tail.clone(), (ins, JointTest::new(&rv.marginal(&vars), radices, n_t, eps)));
    }
    let sink_tests = rv
        .code
        .decoders()
        .map(|(_, src, ins)| {
            let vars: Vec<usize> = std::iter::once(rv.var_m(src)).chain(ins.iter().map(|&j| rv.var_e(j))).collect();
            let radices = vars.iter().map(|&v| rv.alphabet_of(v)).collect();
            JointTest::new(&rv.marginal(&vars), radices, n_t, eps)
        })
        .collect();
    let edge_typical_size = edge_pmf.iter().map(|p| typical_set_size(p, n_t, eps)).collect();
    let p_atypical = edge_pmf.iter().map(|p| Q::one() - typical_probability(p, n_t, eps)).collect();
    Ok(SimCode {
        kind: SimKind::Asymptotic,
        rv: rv.clone(),
        n_t,
        eps: eps.clone(),
        msg_books,
        key_books,
        edge_pmf,
        edge_typical_size,
        p_atypical,
        skipped_edges: skipped,
        delta,
        n,
        source_tests,
        node_tests,
        sink_tests,
    })
}

/// Outcome of one input tuple.
struct Sample {
    /// Packed messages, then packed `U_e^{n_t}`, then (asymptotic) gated `W_e`.
    cols: Vec<u64>,
    correct: Vec<bool>,
    u_typical: Vec<bool>,
}

impl SimCode {
    fn inputs(&self) -> BigInt {
        self.msg_books.iter().chain(&self.key_books).map(Codebook::size).product()
    }

    fn simulate(&self, m: &[&[u32]], k: &[&[u32]]) -> Sample {
        let rv = &self.rv;
        let s = rv.num_sources();
        let ne = rv.code.alphabet.len();
        let nt = self.n_t;
        // u[e][i]: symbol of edge e at position i
        let mut u = vec![vec![0u32; nt]; ne];
        let mut w = vec![0u32; ne];
        let mut mi = vec![0u32; s];
        let mut ki = vec![0u32; s];
        for i in 0..nt {
            for j in 0..s {
                mi[j] = m[j][i];
                ki[j] = k[j][i];
            }
            rv.code.run(&mi, &ki, &mut w);
            for e in 0..ne {
                u[e][i] = w[e];
            }
        }
        let mut cols: Vec<u64> = m.iter().enumerate().map(|(j, x)| pack(x, rv.m_pmf[j].len() as u32)).collect();
        cols.extend((0..ne).map(|e| pack(&u[e], rv.code.alphabet[e])));
        let u_typical = (0..ne).map(|e| is_typical(&u[e], &self.edge_pmf[e], &self.eps)).collect();
        let correct = match self.kind {
            SimKind::ZeroError => {
                let mut out = Vec::new();
                for (d, (_, src, _)) in rv.code.decoders().enumerate() {
                    let ok = (0..nt).all(|i| {
                        for e in 0..ne {
                            w[e] = u[e][i];
                        }
                        rv.code.decode(d, &w) == m[src][i]
                    });
                    out.push(ok);
                }
                out
            }
            SimKind::Asymptotic => {
                let mut live = vec![false; ne];
                let mut node_ok: BTreeMap<&str, bool> = BTreeMap::new();
                for &e in rv.code.edge_order() {
                    live[e] = match rv.code.source_of_edge(e) {
                        Some(j) => self.source_tests[j].check(&[m[j], k[j]]),
                        None => {
                            let tail = rv.net.edges[e].tail.as_str();
                            *node_ok.entry(tail).or_insert_with(|| {
                                let (ins, test) = &self.node_tests[tail];
                                ins.iter().all(|&j| live[j]) && test.check(&ins.iter().map(|&j| u[j].as_slice()).collect::<Vec<_>>())
                            })
                        }
                    };
                }
                cols.extend((0..ne).map(|e| if live[e] { pack(&u[e], rv.code.alphabet[e]) } else { SENTINEL }));
                rv.code
                    .decoders()
                    .enumerate()
                    .map(|(d, (_, src, ins))| {
                        let Codebook::Listed(book) = &self.msg_books[src] else { unreachable!("checked at build") };
                        let decoded: &[u32] = if ins.iter().any(|&j| !live[j]) {
                            &book[0]
                        } else {
                            let mut seqs: Vec<&[u32]> = vec![&[]];
                            seqs.extend(ins.iter().map(|&j| u[j].as_slice()));
                            book.iter()
                                .find(|c| {
                                    seqs[0] = c;
                                    self.sink_tests[d].check(&seqs)
                                })
                                .unwrap_or(&book[0])
                        };
                        decoded == m[src]
                    })
                    .collect()
            }
        };
        Sample { cols, correct, u_typical }
    }

    fn exhaustive(&self, caps: SimCaps) -> Result<Vec<Sample>, CodeError> {
        let total = self.inputs();
        if total > BigInt::from(caps.state_cap) {
            return Err(CodeError::StateCap { size: total.to_string(), cap: caps.state_cap });
        }
        let books: Vec<&Vec<Vec<u32>>> = self
            .msg_books
            .iter()
            .zip(&self.key_books)
            .flat_map(|(a, b)| [a, b])
            .map(|b| match b {
                Codebook::Listed(v) => Ok(v),
                Codebook::Implicit { size } => Err(CodeError::StateCap { size: size.to_string(), cap: caps.enum_cap }),
            })
            .collect::<Result<_, _>>()?;
        let total = total.to_u64().expect("below the state cap");
        Ok((0..total)
            .into_par_iter()
            .map(|mut idx| {
                // mixed radix over (m_0, k_0, m_1, k_1, ...), last book fastest
                let mut pick = vec![0usize; books.len()];
                for b in (0..books.len()).rev() {
                    let len = books[b].len() as u64;
                    pick[b] = (idx % len) as usize;
                    idx /= len;
                }
                let m: Vec<&[u32]> = (0..self.msg_books.len()).map(|j| books[2 * j][pick[2 * j]].as_slice()).collect();
                let k: Vec<&[u32]> = (0..self.msg_books.len()).map(|j| books[2 * j + 1][pick[2 * j + 1]].as_slice()).collect();
                self.simulate(&m, &k)
            })
            .collect())
    }

    fn monte_carlo(&self, trials: u64, seed: u64) -> Vec<Sample> {
        let shards = trials.div_ceil(SHARD);
        (0..shards)
            .into_par_iter()
            .flat_map_iter(|j| {
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                rng.set_stream(j);
                let count = SHARD.min(trials - j * SHARD);
                (0..count)
                    .map(|_| {
                        let mut m = Vec::new();
                        let mut k = Vec::new();
                        for s in 0..self.msg_books.len() {
                            m.push(self.msg_books[s].sample(&self.rv.m_pmf[s], self.n_t, &self.eps, &mut rng));
                            k.push(self.key_books[s].sample(&self.rv.k_pmf[s], self.n_t, &self.eps, &mut rng));
                        }
                        let mr: Vec<&[u32]> = m.iter().map(Vec::as_slice).collect();
                        let kr: Vec<&[u32]> = k.iter().map(Vec::as_slice).collect();
                        self.simulate(&mr, &kr)
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SourceMetrics {
    pub source: String,
    pub codebook_size: String,
    pub key_codebook_size: String,
    /// `log |M_s| / n`.
    #[serde(serialize_with = "super::code::bits_json")]
    pub rate: Bits,
    /// Lower bound on the rate promised by the construction, with `r_s = a_k h_m`.
    #[serde(serialize_with = "super::code::bits_json")]
    pub rate_bound: Bits,
    pub rate_bound_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorMetrics {
    pub sink: String,
    pub source: String,
    pub errors: u64,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub probability: Q,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeMetrics {
    pub edge: String,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub budget: Q,
    /// Measured `H(W_e)` (zero-error) or `log(|T(U_e)| + 1)` (asymptotic), in bits.
    #[serde(serialize_with = "super::code::bits_json")]
    pub load: Bits,
    pub within_budget: bool,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub p_atypical_iid: Q,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub p_atypical_measured: Q,
    /// Asymptotic only: fraction of erased codewords.
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "opt_q")]
    pub p_erased: Option<Q>,
}

fn opt_q<S: serde::Serializer>(x: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&fmt_q(v)),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LeakageMetrics {
    pub alpha: Vec<String>,
    /// `I(M_S; W_alpha)` in bits over the whole block.
    #[serde(serialize_with = "super::code::bits_json")]
    pub bits: Bits,
    pub factorizes: bool,
    /// The bound the measured leakage is compared to, in bits over the block.
    #[serde(serialize_with = "super::code::bits_json")]
    pub bound: Bits,
    pub within_bound: bool,
    /// Asymptotic only: leakage of the ungated sequences `U_alpha^{n_t}`.
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "opt_bits")]
    pub ungated_bits: Option<Bits>,
}

fn opt_bits<S: serde::Serializer>(x: &Option<Bits>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(b) => b.to_json().serialize(s),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimReport {
    pub kind: SimKind,
    pub mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub samples: u64,
    pub n_t: usize,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub eps: Q,
    #[serde(serialize_with = "super::code::bits_json")]
    pub delta: Bits,
    pub n: u64,
    pub skipped_edges: Vec<String>,
    pub sources: Vec<SourceMetrics>,
    pub errors: Vec<ErrorMetrics>,
    pub edges: Vec<EdgeMetrics>,
    pub leakage: Vec<LeakageMetrics>,
    pub notes: Vec<String>,
}

impl SimReport {
    pub fn zero_errors(&self) -> bool {
        self.errors.iter().all(|e| e.errors == 0)
    }

    pub fn error_probability(&self) -> Q {
        self.errors.iter().map(|e| e.probability.clone()).max().unwrap_or_else(Q::zero)
    }

    pub fn leakage_within_bounds(&self) -> bool {
        self.leakage.iter().all(|l| l.within_bound)
    }

    pub fn edges_within_budget(&self) -> bool {
        self.edges.iter().all(|e| e.within_budget)
    }
}

pub fn run_sim(sim: &SimCode, mode: SimMode, caps: SimCaps) -> Result<SimReport, CodeError> {
    let samples = match mode {
        SimMode::Exhaustive => sim.exhaustive(caps)?,
        SimMode::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(CodeError::Inconsistent("trials must be positive".into()));
            }
            sim.monte_carlo(trials, seed)
        }
    };
    let rv = &sim.rv;
    let net = &rv.net;
    let s = rv.num_sources();
    let ne = rv.code.alphabet.len();
    let total = samples.len() as u64;
    let frac = |c: u64| Q::new(c.into(), total.into());
    let n = sim.n;
    let nq = Q::from_integer(n.into());
    let nt = sim.n_t as f64;
    let eps_f = to_f64(&sim.eps);
    let log_1m_eps = (1.0 - eps_f).log2();

    let errors = rv
        .code
        .decoders()
        .enumerate()
        .map(|(d, (sink, src, _))| {
            let wrong = samples.iter().filter(|x| !x.correct[d]).count() as u64;
            ErrorMetrics { sink: sink.to_string(), source: net.sources[src].clone(), errors: wrong, probability: frac(wrong) }
        })
        .collect();

    let sources = (0..s)
        .map(|j| {
            let size = sim.msg_books[j].size();
            let rate = log2_bits(&size).scale(&Q::new(1.into(), n.into()));
            let r_s = to_f64(&rv.a_k) * rv.entropy_of(&[rv.var_m(j)]).approx;
            let a = to_f64(&rv.a_k);
            let denom = nt * (1.0 + sim.delta.approx) + a;
            let bound = nt * (1.0 - eps_f) / denom * (r_s - to_f64(&rv.eps_k)) + a * log_1m_eps / denom;
            SourceMetrics {
                source: net.sources[j].clone(),
                codebook_size: size.to_string(),
                key_codebook_size: sim.key_books[j].size().to_string(),
                rate_bound_holds: rate.approx + crate::FLOAT_TOL >= bound,
                rate,
                rate_bound: Bits::approx(bound),
            }
        })
        .collect();

    let table = UniformTable::new(samples.iter().map(|x| x.cols.clone()).collect());
    let msg_cols: Vec<usize> = (0..s).collect();
    let u_col = |e: usize| s + e;
    let w_col = |e: usize| s + ne + e;

    let edges = net
        .edges
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            let budget = &nq * &edge.cap;
            let load = match sim.kind {
                SimKind::ZeroError => table.entropy(&[u_col(e)]),
                SimKind::Asymptotic => log2_bits(&(&sim.edge_typical_size[e] + 1)),
            };
            let atyp = samples.iter().filter(|x| !x.u_typical[e]).count() as u64;
            let erased = (sim.kind == SimKind::Asymptotic)
                .then(|| frac(samples.iter().filter(|x| x.cols[w_col(e)] == SENTINEL).count() as u64));
            EdgeMetrics {
                edge: edge.id.clone(),
                within_budget: bits_le(&load, &Bits::exact(budget.clone())),
                budget,
                load,
                p_atypical_iid: sim.p_atypical[e].clone(),
                p_atypical_measured: frac(atyp),
                p_erased: erased,
            }
        })
        .collect();

    let h_keys: f64 = (0..s).map(|j| rv.entropy_of(&[rv.var_k(j)]).approx).sum();
    let leakage = net
        .wiretap_sets
        .iter()
        .map(|alpha| {
            let idx: Vec<usize> = alpha.iter().filter_map(|id| net.edge_index(id)).collect();
            let u_cols: Vec<usize> = idx.iter().map(|&e| u_col(e)).collect();
            let (ub, uf) = table.mutual_information(&msg_cols, &u_cols);
            match sim.kind {
                SimKind::ZeroError => {
                    // per-symbol bound scaled back to the whole block
                    let bound = s as f64 * log_1m_eps + 2.0 * eps_f * nt * h_keys;
                    LeakageMetrics {
                        alpha: alpha.clone(),
                        within_bound: ub.approx <= bound + crate::FLOAT_TOL,
                        bits: ub,
                        factorizes: uf,
                        bound: Bits::approx(bound),
                        ungated_bits: None,
                    }
                }
                SimKind::Asymptotic => {
                    let w_cols: Vec<usize> = idx.iter().map(|&e| w_col(e)).collect();
                    let (wb, wf) = table.mutual_information(&msg_cols, &w_cols);
                    // the erasure pattern of alpha carries at most |alpha| bits
                    let bound = ub.add(&Bits::exact(q(idx.len() as i64)));
                    LeakageMetrics {
                        alpha: alpha.clone(),
                        within_bound: bits_le(&wb, &bound),
                        bits: wb,
                        factorizes: wf,
                        bound,
                        ungated_bits: Some(ub),
                    }
                }
            }
        })
        .collect();

    let mut notes = Vec::new();
    if let SimMode::MonteCarlo { .. } = mode {
        notes.push("leakage and entropies are plug-in estimates from sampled inputs and are biased upward for small sample counts".to_string());
    }
    if sim.kind == SimKind::Asymptotic {
        notes.push("decoding error is measured, not bounded; no convergence guarantee is checked".to_string());
    }
    if sim.delta.exact.is_none() {
        notes.push("delta involves a non-dyadic logarithm and is a double-precision value".to_string());
    }
    let (mode_name, seed) = match mode {
        SimMode::Exhaustive => ("exhaustive", None),
        SimMode::MonteCarlo { seed, .. } => ("montecarlo", Some(seed)),
    };
    Ok(SimReport {
        kind: sim.kind,
        mode: mode_name,
        seed,
        samples: total,
        n_t: sim.n_t,
        eps: sim.eps.clone(),
        delta: sim.delta.clone(),
        n,
        skipped_edges: sim.skipped_edges.iter().map(|&e| net.edges[e].id.clone()).collect(),
        sources,
        errors,
        edges,
        leakage,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codelab::rv::parse_rv;
    use crate::rational::frac;

    fn otp() -> CompiledRv {
        parse_rv(include_str!("../../fixtures/otp_rv.json")).unwrap().compile().unwrap()
    }

    #[test]
    fn otp_codebooks_and_blocklength() {
        let sim = build_zero_error_sim(&otp(), 4, &frac(1, 10), SimCaps::default()).unwrap();
        assert_eq!(sim.msg_books[0].size(), BigInt::from(6));
        // P(atypical) = 10/16 on both edges, so delta = 2(11/10 + 5/8 - 1) = 29/20
        assert_eq!(sim.delta.exact, Some(frac(29, 20)));
        assert_eq!(sim.n, 10);
    }

    #[test]
    fn otp_zero_error_run_decodes_and_respects_bounds() {
        let sim = build_zero_error_sim(&otp(), 4, &frac(1, 10), SimCaps::default()).unwrap();
        let r = run_sim(&sim, SimMode::Exhaustive, SimCaps::default()).unwrap();
        assert_eq!(r.samples, 36);
        assert!(r.zero_errors());
        assert!(r.leakage_within_bounds());
        assert!(r.edges_within_budget());
    }

    #[test]
    fn montecarlo_is_reproducible() {
        let sim = build_zero_error_sim(&otp(), 6, &frac(1, 10), SimCaps::default()).unwrap();
        let a = run_sim(&sim, SimMode::MonteCarlo { trials: 5000, seed: 7 }, SimCaps::default()).unwrap();
        let b = run_sim(&sim, SimMode::MonteCarlo { trials: 5000, seed: 7 }, SimCaps::default()).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn degenerate_message_gives_rate_zero() {
        let mut rv = parse_rv(include_str!("../../fixtures/otp_rv.json")).unwrap();
        rv.sources[0].m_pmf = vec![Q::one(), Q::zero()];
        let sim = build_zero_error_sim(&rv.compile().unwrap(), 4, &frac(1, 10), SimCaps::default()).unwrap();
        let r = run_sim(&sim, SimMode::Exhaustive, SimCaps::default()).unwrap();
        assert_eq!(r.sources[0].codebook_size, "1");
        assert_eq!(r.sources[0].rate.exact, Some(Q::zero()));
    }

    #[test]
    fn empty_typical_set_is_an_error() {
        let mut rv = parse_rv(include_str!("../../fixtures/otp_rv.json")).unwrap();
        rv.sources[0].m_pmf = vec![frac(1, 3), frac(2, 3)];
        let err = build_zero_error_sim(&rv.compile().unwrap(), 2, &frac(1, 10), SimCaps::default()).unwrap_err();
        assert!(err.to_string().contains("increase n_t or eps"), "{err}");
    }
}
