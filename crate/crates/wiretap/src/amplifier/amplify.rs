//! Weak-to-strong secrecy: `L` repetitions of a weak code, a syndrome side
//! message `O_s` per source, and a seeded Toeplitz extractor on `M_s^L`.
//!
//! Bits of one use are laid out source by source (source 0 lowest); use `l`
//! occupies bits `l*b .. (l+1)*b` of the global vector, and the extractor input
//! of source `s` lists its own bits use by use.

use super::coupling::{maximal_coupling, mismatch_probability, pinsker_holds};
use super::extractor::{apply, low_mask, Extractor, MAX_BITS};
use super::gf2::{basis, fwht, rank, restricted_span};
use super::weak::{EveView, WeakCode};
use super::AmpError;
use crate::codelab::typical_probability;
use crate::rational::{entropy_of_pmf, fmt_q, pow2, to_f64, Bits, Q};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Largest number of seed combinations visited by an exact evaluation.
pub const DEFAULT_SEED_CAP: u64 = 1 << 24;
/// Largest number of eavesdropper class sequences per wiretap set.
pub const CLASS_CAP: u64 = 1 << 12;
const CHUNK: u64 = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaPolicy {
    /// `lambda = n + ceil(log2 L)`.
    Log,
    Fixed(u32),
}

impl LambdaPolicy {
    pub fn value(self, n: u32, l: u32) -> u32 {
        match self {
            LambdaPolicy::Log => n + (32 - (l.max(1) - 1).leading_zeros()),
            LambdaPolicy::Fixed(x) => x,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmpParams {
    pub l: u32,
    pub delta1: Q,
    pub delta2: Q,
    pub eps2: Q,
    pub lambda: LambdaPolicy,
    /// Seed of the fixed random syndrome matrices.
    pub side_seed: u64,
    /// Worst case: the eavesdropper also reads every side message.
    pub eve_sees_side: bool,
}

impl Default for AmpParams {
    fn default() -> Self {
        AmpParams {
            l: 1,
            delta1: Q::from_integer(2.into()),
            delta2: Q::new(1.into(), 10.into()),
            eps2: Q::new(1.into(), 10.into()),
            lambda: LambdaPolicy::Log,
            side_seed: 0,
            eve_sees_side: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourcePlan {
    pub source: String,
    pub n1: u32,
    pub n2: u32,
    pub n3: u32,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub rate: Q,
    /// Syndrome length `ceil(L max_t H(M_s | M_hat_{s->t}))`.
    pub side_bits: u32,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub side_budget: Q,
    pub side_within_budget: bool,
    /// Min-entropy guaranteed on the good event, `(1-eps2) L n (r-eps) - sum log|O| - lambda`.
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub min_entropy_floor: Q,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub eps3: Q,
    /// Distance promised by the leftover hash lemma at this output length.
    #[serde(serialize_with = "crate::rational::serialize_approx")]
    pub implied_eps_prime: f64,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub seed_budget: Q,
    pub seed_within_delta1: bool,
}

#[derive(Debug, Clone)]
pub struct AmplifiedCode {
    pub weak: WeakCode,
    pub params: AmpParams,
    pub eps: Q,
    pub lambda: u32,
    pub plans: Vec<SourcePlan>,
    pub extractors: Vec<Extractor>,
    /// Syndrome rows per source, over that source's extractor input bits.
    pub side: Vec<Vec<u64>>,
}

fn ceil_bits(b: &Bits) -> u32 {
    match &b.exact {
        Some(x) => x.ceil().to_integer().to_u32().unwrap_or(0),
        None => (b.approx - crate::FLOAT_TOL).ceil().max(0.0) as u32,
    }
}

pub fn amplify(weak: &WeakCode, params: &AmpParams) -> Result<AmplifiedCode, AmpError> {
    weak.register()?;
    if params.l == 0 {
        return Err(AmpError::Parameter("L must be at least 1".into()));
    }
    if params.delta2.is_negative() || params.delta1.is_negative() || params.eps2.is_negative() || params.eps2 >= Q::one() {
        return Err(AmpError::Parameter("need delta1, delta2 >= 0 and 0 <= eps2 < 1".into()));
    }
    let eps = weak.declared_leakage.clone().max(weak.declared_error.clone());
    let n = weak.blocklength;
    let l = params.l;
    let lq = Q::from_integer(l.into());
    let nq = Q::from_integer(n.into());
    let lambda = params.lambda.value(n, l);
    if l * weak.total_bits() > MAX_BITS {
        return Err(AmpError::Parameter(format!("L times message bits per use = {} exceeds {MAX_BITS}", l * weak.total_bits())));
    }
    let side_bits: Vec<u32> = (0..weak.sources.len())
        .map(|s| {
            weak.legit
                .iter()
                .filter(|v| v.source == weak.sources[s].node)
                .map(|v| ceil_bits(&weak.equivocation(v).scale(&lq)))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let total_side: u32 = side_bits.iter().sum();
    let mut plans = Vec::new();
    let mut extractors = Vec::new();
    let mut side = Vec::new();
    for (s, src) in weak.sources.iter().enumerate() {
        let bits = weak.bits(s);
        let n1 = l * bits;
        let r = Q::new(bits.into(), n.into());
        let lnr = &lq * &nq * &r;
        let floor_b = (Q::one() - &params.eps2) * &lq * &nq * (&r - &eps) - Q::from_integer(total_side.into()) - Q::from_integer(lambda.into());
        let n3 = (&floor_b - &params.delta2 * &lnr).floor().to_integer();
        if n3 < BigInt::one() {
            return Err(AmpError::Sizing(format!(
                "source {}: n3 = floor((1 - eps2) L n (r - eps) - sum log|O| - lambda - delta2 L n r) = floor({} - {} * {}) = {} < 1",
                src.node,
                fmt_q(&floor_b),
                fmt_q(&params.delta2),
                fmt_q(&lnr),
                n3
            )));
        }
        let ex = Extractor::new(n1, n3.to_u32().expect("n3 fits"))?;
        let side_budget = &lq * (&nq * &r * &eps + Q::one());
        let seed_budget = &params.delta1 * &lnr;
        let eps3 = Q::one() - &floor_b / &lnr;
        let implied = (-(to_f64(&floor_b) - ex.n3 as f64) / 2.0).exp2();
        let mut rng = ChaCha20Rng::seed_from_u64(params.side_seed);
        rng.set_stream(s as u64);
        side.push((0..side_bits[s]).map(|_| rng.gen::<u64>() & low_mask(n1 as usize)).collect());
        plans.push(SourcePlan {
            source: src.node.clone(),
            n1,
            n2: ex.n2,
            n3: ex.n3,
            rate: r,
            side_bits: side_bits[s],
            side_within_budget: Q::from_integer(side_bits[s].into()) <= side_budget,
            side_budget,
            min_entropy_floor: floor_b,
            eps3,
            implied_eps_prime: implied,
            seed_within_delta1: Q::from_integer(ex.n2.into()) <= seed_budget,
            seed_budget,
        });
        extractors.push(ex);
    }
    Ok(AmplifiedCode { weak: weak.clone(), params: params.clone(), eps, lambda, plans, extractors, side })
}

impl AmplifiedCode {
    /// `M_bar_s = E_s(M_s^L, V_s)` for the packed extractor input `t`.
    pub fn output(&self, s: usize, t: u64, v: u64) -> u64 {
        self.extractors[s].extract(t, v)
    }

    /// Maps a mask over source `s`'s extractor input into the global bit layout.
    fn spread(&self, s: usize, mask: u64) -> u64 {
        let bits = self.weak.bits(s) as usize;
        let b = self.weak.total_bits() as usize;
        let off = self.weak.offset(s) as usize;
        let mut out = 0u64;
        for l in 0..self.params.l as usize {
            let chunk = (mask >> (l * bits)) & low_mask(bits);
            out |= chunk << (l * b + off);
        }
        out
    }
}

/// Eavesdropper posterior on one use's message bits, up to a translation:
/// observations whose posteriors are translates of each other share a class.
#[derive(Debug, Clone)]
struct EveClass {
    weight: Q,
    qhat: Vec<f64>,
    zero: Vec<bool>,
    free: u64,
}

fn eve_classes(weak: &WeakCode, view: &EveView) -> Vec<EveClass> {
    let b = weak.total_bits();
    let size = 1usize << b;
    let ny = view.table[0].len();
    let pm = Q::new(1.into(), weak.num_tuples().into());
    let mut reps: Vec<(Vec<Q>, Q)> = Vec::new();
    for y in 0..ny {
        let mut q = vec![Q::zero(); size];
        for (idx, row) in view.table.iter().enumerate() {
            q[weak.pack_bits(&weak.split(idx)) as usize] = row[y].clone();
        }
        let total: Q = q.iter().sum();
        if total.is_zero() {
            continue;
        }
        q.iter_mut().for_each(|x| *x /= &total);
        let py = total * &pm;
        let found = reps.iter().position(|(r, _)| (0..size).any(|d| (0..size).all(|u| q[u] == r[u ^ d])));
        match found {
            Some(i) => reps[i].1 += py,
            None => reps.push((q, py)),
        }
    }
    reps.into_iter()
        .map(|(q, weight)| {
            let exact: Vec<Q> = (0..size)
                .map(|a| q.iter().enumerate().map(|(u, p)| if (a & u).count_ones() % 2 == 0 { p.clone() } else { -p.clone() }).sum())
                .collect();
            let zero: Vec<bool> = exact.iter().map(Q::is_zero).collect();
            let free = (0..b).filter(|&j| (0..size).filter(|a| a >> j & 1 == 1).all(|a| zero[a])).fold(0u64, |m, j| m | 1 << j);
            EveClass { weight, qhat: exact.iter().map(to_f64).collect(), zero, free }
        })
        .collect()
}

/// `H(Bx | class sequence)` for `x` drawn from the per-use posteriors; the
/// integer is set when the value is an exact rank.
fn conditional_entropy(rows: &[u64], seq: &[&EveClass], b: usize) -> Result<(f64, Option<i64>), AmpError> {
    let r = rank(rows) as i64;
    let free = seq.iter().enumerate().fold(0u64, |m, (l, c)| m | (c.free << (l * b)));
    let w = restricted_span(rows, free);
    let d = w.len();
    if d > 24 {
        return Err(AmpError::StateCap { size: format!("2^{d} Fourier coefficients"), cap: 1 << 24 });
    }
    let mask = low_mask(b);
    let coeff = |a: u64| -> (f64, bool) {
        let mut v = 1.0;
        for (l, c) in seq.iter().enumerate() {
            let i = ((a >> (l * b)) & mask) as usize;
            if c.zero[i] {
                return (0.0, true);
            }
            v *= c.qhat[i];
        }
        (v, false)
    };
    let mut g = vec![0.0; 1 << d];
    g[0] = 1.0;
    let (mut sigma, mut a) = (0usize, 0u64);
    let mut all_zero = true;
    for k in 1..(1usize << d) {
        let t = k.trailing_zeros() as usize;
        sigma ^= 1 << t;
        a ^= w[t];
        let (v, z) = coeff(a);
        all_zero &= z;
        g[sigma] = v;
    }
    if all_zero {
        return Ok((r as f64, Some(r)));
    }
    fwht(&mut g);
    let scale = (1u64 << d) as f64;
    let h: f64 = g.iter().map(|&x| (x / scale).max(0.0)).filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum();
    Ok(((r - d as i64) as f64 + h, None))
}

/// Records the image of `x -> A x` for one seed, `A` given by its rows over `width` input bits.
fn add_image(p: &mut Partial, rows: &[u64], width: usize) -> usize {
    let cols: Vec<u64> = (0..width).map(|j| rows.iter().enumerate().fold(0u64, |c, (i, r)| c | ((r >> j) & 1) << i)).collect();
    let span = basis(&cols);
    if span.len() == rows.len() {
        p.full += 1;
        return span.len();
    }
    let weight = 1u64 << (rows.len() - span.len());
    let mut y = 0u64;
    p.image[0] += weight;
    for k in 1..(1usize << span.len()) {
        y ^= span[k.trailing_zeros() as usize];
        p.image[y as usize] += weight;
    }
    span.len()
}

#[derive(Debug, Clone, Serialize)]
pub struct LeakageReport {
    pub alpha: Vec<String>,
    /// `I(M_bar_S; Y_alpha^{nL}, O_S, V_S)` in bits, averaged exactly over all seeds.
    #[serde(serialize_with = "crate::codelab::bits_json")]
    pub bits: Bits,
    /// `I(M_bar; V)`, positive when some seeds give a hash that is not onto.
    #[serde(serialize_with = "crate::codelab::bits_json")]
    pub seed_dependence: Bits,
    /// `I(M_bar; Y_alpha^{nL}, O_S | V_S)`.
    #[serde(serialize_with = "crate::codelab::bits_json")]
    pub given_seed: Bits,
    pub exact_zero: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformityReport {
    pub source: String,
    /// Seed-averaged `d_TV(p_{M_bar | V}, uniform)`.
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub dtv: Q,
    /// Seed-averaged `D(p_{M_bar | V} || uniform)` in bits.
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub divergence: Q,
    pub pinsker_every_seed: bool,
    pub pinsker_average: bool,
    /// `P(U_s != M_bar_s)` under the maximal coupling, averaged over seeds.
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub coupling_error: Q,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub source: String,
    pub sink: String,
    pub side_bits: u32,
    /// `P(M_tilde^L != M^L)`; absent when syndrome decoding is over the cap.
    #[serde(serialize_with = "opt_q")]
    pub block_error: Option<Q>,
    /// Union bound on `P(U_s != M_bar_{s->t})`, side information delivered exactly.
    #[serde(serialize_with = "opt_q")]
    pub end_to_end_bound: Option<Q>,
}

fn opt_q<S: serde::Serializer>(x: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&fmt_q(v)),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TypicalityReport {
    /// `P((M_S^L, Y_alpha^{nL}) typical)` per wiretap set, exactly.
    pub per_alpha: Vec<(Vec<String>, String)>,
    /// Union bound on the probability that some wiretap set is atypical.
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub failure_union: Q,
    #[serde(serialize_with = "crate::rational::serialize_approx")]
    pub hoeffding: f64,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub p_star: Q,
    #[serde(serialize_with = "crate::rational::serialize_approx")]
    pub gamma: f64,
    pub within_hoeffding: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct InflationReport {
    /// Bits carried per extra use, `(r - eps)(1 - |D| eps) - 1/n`, per source.
    pub transport: Vec<String>,
    #[serde(serialize_with = "opt_q")]
    pub side: Option<Q>,
    #[serde(serialize_with = "opt_q")]
    pub seed: Option<Q>,
    /// The budget form with the seed charged at `delta1 L n r`.
    #[serde(serialize_with = "opt_q")]
    pub budget_form: Option<Q>,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub budget: Q,
    pub side_within_budget: bool,
    pub total_within_budget: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AmpReport {
    pub l: u32,
    pub blocklength: u32,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub eps: Q,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub eps2: Q,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub delta1: Q,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub delta2: Q,
    pub lambda: u32,
    /// Lower bound on the probability of the min-entropy event, `1 - 2^-lambda`.
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub min_entropy_event_bound: Q,
    pub eve_sees_side: bool,
    pub seeds: u64,
    pub plans: Vec<SourcePlan>,
    pub leakage: Vec<LeakageReport>,
    pub uniformity: Vec<UniformityReport>,
    pub errors: Vec<ErrorReport>,
    pub typicality: TypicalityReport,
    pub inflation: InflationReport,
    /// `n3 / (L n + extra uses)` per source.
    pub effective_rate: Vec<Option<String>>,
}

impl AmpReport {
    pub fn total_leakage(&self) -> f64 {
        self.leakage.iter().map(|l| l.bits.approx).fold(0.0, f64::max)
    }
}

#[derive(Clone, Default)]
struct Partial {
    rank_sum: u64,
    /// Seeds whose hash is onto.
    full: u64,
    /// `2^(N3 - rank)` summed over the seeds whose hash image contains each output.
    image: Vec<u64>,
    /// per wiretap set, per class sequence: (exact sum, float sum, all exact)
    h: Vec<Vec<(i64, f64, bool)>>,
}

pub fn evaluate_amplified(code: &AmplifiedCode, seed_cap: u64) -> Result<AmpReport, AmpError> {
    let weak = &code.weak;
    let ns = weak.sources.len();
    let l = code.params.l as usize;
    let b = weak.total_bits() as usize;
    let n2_total: u32 = code.extractors.iter().map(|e| e.n2).sum();
    if n2_total > 40 || (1u64 << n2_total) > seed_cap {
        return Err(AmpError::StateCap { size: format!("2^{n2_total} seeds"), cap: seed_cap });
    }
    let seeds = 1u64 << n2_total;

    // eavesdropper classes and their sequences over L uses
    let classes: Vec<Vec<EveClass>> = weak.eavesdroppers.iter().map(|v| eve_classes(weak, v)).collect();
    let mut seqs: Vec<Vec<(Vec<usize>, Q)>> = Vec::new();
    for cl in &classes {
        let count = (cl.len() as u64).checked_pow(l as u32).filter(|&c| c <= CLASS_CAP);
        let Some(count) = count else {
            return Err(AmpError::StateCap { size: format!("{}^{l} class sequences", cl.len()), cap: CLASS_CAP });
        };
        seqs.push(
            (0..count)
                .map(|mut i| {
                    let mut v = vec![0usize; l];
                    let mut w = Q::one();
                    for slot in v.iter_mut() {
                        *slot = (i % cl.len() as u64) as usize;
                        i /= cl.len() as u64;
                        w *= &cl[*slot].weight;
                    }
                    (v, w)
                })
                .collect(),
        );
    }
    let side_rows: Vec<u64> = if code.params.eve_sees_side {
        (0..ns).flat_map(|s| code.side[s].iter().map(move |&r| (s, r))).map(|(s, r)| code.spread(s, r)).collect()
    } else {
        Vec::new()
    };
    // H(O | class sequence) does not depend on the seed
    let mut side_h: Vec<Vec<(f64, Option<i64>)>> = Vec::new();
    for (a, sq) in seqs.iter().enumerate() {
        let mut v = Vec::new();
        for (cs, _) in sq {
            let refs: Vec<&EveClass> = cs.iter().map(|&i| &classes[a][i]).collect();
            v.push(conditional_entropy(&side_rows, &refs, b)?);
        }
        side_h.push(v);
    }

    let n2s: Vec<u32> = code.extractors.iter().map(|e| e.n2).collect();
    let seed_rows = |mut v: u64| -> Vec<u64> {
        let mut rows = Vec::new();
        for s in 0..ns {
            let vs = v & low_mask(n2s[s] as usize);
            v >>= n2s[s];
            rows.extend(code.extractors[s].rows(vs).into_iter().map(|r| code.spread(s, r)));
        }
        rows
    };
    let n3_total: u32 = code.extractors.iter().map(|e| e.n3).sum();
    if n3_total > 20 || n2_total + n3_total > 62 {
        return Err(AmpError::StateCap { size: format!("2^{n3_total} outputs over 2^{n2_total} seeds"), cap: 1 << 20 });
    }
    let width = code.params.l as usize * b;
    let empty = || Partial { rank_sum: 0, full: 0, image: vec![0; 1 << n3_total], h: seqs.iter().map(|sq| vec![(0, 0.0, true); sq.len()]).collect() };
    let chunks: Vec<Result<Partial, AmpError>> = (0..seeds.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut p = empty();
            for v in c * CHUNK..((c + 1) * CHUNK).min(seeds) {
                let mut rows = seed_rows(v);
                p.rank_sum += add_image(&mut p, &rows, width) as u64;
                rows.extend_from_slice(&side_rows);
                for (a, sq) in seqs.iter().enumerate() {
                    for (k, (cs, _)) in sq.iter().enumerate() {
                        let refs: Vec<&EveClass> = cs.iter().map(|&i| &classes[a][i]).collect();
                        let (f, e) = conditional_entropy(&rows, &refs, b)?;
                        let slot = &mut p.h[a][k];
                        slot.1 += f;
                        match e {
                            Some(x) => slot.0 += x,
                            None => slot.2 = false,
                        }
                    }
                }
            }
            Ok(p)
        })
        .collect();
    let mut total = empty();
    for c in chunks {
        let c = c?;
        total.rank_sum += c.rank_sum;
        total.full += c.full;
        total.image.iter_mut().zip(&c.image).for_each(|(t, x)| *t += x);
        for (ta, ca) in total.h.iter_mut().zip(&c.h) {
            for (t, x) in ta.iter_mut().zip(ca) {
                t.0 += x.0;
                t.1 += x.1;
                t.2 &= x.2;
            }
        }
    }
    // the seed is independent of x but not of M_bar when some hashes are not onto
    let denom = Q::from_integer((seeds << n3_total).into());
    let h_out = entropy_of_pmf(&total.image.iter().map(|&c| Q::new((c + total.full).into(), denom.numer().clone())).collect::<Vec<_>>());
    let seed_dependence = h_out.sub(&Bits::exact(Q::new(total.rank_sum.into(), seeds.into())));
    let leakage = weak
        .eavesdroppers
        .iter()
        .enumerate()
        .map(|(a, view)| {
            // I(M_bar; Y, O | V) = E_v[rank A_v] - sum_c w_c (E_v H([A_v; S] x | c) - H(S x | c))
            let exact = total.h[a].iter().zip(&side_h[a]).all(|(t, s)| t.2 && s.1.is_some());
            let mut approx = total.rank_sum as f64 / seeds as f64;
            let mut ex = Q::new(total.rank_sum.into(), seeds.into());
            for (k, (_, w)) in seqs[a].iter().enumerate() {
                let (hs, hse) = side_h[a][k];
                approx -= to_f64(w) * (total.h[a][k].1 / seeds as f64 - hs);
                if exact {
                    ex -= w * (Q::new(total.h[a][k].0.into(), seeds.into()) - Q::from_integer(hse.expect("exact").into()));
                }
            }
            let given_seed = if exact { Bits::exact(ex) } else { Bits::approx(approx.max(0.0)) };
            let bits = seed_dependence.add(&given_seed);
            LeakageReport { alpha: view.alpha.clone(), exact_zero: bits.is_exactly_zero(), bits, seed_dependence: seed_dependence.clone(), given_seed }
        })
        .collect();

    let uniformity = (0..ns).map(|s| uniformity(code, s)).collect();
    let errors = block_errors(code, &uniformity_errors(code))?;
    let typicality = typicality(code);
    let inflation = inflation(code);
    let lnq = Q::from_integer((code.params.l * weak.blocklength).into());
    let extra = match (&inflation.side, &inflation.seed) {
        (Some(a), Some(b)) => Some(a + b),
        _ => None,
    };
    let effective_rate = code
        .plans
        .iter()
        .map(|p| extra.as_ref().map(|x| fmt_q(&(Q::from_integer(p.n3.into()) / (&lnq + x)))))
        .collect();
    Ok(AmpReport {
        l: code.params.l,
        blocklength: weak.blocklength,
        eps: code.eps.clone(),
        eps2: code.params.eps2.clone(),
        delta1: code.params.delta1.clone(),
        delta2: code.params.delta2.clone(),
        lambda: code.lambda,
        min_entropy_event_bound: Q::one() - Q::one() / pow2(code.lambda),
        eve_sees_side: code.params.eve_sees_side,
        seeds,
        plans: code.plans.clone(),
        leakage,
        uniformity,
        errors,
        typicality,
        inflation,
        effective_rate,
    })
}

fn uniformity(code: &AmplifiedCode, s: usize) -> UniformityReport {
    let ex = &code.extractors[s];
    let n3 = ex.n3 as usize;
    let mut hist = vec![0u64; n3 + 1];
    for v in 0..ex.num_seeds() {
        hist[rank(&ex.rows(v))] += 1;
    }
    let seeds = Q::from_integer(ex.num_seeds().into());
    let (mut dtv, mut div, mut coup) = (Q::zero(), Q::zero(), Q::zero());
    let mut every = true;
    let uniform = vec![Q::new(1.into(), (1u64 << n3).into()); 1 << n3];
    for (r, &count) in hist.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let w = Q::from_integer(count.into()) / &seeds;
        // x is uniform on all inputs, so M_bar is uniform on a 2^r-point image
        let d = Q::one() - Q::one() / pow2((n3 - r) as u32);
        let k = Q::from_integer(((n3 - r) as i64).into());
        every &= pinsker_holds(&d, &k);
        let mut p = vec![Q::zero(); 1 << n3];
        p.iter_mut().take(1 << r).for_each(|x| *x = Q::new(1.into(), (1u64 << r).into()));
        coup += &w * mismatch_probability(&maximal_coupling(&p, &uniform));
        dtv += &w * d;
        div += &w * k;
    }
    UniformityReport {
        source: code.weak.sources[s].node.clone(),
        pinsker_every_seed: every,
        pinsker_average: pinsker_holds(&dtv, &div),
        dtv,
        divergence: div,
        coupling_error: coup,
    }
}

fn uniformity_errors(code: &AmplifiedCode) -> Vec<Q> {
    (0..code.weak.sources.len()).map(|s| uniformity(code, s).coupling_error).collect()
}

/// Exhaustive maximum-likelihood syndrome decoding is visited below this many pairs.
const SYNDROME_CAP: u64 = 1 << 22;

fn block_errors(code: &AmplifiedCode, coupling: &[Q]) -> Result<Vec<ErrorReport>, AmpError> {
    let weak = &code.weak;
    let l = code.params.l;
    let mut out = Vec::new();
    for view in &weak.legit {
        let s = weak.source_index(&view.source).expect("registered");
        let side = code.plans[s].side_bits;
        let block = if side == 0 {
            Some(Q::one() - num_traits::pow(Q::one() - weak.error_probability(view), l as usize))
        } else {
            let n1 = code.extractors[s].n1;
            if 2 * n1 > 63 || (1u64 << (2 * n1)) > SYNDROME_CAP {
                None
            } else {
                Some(syndrome_error(weak.marginal_channel(view), weak.bits(s), l, &code.side[s]))
            }
        };
        let end = block.as_ref().map(|e| e + &coupling[s]);
        out.push(ErrorReport { source: view.source.clone(), sink: view.sink.clone(), side_bits: side, block_error: block, end_to_end_bound: end });
    }
    Ok(out)
}

/// Error of the decoder that picks the most likely `x` with syndrome `o`
/// given `m_hat^L` (smallest `x` on ties).
fn syndrome_error(w: Vec<Vec<Q>>, bits: u32, l: u32, rows: &[u64]) -> Q {
    let n1 = bits * l;
    let size = 1u64 << n1;
    let mask = low_mask(bits as usize);
    let nsyn = 1usize << rows.len();
    let correct: Q = (0..size)
        .into_par_iter()
        .map(|mh| {
            let mut best: Vec<Option<Q>> = vec![None; nsyn];
            for x in 0..size {
                let mut lik = Q::one();
                for u in 0..l {
                    let a = ((x >> (u * bits)) & mask) as usize;
                    let b = ((mh >> (u * bits)) & mask) as usize;
                    lik *= &w[a][b];
                    if lik.is_zero() {
                        break;
                    }
                }
                let o = apply(rows, x) as usize;
                if best[o].as_ref().is_none_or(|b| lik > *b) {
                    best[o] = Some(lik);
                }
            }
            best.into_iter().flatten().sum::<Q>()
        })
        .collect::<Vec<Q>>()
        .into_iter()
        .sum();
    Q::one() - correct / Q::from_integer(size.into())
}

fn typicality(code: &AmplifiedCode) -> TypicalityReport {
    let weak = &code.weak;
    let l = code.params.l as usize;
    let eps2 = &code.params.eps2;
    let e2 = to_f64(eps2);
    let mut per_alpha = Vec::new();
    let mut failure = Q::zero();
    let mut hoeffding = 0.0;
    let mut p_star: Option<Q> = None;
    for v in &weak.eavesdroppers {
        let flat: Vec<Q> = weak.eve_joint(v).into_iter().flatten().collect();
        let p = typical_probability(&flat, l, eps2);
        failure += Q::one() - &p;
        per_alpha.push((v.alpha.clone(), fmt_q(&p)));
        for x in flat.iter().filter(|x| !x.is_zero()) {
            hoeffding += (-2.0 * l as f64 * e2 * e2 * to_f64(x) + 1.0).exp2();
            if p_star.as_ref().is_none_or(|m| x < m) {
                p_star = Some(x.clone());
            }
        }
    }
    let failure = failure.min(Q::one());
    let p_star = p_star.unwrap_or_else(Q::zero);
    TypicalityReport {
        per_alpha,
        within_hoeffding: to_f64(&failure) <= hoeffding + crate::FLOAT_TOL,
        failure_union: failure,
        hoeffding,
        gamma: 2.0 * e2 * e2 * to_f64(&p_star),
        p_star,
    }
}

fn inflation(code: &AmplifiedCode) -> InflationReport {
    let weak = &code.weak;
    let lq = Q::from_integer(code.params.l.into());
    let nq = Q::from_integer(weak.blocklength.into());
    let eps = &code.eps;
    let mut transport = Vec::new();
    let (mut side, mut seed, mut form) = (Some(Q::zero()), Some(Q::zero()), Some(Q::zero()));
    for (s, p) in code.plans.iter().enumerate() {
        let d = weak.legit.iter().filter(|v| v.source == weak.sources[s].node).count();
        let den = (&p.rate - eps) * (Q::one() - Q::from_integer(d.into()) * eps) - nq.recip();
        transport.push(fmt_q(&den));
        if !den.is_positive() {
            side = None;
            seed = None;
            form = None;
            continue;
        }
        let add = |acc: &mut Option<Q>, x: Q| {
            if let Some(a) = acc.as_mut() {
                *a += x / &den;
            }
        };
        add(&mut side, Q::from_integer(p.side_bits.into()));
        add(&mut seed, Q::from_integer(p.n2.into()));
        add(&mut form, &code.params.delta1 * &lq * &nq * &p.rate + &lq * (&nq * &p.rate * eps + Q::one()));
    }
    let budget = &lq * &nq * &code.params.delta2;
    InflationReport {
        transport,
        side_within_budget: side.as_ref().is_some_and(|x| *x <= budget),
        total_within_budget: match (&side, &seed) {
            (Some(a), Some(b)) => a + b <= budget,
            _ => false,
        },
        side,
        seed,
        budget_form: form,
        budget,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplifier::parse_weak;
    use crate::rational::frac;
    use std::collections::HashMap;

    fn entropy(m: &HashMap<Vec<u64>, f64>) -> f64 {
        let mut p: Vec<f64> = m.values().copied().filter(|&x| x > 0.0).collect();
        p.sort_by(f64::total_cmp);
        p.iter().map(|x| -x * x.log2()).sum()
    }

    /// `I(M_bar; Y^L, O, V)` straight from the joint pmf of one source.
    fn brute_leakage(code: &AmplifiedCode) -> f64 {
        let weak = &code.weak;
        let ex = &code.extractors[0];
        let eve = &weak.eavesdroppers[0].table;
        let (l, bits, ny) = (code.params.l as usize, weak.bits(0) as usize, eve[0].len());
        let p0 = 1.0 / (ex.num_seeds() as f64 * (1u64 << ex.n1) as f64);
        let (mut m, mut rest, mut all) = (HashMap::new(), HashMap::new(), HashMap::new());
        for v in 0..ex.num_seeds() {
            for x in 0..1u64 << ex.n1 {
                let mbar = ex.extract(x, v);
                let o = apply(&code.side[0], x);
                for y in 0..ny.pow(l as u32) {
                    let mut p = p0;
                    let mut yy = y;
                    for u in 0..l {
                        p *= to_f64(&eve[((x >> (u * bits)) & low_mask(bits)) as usize][yy % ny]);
                        yy /= ny;
                    }
                    *m.entry(vec![mbar]).or_insert(0.0) += p;
                    *rest.entry(vec![y as u64, o, v]).or_insert(0.0) += p;
                    *all.entry(vec![mbar, y as u64, o, v]).or_insert(0.0) += p;
                }
            }
        }
        entropy(&m) + entropy(&rest) - entropy(&all)
    }

    fn toy(name: &str) -> WeakCode {
        let text = match name {
            "bsc" => include_str!("../../fixtures/weak_bsc.json"),
            "noisy" => include_str!("../../fixtures/weak_noisy.json"),
            _ => include_str!("../../fixtures/weak_otp.json"),
        };
        parse_weak(text).unwrap()
    }

    #[test]
    fn leakage_matches_brute_force() {
        for (name, l, side_seed) in [("bsc", 2, 0), ("bsc", 3, 0), ("noisy", 4, 0), ("noisy", 4, 7)] {
            let code = amplify(&toy(name), &AmpParams { l, side_seed, ..AmpParams::default() }).unwrap();
            let r = evaluate_amplified(&code, DEFAULT_SEED_CAP).unwrap();
            let brute = brute_leakage(&code);
            assert!((r.leakage[0].bits.approx - brute).abs() < 1e-9, "{name} L={l}: {} vs {brute}", r.leakage[0].bits.approx);
        }
    }

    #[test]
    fn noisy_code_sends_syndromes_and_decodes() {
        let code = amplify(&toy("noisy"), &AmpParams { l: 4, ..AmpParams::default() }).unwrap();
        assert_eq!(code.plans[0].side_bits, 2);
        let r = evaluate_amplified(&code, DEFAULT_SEED_CAP).unwrap();
        let e = r.errors[0].block_error.clone().unwrap();
        // without syndromes the block error would be 1 - (15/16)^4
        assert!(e < Q::one() - num_traits::pow(frac(15, 16), 4));
    }

    #[test]
    fn one_time_pad_weak_code_stays_perfectly_secret() {
        let code = amplify(&toy("otp"), &AmpParams { l: 1, ..AmpParams::default() }).unwrap();
        let r = evaluate_amplified(&code, DEFAULT_SEED_CAP).unwrap();
        for x in &r.leakage {
            assert!(x.given_seed.is_exactly_zero());
            assert!((x.bits.approx - x.seed_dependence.approx).abs() < 1e-12);
        }
    }

    #[test]
    fn sizing_failure_echoes_formula() {
        let err = amplify(&toy("noisy"), &AmpParams { l: 2, ..AmpParams::default() }).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("n3 = floor(") && text.contains("< 1"), "{text}");
    }

    #[test]
    fn log_lambda_grows_with_repetitions() {
        assert_eq!(LambdaPolicy::Log.value(1, 1), 1);
        assert_eq!(LambdaPolicy::Log.value(1, 8), 4);
        assert_eq!(LambdaPolicy::Log.value(3, 5), 6);
    }
}
