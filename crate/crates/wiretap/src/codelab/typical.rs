//! Strongly typical sequences: `x^n` is ε-typical for `p` when
//! `|π(x|x^n) - p(x)| <= ε p(x)` for every symbol `x`, so zero-probability
//! symbols never occur in a typical sequence.

use crate::rational::{ceil_q, floor_q, Q};
use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TypicalError {
    #[error("typical set has {size} sequences, over the enumeration cap {cap}; use membership tests or sampling")]
    Cap { size: BigInt, cap: u64 },
    #[error("typical set is empty for n = {n}; increase n_t or eps")]
    Empty { n: usize },
}

/// Sequences above this many are never materialized.
pub const DEFAULT_ENUM_CAP: u64 = 1 << 22;

pub fn empirical_distribution(x: &[u32], alphabet: usize) -> Vec<Q> {
    let mut c = vec![0usize; alphabet];
    for &s in x {
        c[s as usize] += 1;
    }
    c.into_iter().map(|k| Q::new(k.into(), x.len().into())).collect()
}

/// Count interval `[lo, hi]` each symbol must fall in; empty when `lo > hi`.
pub fn allowed_counts(p: &[Q], n: usize, eps: &Q) -> Vec<(usize, usize)> {
    let nq = Q::from_integer(n.into());
    p.iter()
        .map(|pj| {
            let lo = ceil_q(&(&nq * pj * (Q::one() - eps))).max(BigInt::zero());
            let hi = floor_q(&(&nq * pj * (Q::one() + eps))).min(BigInt::from(n));
            (lo.to_usize().unwrap_or(usize::MAX), hi.to_usize().unwrap_or(0))
        })
        .collect()
}

pub fn is_typical(x: &[u32], p: &[Q], eps: &Q) -> bool {
    let mut c = vec![0usize; p.len()];
    for &s in x {
        match c.get_mut(s as usize) {
            Some(v) => *v += 1,
            None => return false,
        }
    }
    allowed_counts(p, x.len(), eps).iter().zip(&c).all(|(&(lo, hi), &k)| lo <= k && k <= hi)
}

/// Sum over admissible types of `n! / Π c_j!` times `Π w_j^{c_j}`.
fn type_sum(p: &[Q], n: usize, eps: &Q, weight: impl Fn(usize) -> Option<Q>) -> Q {
    let ranges = allowed_counts(p, n, eps);
    // f[s]: weighted number of ways to fill s positions with the symbols seen so far.
    let mut f = vec![Q::zero(); n + 1];
    f[0] = Q::one();
    for (j, &(lo, hi)) in ranges.iter().enumerate() {
        let w = weight(j);
        let mut g = vec![Q::zero(); n + 1];
        for s in 0..=n {
            if f[s].is_zero() {
                continue;
            }
            for c in lo..=hi.min(n - s) {
                let mut term = &f[s] * Q::from_integer(binomial(BigInt::from(s + c), BigInt::from(c)));
                if let Some(wj) = &w {
                    term *= num_traits::pow::pow(wj.clone(), c);
                }
                g[s + c] += term;
            }
        }
        f = g;
    }
    f.swap_remove(n)
}

/// `|T_ε^{(n)}|`, counted exactly by summing type-class sizes.
pub fn typical_set_size(p: &[Q], n: usize, eps: &Q) -> BigInt {
    type_sum(p, n, eps, |_| None).to_integer()
}

/// `P(X^n ∈ T_ε^{(n)})` for i.i.d. `X ~ p`, exactly.
pub fn typical_probability(p: &[Q], n: usize, eps: &Q) -> Q {
    type_sum(p, n, eps, |j| Some(p[j].clone()))
}

/// The typical set in lexicographic order.
pub fn typical_set(p: &[Q], n: usize, eps: &Q, cap: u64) -> Result<Vec<Vec<u32>>, TypicalError> {
    let size = typical_set_size(p, n, eps);
    if size > BigInt::from(cap) {
        return Err(TypicalError::Cap { size, cap });
    }
    let ranges = allowed_counts(p, n, eps);
    let mut out = Vec::with_capacity(size.to_usize().unwrap_or(0));
    let mut cur = Vec::with_capacity(n);
    let mut counts = vec![0usize; p.len()];
    dfs(&ranges, n, &mut cur, &mut counts, &mut out);
    Ok(out)
}

fn dfs(ranges: &[(usize, usize)], n: usize, cur: &mut Vec<u32>, counts: &mut [usize], out: &mut Vec<Vec<u32>>) {
    let left = n - cur.len();
    let need: usize = ranges.iter().zip(counts.iter()).map(|(&(lo, _), &c)| lo.saturating_sub(c)).sum();
    let room: usize = ranges.iter().zip(counts.iter()).map(|(&(lo, hi), &c)| if lo > hi { 0 } else { hi.saturating_sub(c) }).sum();
    if need > left || room < left || ranges.iter().any(|&(lo, hi)| lo > hi) {
        return;
    }
    if left == 0 {
        out.push(cur.clone());
        return;
    }
    for j in 0..ranges.len() {
        if counts[j] < ranges[j].1 {
            counts[j] += 1;
            cur.push(j as u32);
            dfs(ranges, n, cur, counts, out);
            cur.pop();
            counts[j] -= 1;
        }
    }
}

/// Uniform draw from the typical set without enumerating it: pick a type with
/// probability proportional to its class size, then a uniform arrangement.
pub fn sample_typical<R: Rng>(p: &[Q], n: usize, eps: &Q, rng: &mut R) -> Option<Vec<u32>> {
    let ranges = allowed_counts(p, n, eps);
    let mut types: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut cur = Vec::new();
    collect_types(&ranges, n, &mut cur, &mut types);
    let total: f64 = types.iter().map(|t| t.1).sum();
    if types.is_empty() || total <= 0.0 {
        return None;
    }
    let mut u = rng.gen::<f64>() * total;
    let mut chosen = &types[types.len() - 1].0;
    for (t, w) in &types {
        if u < *w {
            chosen = t;
            break;
        }
        u -= w;
    }
    let mut seq: Vec<u32> = chosen.iter().enumerate().flat_map(|(j, &c)| std::iter::repeat(j as u32).take(c)).collect();
    for i in (1..seq.len()).rev() {
        let j = rng.gen_range(0..=i);
        seq.swap(i, j);
    }
    Some(seq)
}

fn collect_types(ranges: &[(usize, usize)], left: usize, cur: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, f64)>) {
    let j = cur.len();
    if j == ranges.len() {
        if left == 0 {
            let n: usize = cur.iter().sum();
            // log multinomial via lgamma-free summation
            let mut lw = (1..=n).map(|i| (i as f64).ln()).sum::<f64>();
            for &c in cur.iter() {
                lw -= (1..=c).map(|i| (i as f64).ln()).sum::<f64>();
            }
            out.push((cur.clone(), lw.exp()));
        }
        return;
    }
    let (lo, hi) = ranges[j];
    if lo > hi {
        return;
    }
    for c in lo..=hi.min(left) {
        cur.push(c);
        collect_types(ranges, left - c, cur, out);
        cur.pop();
    }
}

/// Size bracket `(1-ε) 2^{n(1-ε)H} < |T| < 2^{n(1+ε)H}` in log2 form:
/// returns `(lower, log2|T|, upper)`; `log2|T|` is `-inf` for an empty set.
pub fn size_bracket(p: &[Q], n: usize, eps: &Q) -> (f64, f64, f64) {
    let h = crate::rational::entropy_of_pmf(p).approx;
    let e = crate::rational::to_f64(eps);
    let size = typical_set_size(p, n, eps);
    let log_size = if size.is_zero() { f64::NEG_INFINITY } else { big_log2(&size) };
    ((1.0 - e).log2() + n as f64 * (1.0 - e) * h, log_size, n as f64 * (1.0 + e) * h)
}

pub fn bracket_holds(p: &[Q], n: usize, eps: &Q) -> bool {
    let (lo, s, hi) = size_bracket(p, n, eps);
    lo < s && s < hi
}

/// Smallest `n0 <= max_n` such that the size bracket holds for every `n` in `n0..=max_n`.
pub fn bracket_onset(p: &[Q], eps: &Q, max_n: usize) -> Option<usize> {
    let mut onset = None;
    for n in (1..=max_n).rev() {
        if bracket_holds(p, n, eps) {
            onset = Some(n);
        } else {
            break;
        }
    }
    onset
}

pub fn big_log2(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 52 {
        return x.to_f64().unwrap_or(0.0).log2();
    }
    let shift = bits - 52;
    (x >> shift).to_f64().unwrap_or(0.0).log2() + shift as f64
}

/// Lemma-style pushforward check: every typical `x^n` maps symbolwise under `g`
/// to a sequence typical for the image pmf. Returns the first counterexample.
pub fn pushforward_typicality_check(
    p: &[Q],
    g: &[u32],
    out_alphabet: usize,
    n: usize,
    eps: &Q,
    cap: u64,
) -> Result<Option<Vec<u32>>, TypicalError> {
    let mut py = vec![Q::zero(); out_alphabet];
    for (x, px) in p.iter().enumerate() {
        py[g[x] as usize] += px;
    }
    for x in typical_set(p, n, eps, cap)? {
        let y: Vec<u32> = x.iter().map(|&s| g[s as usize]).collect();
        if !is_typical(&y, &py, eps) {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn bern(num: i64, den: i64) -> Vec<Q> {
        vec![frac(den - num, den), frac(num, den)]
    }

    #[test]
    fn fair_coin_n4_has_six() {
        let t = typical_set(&bern(1, 2), 4, &frac(1, 10), DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(t.len(), 6);
        assert_eq!(t[0], vec![0, 0, 1, 1]);
        assert!(t.iter().all(|x| x.iter().sum::<u32>() == 2));
    }

    #[test]
    fn quarter_coin_n8_has_28() {
        let p = bern(1, 4);
        assert_eq!(typical_set_size(&p, 8, &frac(1, 10)), BigInt::from(28));
        let brute = (0u32..256)
            .filter(|v| is_typical(&(0..8).map(|i| v >> (7 - i) & 1).collect::<Vec<_>>(), &p, &frac(1, 10)))
            .count();
        assert_eq!(brute, 28);
    }

    #[test]
    fn zero_probability_symbols_never_appear() {
        let p = vec![frac(1, 2), frac(1, 2), Q::zero()];
        assert!(!is_typical(&[0, 1, 2, 0], &p, &frac(9, 10)));
        assert!(typical_set(&p, 4, &frac(9, 10), 1000).unwrap().iter().all(|x| !x.contains(&2)));
    }

    #[test]
    fn typical_probability_matches_size_for_uniform() {
        let p = bern(1, 2);
        let n = 6;
        let e = frac(1, 3);
        let prob = typical_probability(&p, n, &e);
        assert_eq!(prob, Q::from_integer(typical_set_size(&p, n, &e)) / Q::from_integer(BigInt::from(64)));
    }

    #[test]
    fn degenerate_pmf_constant_sequence() {
        let p = vec![Q::one(), Q::zero()];
        assert!(is_typical(&[0, 0, 0], &p, &frac(1, 100)));
        let q = bern(1, 2);
        assert!(!is_typical(&[0, 0, 0], &q, &frac(1, 100)));
    }
}
