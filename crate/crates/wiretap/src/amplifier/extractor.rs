//! Seeded Toeplitz hashing `{0,1}^n1 x {0,1}^n2 -> {0,1}^n3` with `n2 = n1 + n3 - 1`.
//! Row `i` of the matrix for seed `v` is `T[i][j] = v[i - j + n1 - 1]`; the
//! family is 2-universal, so the leftover hash lemma applies.

use super::gf2::parity;
use super::AmpError;
use crate::rational::{fmt_q, log2_exact, to_f64, Q};
use num_traits::{Signed, ToPrimitive};
use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

/// Bit vectors are single machine words.
pub const MAX_BITS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Extractor {
    pub n1: u32,
    pub n2: u32,
    pub n3: u32,
}

/// `floor(delta' n1 - 2 log2(1/eps')) - c`.
pub fn extractor_length(n1: u32, delta_p: &Q, eps_p: &Q, c: u32) -> Result<i64, AmpError> {
    if !eps_p.is_positive() || *eps_p >= Q::from_integer(1.into()) || !delta_p.is_positive() {
        return Err(AmpError::Parameter(format!("need 0 < delta' and 0 < eps' < 1, got delta' = {}, eps' = {}", fmt_q(delta_p), fmt_q(eps_p))));
    }
    let base = delta_p * Q::from_integer(n1.into());
    let inv = eps_p.recip();
    let v = match log2_exact(&inv) {
        Some(k) => (base - Q::from_integer((2 * k).into())).floor().to_integer().to_i64().unwrap_or(i64::MIN),
        None => (to_f64(&base) - 2.0 * to_f64(&inv).log2()).floor() as i64,
    };
    Ok(v - c as i64)
}

pub fn make_extractor(n1: u32, delta_p: &Q, eps_p: &Q, c: u32) -> Result<Extractor, AmpError> {
    let n3 = extractor_length(n1, delta_p, eps_p, c)?;
    if n3 < 1 {
        return Err(AmpError::Sizing(format!(
            "n3 = floor(delta' n1 - 2 log2(1/eps')) - c = floor({} * {} - 2 log2(1/{})) - {} = {} < 1",
            fmt_q(delta_p),
            n1,
            fmt_q(eps_p),
            c,
            n3
        )));
    }
    Extractor::new(n1, n3 as u32)
}

impl Extractor {
    pub fn new(n1: u32, n3: u32) -> Result<Extractor, AmpError> {
        if n1 == 0 || n3 == 0 {
            return Err(AmpError::Sizing(format!("extractor needs n1 >= 1 and n3 >= 1, got n1 = {n1}, n3 = {n3}")));
        }
        let n2 = n1 + n3 - 1;
        if n2 > MAX_BITS {
            return Err(AmpError::Parameter(format!("seed length n2 = {n2} exceeds {MAX_BITS} bits")));
        }
        Ok(Extractor { n1, n2, n3 })
    }

    /// Matrix rows for seed `v`, each a mask over the `n1` input bits.
    pub fn rows(&self, v: u64) -> Vec<u64> {
        let n1 = self.n1 as usize;
        (0..self.n3 as usize)
            .map(|i| {
                // T[i][j] = v[i + n1 - 1 - j]: bit j of the row is bit (i + n1 - 1 - j) of v
                let window = (v >> i) & low_mask(n1);
                window.reverse_bits() >> (64 - n1)
            })
            .collect()
    }

    pub fn extract(&self, t: u64, v: u64) -> u64 {
        apply(&self.rows(v), t)
    }

    pub fn num_seeds(&self) -> u64 {
        1u64.checked_shl(self.n2).unwrap_or(0)
    }
}

pub fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Matrix-vector product; output bit `i` is row `i` dotted with `t`.
pub fn apply(rows: &[u64], t: u64) -> u64 {
    rows.iter().enumerate().fold(0, |acc, (i, &r)| acc | ((parity(r & t) as u64) << i))
}

/// A uniformly random support of size `2^k` in `{0,1}^n1` (a flat source of
/// min-entropy `k`), sorted.
pub fn random_flat_source<R: Rng>(n1: u32, k: u32, rng: &mut R) -> Vec<u64> {
    let mut s: Vec<u64> = sample(rng, 1usize << n1, 1usize << k).into_iter().map(|x| x as u64).collect();
    s.sort_unstable();
    s
}

/// `d_TV([V, E(T, V)], uniform)` for flat sources, exactly, together with
/// `H(E(T, V) | V)` in bits; every seed is visited.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractionCheck {
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub distance: Q,
    #[serde(serialize_with = "crate::rational::serialize_approx")]
    pub conditional_entropy: f64,
}

pub fn strong_extraction_check(ex: &Extractor, sources: &[Vec<u64>]) -> Result<Vec<ExtractionCheck>, AmpError> {
    if ex.n1 > 24 {
        return Err(AmpError::Parameter(format!("exhaustive extraction check limited to n1 <= 24, got {}", ex.n1)));
    }
    let n_in = 1usize << ex.n1;
    let n_out = 1usize << ex.n3;
    let seeds = ex.num_seeds();
    // per source: sum over seeds of sum_z |count_z * 2^n3 - |S||, and sum of entropies
    let mut dev = vec![0u128; sources.len()];
    let mut ent = vec![0f64; sources.len()];
    let mut out = vec![0u32; n_in];
    let mut hist = vec![0u64; n_out];
    for v in 0..seeds {
        let rows = ex.rows(v);
        // columns of T, then outputs for every input in Gray-code order
        let cols: Vec<u32> = (0..ex.n1).map(|j| apply(&rows, 1 << j) as u32).collect();
        let (mut x, mut y) = (0usize, 0u32);
        out[0] = 0;
        for k in 1..n_in {
            let j = k.trailing_zeros();
            x ^= 1 << j;
            y ^= cols[j as usize];
            out[x] = y;
        }
        for (i, s) in sources.iter().enumerate() {
            hist.iter_mut().for_each(|h| *h = 0);
            for &t in s {
                hist[out[t as usize] as usize] += 1;
            }
            let size = s.len() as u64;
            dev[i] += hist.iter().map(|&c| (c * n_out as u64).abs_diff(size) as u128).sum::<u128>();
            ent[i] += hist.iter().filter(|&&c| c > 0).map(|&c| {
                let p = c as f64 / size as f64;
                -p * p.log2()
            }).sum::<f64>();
        }
    }
    Ok(sources
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let denom = 2u128 * s.len() as u128 * n_out as u128 * seeds as u128;
            ExtractionCheck {
                distance: Q::new(dev[i].into(), denom.into()),
                conditional_entropy: ent[i] / seeds as f64,
            }
        })
        .collect())
}

/// Entropy floor implied by a distance bound: `n3 - 2 eps' n3 - h_b(eps')`.
pub fn entropy_floor(n3: u32, eps_p: f64) -> f64 {
    let hb = if eps_p <= 0.0 || eps_p >= 1.0 { 0.0 } else { -eps_p * eps_p.log2() - (1.0 - eps_p) * (1.0 - eps_p).log2() };
    n3 as f64 - 2.0 * eps_p * n3 as f64 - hb
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    #[test]
    fn length_formula() {
        let ex = make_extractor(32, &frac(3, 4), &frac(1, 16), 0).unwrap();
        assert_eq!((ex.n3, ex.n2), (16, 47));
        let ex = make_extractor(12, &frac(3, 4), &frac(1, 8), 0).unwrap();
        assert_eq!((ex.n3, ex.n2), (3, 14));
        assert!(matches!(make_extractor(4, &frac(1, 2), &frac(1, 8), 0), Err(AmpError::Sizing(_))));
    }

    #[test]
    fn toeplitz_layout() {
        let ex = Extractor::new(3, 2).unwrap();
        // v = v0..v3; T = [[v2 v1 v0], [v3 v2 v1]]
        let v = 0b1010; // v1 = 1, v3 = 1
        let rows = ex.rows(v);
        assert_eq!(rows, vec![0b010, 0b101]);
    }

    #[test]
    fn zero_input_maps_to_zero() {
        let ex = Extractor::new(8, 3).unwrap();
        assert!((0..ex.num_seeds()).all(|v| ex.extract(0, v) == 0));
    }
}
