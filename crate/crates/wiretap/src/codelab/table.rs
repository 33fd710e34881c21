use crate::rational::{entropy_of_counts, Bits};
use num_bigint::BigInt;
use rayon::prelude::*;
use std::collections::HashMap;

/// Equiprobable rows over named columns; every quantity is a function of
/// projection counts, so it is exact whenever the counts are dyadic.
#[derive(Debug, Clone, Default)]
pub struct UniformTable {
    pub rows: Vec<Vec<u64>>,
}

impl UniformTable {
    pub fn new(rows: Vec<Vec<u64>>) -> Self {
        UniformTable { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn counts(&self, cols: &[usize]) -> HashMap<Vec<u64>, u64> {
        self.rows
            .par_chunks(4096)
            .map(|chunk| {
                let mut m: HashMap<Vec<u64>, u64> = HashMap::new();
                for r in chunk {
                    *m.entry(cols.iter().map(|&c| r[c]).collect()).or_insert(0) += 1;
                }
                m
            })
            .reduce(HashMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                a
            })
    }

    pub fn entropy(&self, cols: &[usize]) -> Bits {
        if cols.is_empty() {
            return Bits::zero();
        }
        entropy_of_counts(self.sorted_counts(cols).iter())
    }

    /// Projection counts in ascending order, so floating-point sums are reproducible.
    pub fn sorted_counts(&self, cols: &[usize]) -> Vec<BigInt> {
        let mut c: Vec<u64> = self.counts(cols).into_values().collect();
        c.sort_unstable();
        c.into_iter().map(BigInt::from).collect()
    }

    /// Whether the empirical joint of `a` and `b` is the product of its marginals.
    pub fn independent(&self, a: &[usize], b: &[usize]) -> bool {
        let ca = self.counts(a);
        let cb = self.counts(b);
        let ab: Vec<usize> = a.iter().chain(b).copied().collect();
        let cab = self.counts(&ab);
        let total = self.rows.len() as u128;
        if (ca.len() * cb.len()) != cab.len() {
            return false;
        }
        cab.iter().all(|(k, &v)| {
            let (ka, kb) = k.split_at(a.len());
            v as u128 * total == ca[ka] as u128 * cb[kb] as u128
        })
    }

    /// `I(a; b)`, exactly zero whenever the joint factorizes.
    pub fn mutual_information(&self, a: &[usize], b: &[usize]) -> (Bits, bool) {
        if self.independent(a, b) {
            return (Bits::zero(), true);
        }
        let ab: Vec<usize> = a.iter().chain(b).copied().collect();
        let i = self.entropy(a).add(&self.entropy(b)).sub(&self.entropy(&ab));
        (i, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_is_pairwise_independent() {
        let t = UniformTable::new((0..4u64).map(|i| vec![i & 1, i >> 1, (i & 1) ^ (i >> 1)]).collect());
        let (i, f) = t.mutual_information(&[0], &[2]);
        assert!(f && i.is_exactly_zero());
        let (i, f) = t.mutual_information(&[0, 1], &[2]);
        assert!(!f);
        assert_eq!(i.exact, Some(crate::rational::q(1)));
    }
}
