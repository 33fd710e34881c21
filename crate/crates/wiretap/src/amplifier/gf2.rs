//! Bit-vector linear algebra over the two-element field; vectors are `u64` masks.

pub fn parity(x: u64) -> u32 {
    x.count_ones() & 1
}

/// A basis of the span of `rows`, with pairwise distinct leading bits.
pub fn basis(rows: &[u64]) -> Vec<u64> {
    let mut b: Vec<u64> = Vec::new();
    for &r in rows {
        let mut x = r;
        for &v in &b {
            x = x.min(x ^ v);
        }
        if x != 0 {
            b.push(x);
            b.sort_unstable_by(|a, c| c.cmp(a));
        }
    }
    b
}

pub fn rank(rows: &[u64]) -> usize {
    basis(rows).len()
}

/// A basis of `{ B^T u : (B^T u) & free == 0 }`, where `rows` are the rows of `B`.
pub fn restricted_span(rows: &[u64], free: u64) -> Vec<u64> {
    let mut rest: Vec<u64> = rows.to_vec();
    let mut f = free;
    while f != 0 {
        let bit = f & f.wrapping_neg();
        f ^= bit;
        if let Some(p) = rest.iter().position(|&r| r & bit != 0) {
            let piv = rest.swap_remove(p);
            for r in rest.iter_mut() {
                if *r & bit != 0 {
                    *r ^= piv;
                }
            }
        }
    }
    basis(&rest)
}

/// In-place unnormalized Walsh-Hadamard transform; `v.len()` is a power of two.
pub fn fwht(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for i in (0..v.len()).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_restricted_span() {
        assert_eq!(rank(&[0b011, 0b110, 0b101]), 2);
        assert_eq!(rank(&[0, 0]), 0);
        // combinations avoiding bit 0: only 0b110
        let s = restricted_span(&[0b011, 0b101], 0b001);
        assert_eq!(s, vec![0b110]);
        assert!(restricted_span(&[0b01], 0b01).is_empty());
    }

    #[test]
    fn fwht_is_an_involution_up_to_scale() {
        let mut v = vec![0.5, 0.25, 0.125, 0.125];
        let orig = v.clone();
        fwht(&mut v);
        fwht(&mut v);
        for (a, b) in v.iter().zip(&orig) {
            assert!((a / 4.0 - b).abs() < 1e-15);
        }
    }
}
