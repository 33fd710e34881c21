use crate::rational::Q;
use num_traits::{Signed, Zero};

pub fn total_variation(p: &[Q], q: &[Q]) -> Q {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<Q>() / Q::from_integer(2.into())
}

/// Joint pmf `j[x][y]` with marginals `p` and `q` and `P(X != Y) = d_TV(p, q)`:
/// the overlap sits on the diagonal and the residuals are coupled independently.
pub fn maximal_coupling(p: &[Q], q: &[Q]) -> Vec<Vec<Q>> {
    assert_eq!(p.len(), q.len(), "coupling needs a common alphabet");
    let k = p.len();
    let common: Vec<Q> = p.iter().zip(q).map(|(a, b)| a.min(b).clone()).collect();
    let rp: Vec<Q> = p.iter().zip(&common).map(|(a, c)| a - c).collect();
    let rq: Vec<Q> = q.iter().zip(&common).map(|(b, c)| b - c).collect();
    let mass: Q = rp.iter().sum();
    let mut j = vec![vec![Q::zero(); k]; k];
    for x in 0..k {
        j[x][x] = common[x].clone();
        if mass.is_zero() || rp[x].is_zero() {
            continue;
        }
        for y in 0..k {
            j[x][y] += &rp[x] * &rq[y] / &mass;
        }
    }
    j
}

pub fn mismatch_probability(j: &[Vec<Q>]) -> Q {
    j.iter().enumerate().flat_map(|(x, r)| r.iter().enumerate().filter(move |(y, _)| *y != x).map(|(_, p)| p.clone())).sum()
}

/// A rational strictly below ln 2.
pub fn ln2_lower() -> Q {
    Q::new(6_931_471_805_599_452i64.into(), 10_000_000_000_000_000i64.into())
}

/// `d_TV^2 <= D ln2 / 2` with `D` in bits, decided exactly via a lower bound on ln 2.
pub fn pinsker_holds(dtv: &Q, divergence_bits: &Q) -> bool {
    dtv * dtv * Q::from_integer(2.into()) <= divergence_bits * ln2_lower()
}
