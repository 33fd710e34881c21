use super::{bits, check_n, ConstraintSystem, EntropyError, GroundSet};
use crate::lp::Relation;
use crate::network::Network;
use crate::rational::{entropy_of_pmf, from_f64, pow2, to_f64, Q};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

/// Coordinates `h[mask]` for every subset, `h[0] = 0`. `exact` is false when
/// some coordinate is a double-precision value stored as a rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntropyVector {
    pub n: usize,
    pub coords: Vec<Q>,
    pub exact: bool,
}

impl EntropyVector {
    pub fn zero(n: usize) -> Self {
        EntropyVector { n, coords: vec![Q::zero(); 1 << n], exact: true }
    }

    pub fn from_coords(n: usize, coords: Vec<Q>) -> Self {
        assert_eq!(coords.len(), 1 << n, "need 2^n coordinates including h[0]");
        EntropyVector { n, coords, exact: true }
    }

    pub fn get(&self, mask: u32) -> &Q {
        &self.coords[mask as usize]
    }

    pub fn get_f64(&self, mask: u32) -> f64 {
        to_f64(&self.coords[mask as usize])
    }
}

/// A finite joint distribution of `n` discrete variables, listed by support point.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    pub n: usize,
    pub points: Vec<(Vec<u64>, Q)>,
    /// Input probabilities were doubles; entropies are then computed in floating point.
    pub float_input: bool,
}

impl Pmf {
    pub fn exact(n: usize, points: Vec<(Vec<u64>, Q)>) -> Self {
        Pmf { n, points, float_input: false }
    }

    pub fn from_f64(n: usize, points: Vec<(Vec<u64>, f64)>) -> Self {
        Pmf { n, points: points.into_iter().map(|(v, p)| (v, from_f64(p))).collect(), float_input: true }
    }

    /// Uniform distribution over the given (not necessarily distinct) outcomes.
    pub fn uniform(n: usize, outcomes: Vec<Vec<u64>>) -> Self {
        let p = Q::new(1.into(), outcomes.len().into());
        Pmf::exact(n, outcomes.into_iter().map(|v| (v, p.clone())).collect())
    }

    fn validate(&self) -> Result<(), EntropyError> {
        if let Some((v, _)) = self.points.iter().find(|(v, _)| v.len() != self.n) {
            return Err(EntropyError::PointArity { got: v.len(), expected: self.n });
        }
        let total: Q = self.points.iter().map(|(_, p)| p.clone()).sum();
        let neg = self.points.iter().any(|(_, p)| p.is_negative());
        if neg || (total - Q::one()).abs() > Q::one() / pow2(40) {
            let shown: Q = self.points.iter().map(|(_, p)| p.clone()).sum();
            return Err(EntropyError::NotNormalized(crate::rational::fmt_q(&shown)));
        }
        Ok(())
    }

    fn marginal(&self, mask: u32) -> Vec<Q> {
        let idx: Vec<usize> = bits(mask).collect();
        let mut acc: HashMap<Vec<u64>, Q> = HashMap::new();
        for (v, p) in &self.points {
            let key: Vec<u64> = idx.iter().map(|&i| v[i]).collect();
            *acc.entry(key).or_insert_with(Q::zero) += p;
        }
        let mut v: Vec<Q> = acc.into_values().collect();
        // fixed order keeps floating-point entropies reproducible across runs
        v.sort();
        v
    }
}

/// Entropy vector of a joint pmf. Coordinates are exact when every marginal
/// probability is a power of two (dyadic uniform marginals); otherwise they
/// are double-precision values, to be compared with a tolerance.
pub fn entropy_vector_of_pmf(pmf: &Pmf) -> Result<EntropyVector, EntropyError> {
    check_n(pmf.n)?;
    pmf.validate()?;
    let masks: Vec<u32> = (1..(1u32 << pmf.n)).collect();
    let vals: Vec<(Q, bool)> = masks
        .par_iter()
        .map(|&m| {
            let marg = pmf.marginal(m);
            if pmf.float_input {
                let h: f64 = marg.iter().map(to_f64).filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum();
                (from_f64(h), false)
            } else {
                let b = entropy_of_pmf(&marg);
                match b.exact {
                    Some(x) => (x, true),
                    None => (from_f64(b.approx), false),
                }
            }
        })
        .collect();
    let exact = vals.iter().all(|(_, e)| *e);
    let mut coords = Vec::with_capacity(1 << pmf.n);
    coords.push(Q::zero());
    coords.extend(vals.into_iter().map(|(x, _)| x));
    Ok(EntropyVector { n: pmf.n, coords, exact })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstraintCheck {
    pub index: usize,
    pub provenance: String,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub lhs: Q,
    pub rel: Relation,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub rhs: Q,
    /// `lhs - rhs` for `>=` and `=`, `rhs - lhs` for `<=`; nonnegative means satisfied
    /// (zero for equalities).
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub slack: Q,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MembershipReport {
    pub ok: bool,
    pub exact: bool,
    pub checks: Vec<ConstraintCheck>,
}

impl MembershipReport {
    pub fn violations(&self) -> impl Iterator<Item = &ConstraintCheck> {
        self.checks.iter().filter(|c| !c.satisfied)
    }

    pub fn violated_families(&self) -> Vec<String> {
        let mut f: Vec<String> =
            self.violations().map(|c| c.provenance.split_whitespace().next().unwrap_or("").to_string()).collect();
        f.dedup();
        f
    }
}

/// Evaluates every constraint at `h`. Exact vectors are compared exactly;
/// floating-point vectors with tolerance `tol`.
pub fn check_membership(h: &EntropyVector, sys: &ConstraintSystem, tol: &Q) -> Result<MembershipReport, EntropyError> {
    if h.n != sys.n {
        return Err(EntropyError::DimensionMismatch { vector: h.n, system: sys.n });
    }
    let tol = if h.exact { Q::zero() } else { tol.clone() };
    let checks: Vec<ConstraintCheck> = sys
        .constraints
        .par_iter()
        .enumerate()
        .map(|(index, c)| {
            let lhs = c.lhs(&h.coords);
            let slack = match c.rel {
                Relation::Le => &c.rhs - &lhs,
                _ => &lhs - &c.rhs,
            };
            let satisfied = match c.rel {
                Relation::Eq => slack.abs() <= tol,
                _ => slack >= -tol.clone(),
            };
            ConstraintCheck { index, provenance: c.provenance.clone(), lhs, rel: c.rel, rhs: c.rhs.clone(), slack, satisfied }
        })
        .collect();
    Ok(MembershipReport { ok: checks.iter().all(|c| c.satisfied), exact: h.exact, checks })
}

/// Componentwise `r <= r2`: `r` lies in the down-closure of `{r2}`.
pub fn dominates(r: &[Q], r2: &[Q]) -> bool {
    r.len() == r2.len() && r.iter().zip(r2).all(|(a, b)| a <= b)
}

pub fn scale(h: &EntropyVector, a: &Q) -> EntropyVector {
    EntropyVector { n: h.n, coords: h.coords.iter().map(|x| x * a).collect(), exact: h.exact }
}

/// Message coordinates `(h_{m_s})_s` in source order.
pub fn project_sources(h: &EntropyVector, net: &Network) -> Vec<Q> {
    let g = GroundSet::of(net);
    (0..g.sources).map(|s| h.get(g.m(s)).clone()).collect()
}
