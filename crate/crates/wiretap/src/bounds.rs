//! Outer bounds on secure rate regions via exact LP over the Shannon cone,
//! and membership certificates for entropy vectors of explicit codes.
//!
//! Outer bounds are Shannon-relaxed: the entropic region is replaced by the
//! polyhedral cone cut out by the elemental inequalities, which contains it.
//! The resulting feasible set is already a closed convex cone intersected with
//! a polyhedron, so no separate hull step is needed, and support values in
//! nonnegative weight directions are unchanged by down-closure.

use crate::entropy::{
    check_membership, elemental_inequalities, gamma_constraints, project_sources, scale, ConstraintCheck,
    ConstraintSystem, EntropyError, EntropyVector, Family, GroundSet, Relax,
};
use crate::lp::{solve_with, LpProblem, LpStatus, Relation, SolveOptions, VarSign};
use crate::network::Network;
use crate::rational::Q;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    ZeroError,
    Asymptotic,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::ZeroError => "zero_error",
            Mode::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundQuery {
    pub net: Network,
    pub mode: Mode,
    /// Objective `Σ w_s h_{m_s}`, one nonnegative weight per source.
    pub weights: Vec<Q>,
    /// Bounds for the inequality forms of decoding and secrecy; asymptotic mode only.
    /// `None` in asymptotic mode means both bounds are zero.
    pub relax: Option<Relax>,
    /// Extra user constraints appended after the structural families.
    pub extra: ConstraintSystem,
}

impl BoundQuery {
    pub fn new(net: Network, mode: Mode, weights: Vec<Q>) -> Self {
        let n = GroundSet::of(&net).n();
        BoundQuery { net, mode, weights, relax: None, extra: ConstraintSystem::new(n) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoundsError {
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error("network is invalid: {0}")]
    InvalidNetwork(String),
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("weights must be nonnegative")]
    NegativeWeight,
    #[error("relaxation only applies in asymptotic mode")]
    RelaxInZeroError,
    #[error("relaxation bounds must be nonnegative")]
    NegativeRelax,
    #[error("scaling factor must lie in (0, 1]")]
    ScaleOutOfRange,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OuterBound {
    pub status: LpStatus,
    /// Upper bound on the weighted secure sum rate, when optimal.
    pub value: Option<Q>,
    /// Full entropy vector attaining the value, verified against the unreduced system.
    pub witness: Option<EntropyVector>,
    /// `(h_{m_s})_s` of the witness.
    pub rate: Option<Vec<Q>>,
    pub certificate_verified: bool,
    pub witness_verified: bool,
    pub pivots: usize,
    pub stats: PresolveStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PresolveStats {
    pub coordinates: usize,
    pub rows: usize,
    pub reduced_variables: usize,
    pub reduced_rows: usize,
    pub dependencies: usize,
}

/// The complete unreduced constraint system: elemental inequalities, then the
/// structural families, then user extras.
pub fn outer_bound_system(q: &BoundQuery) -> Result<ConstraintSystem, BoundsError> {
    let report = q.net.validate();
    if !report.ok {
        let msgs: Vec<String> = report.violations.iter().map(|v| v.detail.clone()).collect();
        return Err(BoundsError::InvalidNetwork(msgs.join("; ")));
    }
    let relax = match (q.mode, &q.relax) {
        (Mode::ZeroError, Some(_)) => return Err(BoundsError::RelaxInZeroError),
        (Mode::ZeroError, None) => None,
        (Mode::Asymptotic, r) => {
            let r = r.clone().unwrap_or_else(Relax::zero);
            if r.decoding.is_negative() || r.secrecy.is_negative() {
                return Err(BoundsError::NegativeRelax);
            }
            Some(r)
        }
    };
    let g = GroundSet::of(&q.net);
    g.check_size()?;
    let mut sys = elemental_inequalities(g.n())?;
    sys.extend(gamma_constraints(&q.net, &Family::ALL, relax.as_ref())?);
    if q.extra.n == sys.n {
        sys.constraints.extend(q.extra.constraints.iter().cloned());
    }
    Ok(sys)
}

/// Hex SHA-256 of the text form of a constraint system.
pub fn system_hash(sys: &ConstraintSystem) -> String {
    hex::encode(Sha256::digest(sys.to_text().as_bytes()))
}

/// Outer-bound LP for one constraint system, presolved once and reusable across objectives.
///
/// Presolve: a constraint `h_X = h_Y` with `Y ⊂ X` (or `h_X - h_Y <= 0`, or
/// `h_A <= 0`) says `X` is determined by `Y`. On the Shannon cone this forces
/// `h_{A ∪ X} = h_{A ∪ Y}` for every `A`, so each coordinate equals the
/// coordinate of its closure under these dependencies. The LP is solved over
/// closed sets only and the witness is expanded back.
#[derive(Debug)]
pub struct OuterBoundSolver {
    pub net: Network,
    pub system: ConstraintSystem,
    pub hash: String,
    closure_var: Vec<Option<usize>>,
    reduced: LpProblem,
    stats: PresolveStats,
    pub options: SolveOptions,
}

impl OuterBoundSolver {
    pub fn new(q: &BoundQuery) -> Result<Self, BoundsError> {
        let system = outer_bound_system(q)?;
        let hash = system_hash(&system);
        let n = system.n;
        let deps = dependencies(&system);
        let full = 1usize << n;
        let closure: Vec<u32> = (0..full as u32).into_par_iter().map(|a| close(a, &deps)).collect();
        let base = closure[0];
        let mut var_of: HashMap<u32, usize> = HashMap::new();
        let mut closure_var = vec![None; full];
        for (a, &c) in closure.iter().enumerate() {
            if c != base {
                let next = var_of.len();
                closure_var[a] = Some(*var_of.entry(c).or_insert(next));
            }
        }
        let mut reduced = LpProblem::new(var_of.len(), VarSign::NonNegative);
        let mut seen: HashSet<(Vec<(usize, Q)>, Relation, Q)> = HashSet::new();
        for c in &system.constraints {
            let mut acc: BTreeMap<usize, Q> = BTreeMap::new();
            for (m, coef) in &c.coeffs {
                if let Some(v) = closure_var[*m as usize] {
                    *acc.entry(v).or_insert_with(Q::zero) += coef;
                }
            }
            let coeffs: Vec<(usize, Q)> = acc.into_iter().filter(|(_, x)| !x.is_zero()).collect();
            if coeffs.is_empty() && c.rel.holds(&Q::zero(), &c.rhs) {
                continue;
            }
            let key = (coeffs, c.rel, c.rhs.clone());
            if seen.insert(key.clone()) {
                reduced.push(key.0, key.1, key.2);
            }
        }
        let stats = PresolveStats {
            coordinates: full - 1,
            rows: system.len(),
            reduced_variables: reduced.num_vars,
            reduced_rows: reduced.rows.len(),
            dependencies: deps.len(),
        };
        Ok(OuterBoundSolver { net: q.net.clone(), system, hash, closure_var, reduced, stats, options: SolveOptions::default() })
    }

    pub fn stats(&self) -> PresolveStats {
        self.stats
    }

    pub fn solve(&self, weights: &[Q]) -> Result<OuterBound, BoundsError> {
        let g = GroundSet::of(&self.net);
        if weights.len() != g.sources {
            return Err(BoundsError::WeightCount { expected: g.sources, got: weights.len() });
        }
        if weights.iter().any(Signed::is_negative) {
            return Err(BoundsError::NegativeWeight);
        }
        let mut obj: BTreeMap<usize, Q> = BTreeMap::new();
        for (s, w) in weights.iter().enumerate() {
            if let Some(v) = self.closure_var[g.m(s) as usize] {
                *obj.entry(v).or_insert_with(Q::zero) += w;
            }
        }
        let mut p = self.reduced.clone();
        p.objective = obj.into_iter().filter(|(_, x)| !x.is_zero()).collect();
        let res = solve_with(&p, &self.options);
        let mut out = OuterBound {
            status: res.status,
            value: res.value.clone(),
            witness: None,
            rate: None,
            certificate_verified: res.certificate_verified,
            witness_verified: false,
            pivots: res.pivots,
            stats: self.stats,
        };
        if let (LpStatus::Optimal, Some(x)) = (res.status, &res.witness) {
            let coords: Vec<Q> = self.closure_var.iter().map(|v| v.map_or_else(Q::zero, |i| x[i].clone())).collect();
            let h = EntropyVector::from_coords(self.system.n, coords);
            let rate = project_sources(&h, &self.net);
            let weighted: Q = rate.iter().zip(weights).map(|(r, w)| r * w).sum();
            let member = check_membership(&h, &self.system, &Q::zero()).map(|r| r.ok).unwrap_or(false);
            out.witness_verified = member && Some(&weighted) == res.value.as_ref();
            out.rate = Some(rate);
            out.witness = Some(h);
        }
        Ok(out)
    }
}

/// Dependencies `(Y, X)` meaning `X` is a function of `Y`, read off the system.
fn dependencies(sys: &ConstraintSystem) -> Vec<(u32, u32)> {
    let mut deps = Vec::new();
    for c in &sys.constraints {
        if !c.rhs.is_zero() {
            continue;
        }
        match c.coeffs.as_slice() {
            [(a, ca)] if bounded_above_by_zero(c.rel, ca) => deps.push((0, *a)),
            [(a, ca), (b, cb)] if (ca + cb).is_zero() => {
                let (big, small, cbig) = if a & b == *a { (*b, *a, cb) } else if a & b == *b { (*a, *b, ca) } else { continue };
                // h_big - h_small >= 0 on the cone, so an upper bound of zero pins it.
                if bounded_above_by_zero(c.rel, cbig) {
                    deps.push((small, big));
                }
            }
            _ => {}
        }
    }
    deps.sort();
    deps.dedup();
    deps
}

/// Whether `coef · x  rel  0` implies `x <= 0`.
fn bounded_above_by_zero(rel: Relation, coef: &Q) -> bool {
    match rel {
        Relation::Eq => true,
        Relation::Le => coef.is_positive(),
        Relation::Ge => coef.is_negative(),
    }
}

fn close(mut a: u32, deps: &[(u32, u32)]) -> u32 {
    loop {
        let before = a;
        for &(y, x) in deps {
            if a & y == y {
                a |= x;
            }
        }
        if a == before {
            return a;
        }
    }
}

pub fn outer_bound(q: &BoundQuery) -> Result<OuterBound, BoundsError> {
    OuterBoundSolver::new(q)?.solve(&q.weights)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepPoint {
    pub weights: Vec<Q>,
    pub result: OuterBound,
}

/// Presolved solvers keyed by constraint-system hash, plus solved objectives.
#[derive(Debug, Default)]
pub struct BoundCache {
    solvers: Mutex<HashMap<String, Arc<OuterBoundSolver>>>,
    results: Mutex<HashMap<(String, Vec<Q>), OuterBound>>,
}

impl BoundCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn solver(&self, q: &BoundQuery) -> Result<Arc<OuterBoundSolver>, BoundsError> {
        let hash = system_hash(&outer_bound_system(q)?);
        if let Some(s) = self.solvers.lock().expect("cache lock").get(&hash) {
            return Ok(Arc::clone(s));
        }
        let s = Arc::new(OuterBoundSolver::new(q)?);
        self.solvers.lock().expect("cache lock").insert(hash, Arc::clone(&s));
        Ok(s)
    }

    pub fn cached_results(&self) -> usize {
        self.results.lock().expect("cache lock").len()
    }

    /// Solves each weight vector, in parallel, returning results in input order.
    pub fn sweep(&self, base: &BoundQuery, weights: &[Vec<Q>]) -> Result<Vec<SweepPoint>, BoundsError> {
        if weights.is_empty() {
            return Ok(Vec::new());
        }
        let solver = self.solver(base)?;
        weights
            .par_iter()
            .map(|w| {
                let key = (solver.hash.clone(), w.clone());
                if let Some(r) = self.results.lock().expect("cache lock").get(&key) {
                    return Ok(SweepPoint { weights: w.clone(), result: r.clone() });
                }
                let r = solver.solve(w)?;
                self.results.lock().expect("cache lock").insert(key, r.clone());
                Ok(SweepPoint { weights: w.clone(), result: r })
            })
            .collect()
    }
}

/// Support values of the outer region along each weight vector.
pub fn outer_bound_sweep(
    net: &Network,
    weights: &[Vec<Q>],
    mode: Mode,
    relax: Option<Relax>,
) -> Result<Vec<SweepPoint>, BoundsError> {
    let mut base = BoundQuery::new(net.clone(), mode, Vec::new());
    base.relax = relax;
    BoundCache::new().sweep(&base, weights)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyCheck {
    pub family: String,
    pub ok: bool,
    pub violations: Vec<ConstraintCheck>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificateReport {
    pub ok: bool,
    pub mode: Mode,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub a: Q,
    /// `a · (h_{m_s})_s`; an achievable rate point when `ok`.
    #[serde(serialize_with = "crate::rational::serialize_q_vec")]
    pub rate: Vec<Q>,
    pub exact: bool,
    pub families: Vec<FamilyCheck>,
}

/// Checks that `a·h` lies in the inner-bound set for `mode`. `h` must be the
/// entropy vector of an actual distribution (for instance one produced by
/// evaluating a code); the down-scaling by `a` is what time sharing with an
/// idle code achieves.
pub fn inner_certificate(h: &EntropyVector, net: &Network, mode: Mode, a: &Q) -> Result<CertificateReport, BoundsError> {
    if !a.is_positive() || *a > Q::one() {
        return Err(BoundsError::ScaleOutOfRange);
    }
    let ha = scale(h, a);
    let tol = crate::rational::from_f64(crate::FLOAT_TOL);
    let mut families = Vec::new();
    let shannon = elemental_inequalities(h.n)?;
    families.push(family_check("shannon", &ha, &shannon, &tol)?);
    let relax = match mode {
        Mode::ZeroError => None,
        Mode::Asymptotic => Some(Relax::zero()),
    };
    for fam in Family::ALL {
        let sys = match fam {
            Family::Decoding | Family::Secrecy => gamma_constraints(net, &[fam], relax.as_ref())?,
            _ => gamma_constraints(net, &[fam], None)?,
        };
        families.push(family_check(&format!("gamma{}", fam.index()), &ha, &sys, &tol)?);
    }
    Ok(CertificateReport {
        ok: families.iter().all(|f| f.ok),
        mode,
        a: a.clone(),
        rate: project_sources(&ha, net),
        exact: h.exact,
        families,
    })
}

fn family_check(name: &str, h: &EntropyVector, sys: &ConstraintSystem, tol: &Q) -> Result<FamilyCheck, BoundsError> {
    let rep = check_membership(h, sys, tol)?;
    let violations: Vec<ConstraintCheck> = rep.violations().cloned().collect();
    Ok(FamilyCheck { family: name.to_string(), ok: violations.is_empty(), violations })
}
