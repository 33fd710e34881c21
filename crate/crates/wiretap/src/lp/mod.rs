//! Exact rational linear programming.
//!
//! Problems are maximizations over a finite list of rows. The solver is a two-phase
//! dictionary simplex with Bland's rule; every optimal or infeasible answer carries a
//! dual certificate that is re-checked in exact arithmetic before it is returned.

mod simplex;

use crate::rational::{fmt_q, Q};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

pub use simplex::solve_with;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }

    pub fn flipped(self) -> Relation {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        }
    }

    /// Whether `lhs rel rhs` holds.
    pub fn holds(self, lhs: &Q, rhs: &Q) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Eq => lhs == rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Row {
    pub coeffs: Vec<(usize, Q)>,
    pub rel: Relation,
    pub rhs: Q,
}

impl Row {
    pub fn new(coeffs: Vec<(usize, Q)>, rel: Relation, rhs: Q) -> Self {
        Row { coeffs, rel, rhs }
    }

    pub fn lhs(&self, x: &[Q]) -> Q {
        self.coeffs.iter().fold(Q::zero(), |acc, (j, c)| acc + c * &x[*j])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarSign {
    NonNegative,
    Free,
}

#[derive(Debug, Clone)]
pub struct LpProblem {
    pub num_vars: usize,
    pub rows: Vec<Row>,
    pub objective: Vec<(usize, Q)>,
    pub var_sign: VarSign,
}

impl LpProblem {
    pub fn new(num_vars: usize, var_sign: VarSign) -> Self {
        LpProblem { num_vars, rows: Vec::new(), objective: Vec::new(), var_sign }
    }

    pub fn push(&mut self, coeffs: Vec<(usize, Q)>, rel: Relation, rhs: Q) {
        self.rows.push(Row::new(coeffs, rel, rhs));
    }

    pub fn objective_value(&self, x: &[Q]) -> Q {
        self.objective.iter().fold(Q::zero(), |acc, (j, c)| acc + c * &x[*j])
    }

    pub fn is_feasible_point(&self, x: &[Q]) -> bool {
        x.len() == self.num_vars
            && (self.var_sign == VarSign::Free || x.iter().all(|v| !v.is_negative()))
            && self.rows.iter().all(|r| r.rel.holds(&r.lhs(x), &r.rhs))
    }

    /// `A^T y` restricted to structural columns.
    fn transpose_times(&self, y: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.num_vars];
        for (row, yi) in self.rows.iter().zip(y) {
            if yi.is_zero() {
                continue;
            }
            for (j, c) in &row.coeffs {
                out[*j] += c * yi;
            }
        }
        out
    }

    fn dual_signs_ok(&self, y: &[Q]) -> bool {
        y.len() == self.rows.len()
            && self.rows.iter().zip(y).all(|(r, yi)| match r.rel {
                Relation::Le => !yi.is_negative(),
                Relation::Ge => !yi.is_positive(),
                Relation::Eq => true,
            })
    }

    /// Checks that `y` proves `value` is an upper bound attained by the primal.
    pub fn verify_optimality_certificate(&self, y: &[Q], value: &Q) -> bool {
        if !self.dual_signs_ok(y) {
            return false;
        }
        let aty = self.transpose_times(y);
        let mut c = vec![Q::zero(); self.num_vars];
        for (j, v) in &self.objective {
            c[*j] += v;
        }
        let cols_ok = aty.iter().zip(&c).all(|(a, cj)| match self.var_sign {
            VarSign::NonNegative => a >= cj,
            VarSign::Free => a == cj,
        });
        let by = self.rows.iter().zip(y).fold(Q::zero(), |acc, (r, yi)| acc + &r.rhs * yi);
        cols_ok && &by == value
    }

    /// Checks a Farkas certificate: `A^T y >= 0` (sign-adjusted) with `b.y < 0`.
    pub fn verify_infeasibility_certificate(&self, y: &[Q]) -> bool {
        if !self.dual_signs_ok(y) {
            return false;
        }
        let aty = self.transpose_times(y);
        let cols_ok = aty.iter().all(|a| match self.var_sign {
            VarSign::NonNegative => !a.is_negative(),
            VarSign::Free => a.is_zero(),
        });
        let by = self.rows.iter().zip(y).fold(Q::zero(), |acc, (r, yi)| acc + &r.rhs * yi);
        cols_ok && by.is_negative()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    LimitExceeded,
}

impl LpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
            LpStatus::LimitExceeded => "limit_exceeded",
        }
    }
}

#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    pub value: Option<Q>,
    pub witness: Option<Vec<Q>>,
    /// One multiplier per row: optimality certificate or Farkas ray.
    pub dual: Option<Vec<Q>>,
    pub certificate_verified: bool,
    pub pivots: usize,
    pub trace: Option<String>,
}

impl LpResult {
    pub fn value_string(&self) -> Option<String> {
        self.value.as_ref().map(fmt_q)
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub max_pivots: usize,
    pub trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { max_pivots: 1_000_000, trace: false }
    }
}

pub fn solve(p: &LpProblem) -> LpResult {
    solve_with(p, &SolveOptions::default())
}

/// Phase one only: a feasible point or a Farkas certificate.
pub fn feasible(p: &LpProblem) -> LpResult {
    let mut q = p.clone();
    q.objective.clear();
    solve_with(&q, &SolveOptions::default())
}
