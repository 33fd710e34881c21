//! Brute-force LP oracle: enumerate every basic solution of the constraint
//! arrangement (rows plus nonnegativity bounds) with i128 fractions.

use num_rational::Ratio;
use rand::Rng;
use wiretap::lp::{LpProblem, Relation, VarSign};
use wiretap::rational::{frac, Q};

pub type R = Ratio<i128>;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutcome {
    Infeasible,
    Unbounded,
    Optimal(R),
}

#[derive(Debug, Clone)]
pub struct SmallLp {
    pub n: usize,
    pub rows: Vec<(Vec<i64>, Relation, i64)>,
    pub objective: Vec<i64>,
}

impl SmallLp {
    pub fn random(rng: &mut impl Rng) -> Self {
        let n = rng.gen_range(1..=6);
        let m = rng.gen_range(1..=10);
        let rows = (0..m)
            .map(|_| {
                let coeffs = (0..n).map(|_| rng.gen_range(-5..=5)).collect();
                let rel = match rng.gen_range(0..7) {
                    0 => Relation::Eq,
                    1 | 2 => Relation::Ge,
                    _ => Relation::Le,
                };
                (coeffs, rel, rng.gen_range(-5..=5))
            })
            .collect();
        let objective = (0..n).map(|_| rng.gen_range(-5..=5)).collect();
        SmallLp { n, rows, objective }
    }

    pub fn to_problem(&self) -> LpProblem {
        let mut p = LpProblem::new(self.n, VarSign::NonNegative);
        for (c, rel, b) in &self.rows {
            let coeffs = c.iter().enumerate().filter(|(_, v)| **v != 0).map(|(j, v)| (j, frac(*v, 1))).collect();
            p.push(coeffs, *rel, frac(*b, 1));
        }
        p.objective = self.objective.iter().enumerate().filter(|(_, v)| **v != 0).map(|(j, v)| (j, frac(*v, 1))).collect();
        p
    }
}

pub fn to_q(r: &R) -> Q {
    frac(*r.numer() as i64, *r.denom() as i64)
}

fn solve_square(mut a: Vec<Vec<R>>, mut b: Vec<R>) -> Option<Vec<R>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| a[r][col] != R::from_integer(0))?;
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col && a[r][col] != R::from_integer(0) {
                let f = a[r][col] / a[col][col];
                for k in col..n {
                    let v = a[col][k];
                    a[r][k] -= f * v;
                }
                let bc = b[col];
                b[r] -= f * bc;
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn holds(rel: Relation, lhs: R, rhs: R) -> bool {
    match rel {
        Relation::Le => lhs <= rhs,
        Relation::Ge => lhs >= rhs,
        Relation::Eq => lhs == rhs,
    }
}

/// Maximum over vertices of the polyhedron cut by `sum x <= cap`.
fn best_vertex(lp: &SmallLp, cap: i128) -> Option<R> {
    let n = lp.n;
    let mut hyper: Vec<(Vec<R>, R)> = lp
        .rows
        .iter()
        .map(|(c, _, b)| (c.iter().map(|&v| R::from_integer(v as i128)).collect(), R::from_integer(*b as i128)))
        .collect();
    for j in 0..n {
        let mut e = vec![R::from_integer(0); n];
        e[j] = R::from_integer(1);
        hyper.push((e, R::from_integer(0)));
    }
    hyper.push((vec![R::from_integer(1); n], R::from_integer(cap)));
    let feasible = |x: &[R]| {
        x.iter().all(|v| *v >= R::from_integer(0))
            && x.iter().fold(R::from_integer(0), |a, v| a + v) <= R::from_integer(cap)
            && lp.rows.iter().all(|(c, rel, b)| {
                let lhs = c.iter().zip(x).fold(R::from_integer(0), |a, (ci, xi)| a + R::from_integer(*ci as i128) * xi);
                holds(*rel, lhs, R::from_integer(*b as i128))
            })
    };
    let mut best: Option<R> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    let h = hyper.len();
    loop {
        let a = idx.iter().map(|&i| hyper[i].0.clone()).collect();
        let b = idx.iter().map(|&i| hyper[i].1).collect();
        if let Some(x) = solve_square(a, b) {
            if feasible(&x) {
                let v = lp.objective.iter().zip(&x).fold(R::from_integer(0), |acc, (c, xi)| acc + R::from_integer(*c as i128) * xi);
                best = Some(best.map_or(v, |b: R| b.max(v)));
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < h - n + i {
                idx[i] += 1;
                for k in i + 1..n {
                    idx[k] = idx[k - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn oracle(lp: &SmallLp) -> OracleOutcome {
    // Any vertex of the uncapped polyhedron has coordinates far below 10^9.
    let lo = best_vertex(lp, 1_000_000_000);
    let hi = best_vertex(lp, 2_000_000_000);
    match (lo, hi) {
        (None, _) => OracleOutcome::Infeasible,
        (Some(a), Some(b)) if a == b => OracleOutcome::Optimal(a),
        _ => OracleOutcome::Unbounded,
    }
}
