use super::{LpProblem, LpResult, LpStatus, Relation, SolveOptions, VarSign};
use crate::rational::{fmt_q, Q};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use std::fmt::Write;

/// Rows beyond this size are updated in parallel; results are identical either way.
const PAR_ROWS: usize = 256;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Aux {
    Slack,
    Surplus,
    None,
}

/// Dictionary `x_B = beta - A x_N`, objective `z = z0 + d . x_N`.
struct Dictionary {
    a: Vec<Vec<Q>>,
    beta: Vec<Q>,
    d: Vec<Q>,
    z0: Q,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    barred: Vec<bool>,
    first_artificial: usize,
    pivots: usize,
    trace: Option<String>,
}

enum Step {
    Optimal,
    Unbounded,
    Pivoted,
}

impl Dictionary {
    fn is_artificial(&self, var: usize) -> bool {
        var >= self.first_artificial
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let p = self.a[r][s].clone();
        let inv = Q::one() / &p;
        let mut row = std::mem::take(&mut self.a[r]);
        for (j, v) in row.iter_mut().enumerate() {
            if j != s && !v.is_zero() {
                *v *= &inv;
            }
        }
        row[s] = inv.clone();
        let beta_r = &self.beta[r] * &inv;
        let nz: Vec<usize> = (0..row.len()).filter(|&j| j != s && !row[j].is_zero()).collect();

        let update = |ai: &mut Vec<Q>, bi: &mut Q| {
            let f = ai[s].clone();
            if f.is_zero() {
                return;
            }
            for &j in &nz {
                let delta = &f * &row[j];
                ai[j] -= delta;
            }
            ai[s] = -(&f * &row[s]);
            if !beta_r.is_zero() {
                *bi -= &f * &beta_r;
            }
        };
        if self.a.len() > PAR_ROWS {
            self.a.par_iter_mut().zip(self.beta.par_iter_mut()).for_each(|(ai, bi)| {
                if !ai.is_empty() {
                    update(ai, bi)
                }
            });
        } else {
            for (ai, bi) in self.a.iter_mut().zip(self.beta.iter_mut()) {
                if !ai.is_empty() {
                    update(ai, bi);
                }
            }
        }
        let ds = self.d[s].clone();
        if !ds.is_zero() {
            for &j in &nz {
                let delta = &ds * &row[j];
                self.d[j] -= delta;
            }
            self.d[s] = -(&ds * &row[s]);
            self.z0 += &ds * &beta_r;
        }
        self.a[r] = row;
        self.beta[r] = beta_r;
        std::mem::swap(&mut self.basic[r], &mut self.nonbasic[s]);
        self.pivots += 1;
        if let Some(t) = self.trace.as_mut() {
            let _ = writeln!(
                t,
                "pivot {}: enter x{} leave x{} objective {}",
                self.pivots,
                self.basic[r],
                self.nonbasic[s],
                fmt_q(&self.z0)
            );
        }
    }

    /// One Bland iteration: lowest-index improving column enters, minimum ratio
    /// row with lowest basic index leaves.
    fn step(&mut self) -> Step {
        let mut enter: Option<usize> = None;
        for j in 0..self.d.len() {
            if self.barred[j] || !self.d[j].is_positive() {
                continue;
            }
            if enter.map_or(true, |e| self.nonbasic[j] < self.nonbasic[e]) {
                enter = Some(j);
            }
        }
        let Some(s) = enter else { return Step::Optimal };
        let mut leave: Option<usize> = None;
        for i in 0..self.a.len() {
            let ais = &self.a[i][s];
            if !ais.is_positive() {
                continue;
            }
            leave = match leave {
                None => Some(i),
                Some(k) => {
                    let lhs = &self.beta[i] * &self.a[k][s];
                    let rhs = &self.beta[k] * ais;
                    if lhs < rhs || (lhs == rhs && self.basic[i] < self.basic[k]) {
                        Some(i)
                    } else {
                        Some(k)
                    }
                }
            };
        }
        match leave {
            None => Step::Unbounded,
            Some(r) => {
                self.pivot(r, s);
                Step::Pivoted
            }
        }
    }

    fn run(&mut self, max_pivots: usize) -> Result<Step, ()> {
        loop {
            if self.pivots >= max_pivots {
                return Err(());
            }
            match self.step() {
                Step::Pivoted => continue,
                other => return Ok(other),
            }
        }
    }

    fn reduced_cost(&self, var: usize) -> Q {
        match self.nonbasic.iter().position(|&v| v == var) {
            Some(j) => self.d[j].clone(),
            None => Q::zero(),
        }
    }

    fn dump(&mut self, title: &str) {
        let Some(mut t) = self.trace.take() else { return };
        let _ = writeln!(t, "tableau ({title}): z = {} + ...", fmt_q(&self.z0));
        for (i, row) in self.a.iter().enumerate() {
            let terms: Vec<String> = row
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(j, v)| format!("{}*x{}", fmt_q(v), self.nonbasic[j]))
                .collect();
            let _ = writeln!(t, "  x{} = {} - ({})", self.basic[i], fmt_q(&self.beta[i]), terms.join(" + "));
        }
        self.trace = Some(t);
    }
}

/// Solves `p` with the given options. See the module docs for the contract.
pub fn solve_with(p: &LpProblem, opts: &SolveOptions) -> LpResult {
    let m = p.rows.len();
    let n = p.num_vars;
    let n_struct = match p.var_sign {
        VarSign::NonNegative => n,
        VarSign::Free => 2 * n,
    };
    // Normalize to nonnegative right-hand sides; homogeneous `>=` rows become
    // `<=` rows so their slack starts basic instead of needing an artificial.
    let mut sigma = vec![1i8; m];
    let mut rels = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (i, row) in p.rows.iter().enumerate() {
        if row.rhs.is_negative() || (row.rhs.is_zero() && row.rel == Relation::Ge) {
            sigma[i] = -1;
            rels.push(row.rel.flipped());
            rhs.push(-row.rhs.clone());
        } else {
            rels.push(row.rel);
            rhs.push(row.rhs.clone());
        }
    }
    let aux: Vec<Aux> = rels
        .iter()
        .map(|r| match r {
            Relation::Le => Aux::Slack,
            Relation::Ge => Aux::Surplus,
            Relation::Eq => Aux::None,
        })
        .collect();
    let slack_var = |i: usize| n_struct + i;
    let art_var = |i: usize| n_struct + m + i;

    let mut nonbasic: Vec<usize> = (0..n_struct).collect();
    let mut surplus_col = vec![usize::MAX; m];
    for i in 0..m {
        if aux[i] == Aux::Surplus {
            surplus_col[i] = nonbasic.len();
            nonbasic.push(slack_var(i));
        }
    }
    let ncols = nonbasic.len();
    let mut a = vec![vec![Q::zero(); ncols]; m];
    let mut basic = Vec::with_capacity(m);
    for (i, row) in p.rows.iter().enumerate() {
        let sg = Q::from_integer(sigma[i].into());
        for (j, c) in &row.coeffs {
            let v = c * &sg;
            a[i][*j] += &v;
            if p.var_sign == VarSign::Free {
                a[i][n + *j] -= v;
            }
        }
        if aux[i] == Aux::Surplus {
            a[i][surplus_col[i]] = -Q::one();
        }
        basic.push(if aux[i] == Aux::Slack { slack_var(i) } else { art_var(i) });
    }

    let mut dict = Dictionary {
        a,
        beta: rhs,
        d: vec![Q::zero(); ncols],
        z0: Q::zero(),
        basic,
        nonbasic,
        barred: vec![false; ncols],
        first_artificial: n_struct + m,
        pivots: 0,
        trace: opts.trace.then(String::new),
    };
    dict.dump("initial");

    let limit = |dict: Dictionary| LpResult {
        status: LpStatus::LimitExceeded,
        value: None,
        witness: None,
        dual: None,
        certificate_verified: false,
        pivots: dict.pivots,
        trace: dict.trace,
    };

    // Phase one: maximize minus the sum of artificials.
    let has_artificial = dict.basic.iter().any(|&v| dict.is_artificial(v));
    if has_artificial {
        for i in 0..m {
            if dict.is_artificial(dict.basic[i]) {
                dict.z0 -= &dict.beta[i];
                for j in 0..ncols {
                    if !dict.a[i][j].is_zero() {
                        let v = dict.a[i][j].clone();
                        dict.d[j] += v;
                    }
                }
            }
        }
        if let Some(t) = dict.trace.as_mut() {
            let _ = writeln!(t, "phase 1: {} rows, {} columns", m, ncols);
        }
        if dict.run(opts.max_pivots).is_err() {
            return limit(dict);
        }
        if dict.z0.is_negative() {
            let y: Vec<Q> = (0..m)
                .map(|i| {
                    let yp = match aux[i] {
                        Aux::Slack => -dict.reduced_cost(slack_var(i)),
                        Aux::Surplus => dict.reduced_cost(slack_var(i)),
                        Aux::None => -Q::one() - dict.reduced_cost(art_var(i)),
                    };
                    if sigma[i] < 0 {
                        -yp
                    } else {
                        yp
                    }
                })
                .collect();
            let ok = p.verify_infeasibility_certificate(&y);
            return LpResult {
                status: LpStatus::Infeasible,
                value: None,
                witness: None,
                dual: Some(y),
                certificate_verified: ok,
                pivots: dict.pivots,
                trace: dict.trace,
            };
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..m {
            if !dict.is_artificial(dict.basic[r]) {
                continue;
            }
            let mut best: Option<usize> = None;
            for j in 0..ncols {
                if dict.is_artificial(dict.nonbasic[j]) || dict.a[r][j].is_zero() {
                    continue;
                }
                if best.map_or(true, |b| dict.nonbasic[j] < dict.nonbasic[b]) {
                    best = Some(j);
                }
            }
            if let Some(s) = best {
                dict.pivot(r, s);
            }
        }
        for j in 0..ncols {
            dict.barred[j] = dict.is_artificial(dict.nonbasic[j]);
        }
    }

    // Phase two.
    let mut cost = vec![Q::zero(); n_struct + 2 * m];
    for (j, c) in &p.objective {
        cost[*j] += c;
        if p.var_sign == VarSign::Free {
            cost[n + *j] -= c;
        }
    }
    dict.z0 = Q::zero();
    for i in 0..m {
        let cb = &cost[dict.basic[i]];
        if !cb.is_zero() {
            dict.z0 += cb * &dict.beta[i];
        }
    }
    for j in 0..ncols {
        let mut dj = cost[dict.nonbasic[j]].clone();
        for i in 0..m {
            let cb = &cost[dict.basic[i]];
            if !cb.is_zero() && !dict.a[i][j].is_zero() {
                dj -= cb * &dict.a[i][j];
            }
        }
        dict.d[j] = dj;
    }
    if let Some(t) = dict.trace.as_mut() {
        let _ = writeln!(t, "phase 2");
    }
    let outcome = match dict.run(opts.max_pivots) {
        Ok(s) => s,
        Err(()) => return limit(dict),
    };
    dict.dump("final");
    if let Step::Unbounded = outcome {
        return LpResult {
            status: LpStatus::Unbounded,
            value: None,
            witness: None,
            dual: None,
            certificate_verified: false,
            pivots: dict.pivots,
            trace: dict.trace,
        };
    }

    let mut xs = vec![Q::zero(); n_struct + 2 * m];
    for i in 0..m {
        xs[dict.basic[i]] = dict.beta[i].clone();
    }
    let witness: Vec<Q> = match p.var_sign {
        VarSign::NonNegative => xs[..n].to_vec(),
        VarSign::Free => (0..n).map(|j| &xs[j] - &xs[n + j]).collect(),
    };
    let y: Vec<Q> = (0..m)
        .map(|i| {
            let yp = match aux[i] {
                Aux::Slack => -dict.reduced_cost(slack_var(i)),
                Aux::Surplus => dict.reduced_cost(slack_var(i)),
                Aux::None => -dict.reduced_cost(art_var(i)),
            };
            if sigma[i] < 0 {
                -yp
            } else {
                yp
            }
        })
        .collect();
    let value = p.objective_value(&witness);
    let ok = value == dict.z0
        && p.is_feasible_point(&witness)
        && p.verify_optimality_certificate(&y, &value);
    LpResult {
        status: LpStatus::Optimal,
        value: Some(value),
        witness: Some(witness),
        dual: Some(y),
        certificate_verified: ok,
        pivots: dict.pivots,
        trace: dict.trace,
    }
}
