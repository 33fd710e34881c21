//! Solves a small LP in exact arithmetic and re-verifies the dual certificate.
//!
//! maximize 3x + 2y subject to x + y <= 4, x + 3y <= 6, x <= 3, x, y >= 0.

use wiretap::lp::{solve, LpProblem, Relation, VarSign};
use wiretap::rational::{fmt_q, q};

fn main() {
    let mut p = LpProblem::new(2, VarSign::NonNegative);
    p.push(vec![(0, q(1)), (1, q(1))], Relation::Le, q(4));
    p.push(vec![(0, q(1)), (1, q(3))], Relation::Le, q(6));
    p.push(vec![(0, q(1))], Relation::Le, q(3));
    p.objective = vec![(0, q(3)), (1, q(2))];
    let r = solve(&p);
    println!("status {}, value {}", r.status.as_str(), r.value_string().unwrap_or_default());
    if let (Some(x), Some(y)) = (&r.witness, &r.dual) {
        println!("x = [{}]", x.iter().map(fmt_q).collect::<Vec<_>>().join(", "));
        println!("y = [{}], verified {}", y.iter().map(fmt_q).collect::<Vec<_>>().join(", "), r.certificate_verified);
    }
    println!("{} pivots", r.pivots);
}
