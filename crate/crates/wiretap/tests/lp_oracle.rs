mod support;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::lp_vertex::{oracle, to_q, OracleOutcome, SmallLp};
use wiretap::lp::{self, LpProblem, LpStatus, Relation, SolveOptions, VarSign};
use wiretap::rational::{frac, q};

#[test]
fn tiny_statuses() {
    let mut p = LpProblem::new(1, VarSign::Free);
    p.push(vec![(0, q(1))], Relation::Le, q(1));
    p.push(vec![(0, q(1))], Relation::Ge, q(0));
    p.objective = vec![(0, q(1))];
    let r = lp::solve(&p);
    assert_eq!(r.status, LpStatus::Optimal);
    assert_eq!(r.value, Some(q(1)));
    assert!(r.certificate_verified);

    let mut p = LpProblem::new(1, VarSign::Free);
    p.push(vec![(0, q(1))], Relation::Ge, q(2));
    p.push(vec![(0, q(1))], Relation::Le, q(1));
    let r = lp::solve(&p);
    assert_eq!(r.status, LpStatus::Infeasible);
    assert!(r.certificate_verified);

    let mut p = LpProblem::new(1, VarSign::Free);
    p.push(vec![(0, q(1))], Relation::Ge, q(0));
    p.objective = vec![(0, q(1))];
    assert_eq!(lp::solve(&p).status, LpStatus::Unbounded);
}

#[test]
fn free_variables_reach_negative_optimum() {
    // max -x s.t. x >= -3/2, x <= 4
    let mut p = LpProblem::new(1, VarSign::Free);
    p.push(vec![(0, q(1))], Relation::Ge, frac(-3, 2));
    p.push(vec![(0, q(1))], Relation::Le, q(4));
    p.objective = vec![(0, q(-1))];
    let r = lp::solve(&p);
    assert_eq!(r.value, Some(frac(3, 2)));
    assert_eq!(r.witness.unwrap()[0], frac(-3, 2));
    assert!(r.certificate_verified);
}

#[test]
fn pivot_limit_is_a_distinct_status() {
    let mut p = LpProblem::new(2, VarSign::NonNegative);
    p.push(vec![(0, q(1)), (1, q(1))], Relation::Le, q(3));
    p.push(vec![(0, q(1))], Relation::Ge, q(1));
    p.objective = vec![(0, q(1)), (1, q(2))];
    let r = lp::solve_with(&p, &SolveOptions { max_pivots: 1, trace: false });
    assert_eq!(r.status, LpStatus::LimitExceeded);
    let r = lp::solve_with(&p, &SolveOptions { max_pivots: 100, trace: true });
    assert_eq!(r.value, Some(q(5)));
    assert!(r.trace.unwrap().contains("pivot 1"));
}

#[test]
fn deterministic_pivoting() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let p = SmallLp::random(&mut rng).to_problem();
        let a = lp::solve(&p);
        let b = lp::solve(&p);
        assert_eq!(a.pivots, b.pivots);
        assert_eq!(a.witness, b.witness);
    }
}

#[test]
fn random_lps_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut seen = [0usize; 3];
    for case in 0..200 {
        let small = SmallLp::random(&mut rng);
        let p = small.to_problem();
        let r = lp::solve(&p);
        match oracle(&small) {
            OracleOutcome::Infeasible => {
                seen[0] += 1;
                assert_eq!(r.status, LpStatus::Infeasible, "case {case}");
            }
            OracleOutcome::Unbounded => {
                seen[1] += 1;
                assert_eq!(r.status, LpStatus::Unbounded, "case {case}");
            }
            OracleOutcome::Optimal(v) => {
                seen[2] += 1;
                assert_eq!(r.status, LpStatus::Optimal, "case {case}");
                assert_eq!(r.value.clone().unwrap(), to_q(&v), "case {case}");
            }
        }
        if matches!(r.status, LpStatus::Optimal | LpStatus::Infeasible) {
            assert!(r.certificate_verified, "case {case}");
        }
    }
    assert!(seen.iter().all(|&c| c > 0), "status mix {seen:?}");
}
