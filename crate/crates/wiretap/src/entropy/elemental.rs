use super::system::{terms, Constraint, ConstraintSystem};
use super::{check_n, EntropyError};
use crate::lp::Relation;
use num_traits::Zero;

/// The elemental Shannon inequalities on `n` variables:
/// `H(X_i | X_rest) >= 0` for each `i`, then `I(X_i; X_j | X_K) >= 0` for each
/// `i < j` and `K` avoiding both, in lexicographic `(i, j, K)` order.
/// There are `n + C(n,2) 2^(n-2)` of them and they cut out the Shannon cone.
pub fn elemental_inequalities(n: usize) -> Result<ConstraintSystem, EntropyError> {
    check_n(n)?;
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut sys = ConstraintSystem::new(n);
    for i in 0..n {
        let rest = full & !(1 << i);
        sys.push(Constraint::new(terms(&[full], &[rest]), Relation::Ge, Zero::zero(), format!("elemental H({i}|rest)")));
    }
    for i in 0..n {
        for j in i + 1..n {
            let others = full & !(1 << i) & !(1 << j);
            // Enumerate K as submasks of `others` in increasing numeric order.
            let mut k: u32 = 0;
            loop {
                let (a, b, ab) = (k | 1 << i, k | 1 << j, k | 1 << i | 1 << j);
                sys.push(Constraint::new(
                    terms(&[a, b], &[ab, k]),
                    Relation::Ge,
                    Zero::zero(),
                    format!("elemental I({i};{j}|{k})"),
                ));
                if k == others {
                    break;
                }
                k = (k.wrapping_sub(others)) & others;
            }
        }
    }
    Ok(sys)
}
