use super::AmpError;
use crate::rational::{log2_exact, pow2, q, to_f64, Bits, Q};
use num_traits::{One, Zero};
use serde::Serialize;

/// `-log2 max_x p(x)`; exact when the largest mass is a power of two.
pub fn min_entropy(p: &[Q]) -> Result<Bits, AmpError> {
    let m = p.iter().max().filter(|m| !m.is_zero()).ok_or(AmpError::EmptySupport)?;
    Ok(match log2_exact(m) {
        Some(k) => Bits::exact(q(-k)),
        None => Bits::approx(-to_f64(m).log2()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DropTest {
    pub lambda: u32,
    /// `P_Y(H_inf(X) - H_inf(X | Y = y) <= log|Y| + lambda)`.
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub frequency: Q,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub bound: Q,
    pub holds: bool,
}

/// Exact frequency of the bounded min-entropy drop for a joint pmf `joint[x][y]`.
/// The drop condition is tested as `max_x p(x|y) <= |Y| 2^lambda max_x p(x)`,
/// so no logarithm is evaluated.
pub fn min_entropy_drop_test(joint: &[Vec<Q>], lambda: u32) -> Result<DropTest, AmpError> {
    let ny = joint.first().map_or(0, Vec::len);
    if ny == 0 || joint.iter().any(|r| r.len() != ny) {
        return Err(AmpError::Shape("joint pmf must be a nonempty rectangular table".into()));
    }
    let px: Vec<Q> = joint.iter().map(|r| r.iter().sum()).collect();
    let pmax = px.iter().max().cloned().unwrap_or_else(Q::zero);
    if pmax.is_zero() {
        return Err(AmpError::EmptySupport);
    }
    let limit = &pmax * Q::from_integer(ny.into()) * pow2(lambda);
    let mut freq = Q::zero();
    for y in 0..ny {
        let py: Q = joint.iter().map(|r| &r[y]).sum();
        if py.is_zero() {
            continue;
        }
        let top = joint.iter().map(|r| &r[y]).max().expect("nonempty").clone() / &py;
        if top <= limit {
            freq += py;
        }
    }
    let bound = Q::one() - Q::one() / pow2(lambda);
    Ok(DropTest { lambda, holds: freq >= bound, frequency: freq, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    #[test]
    fn min_entropy_examples() {
        let u8: Vec<Q> = vec![frac(1, 8); 8];
        assert_eq!(min_entropy(&u8).unwrap().exact, Some(q(3)));
        assert_eq!(min_entropy(&[frac(1, 2), frac(1, 4), frac(1, 4)]).unwrap().exact, Some(q(1)));
        assert_eq!(min_entropy(&[Q::one(), Q::zero()]).unwrap().exact, Some(q(0)));
        assert!(min_entropy(&[]).is_err());
    }

    #[test]
    fn copy_of_uniform_drops_by_log_y() {
        let k = 4;
        let joint: Vec<Vec<Q>> = (0..k).map(|x| (0..k).map(|y| if x == y { frac(1, k as i64) } else { Q::zero() }).collect()).collect();
        let r = min_entropy_drop_test(&joint, 1).unwrap();
        assert_eq!(r.frequency, Q::one());
    }
}
