//! Entropy vectors of small joint distributions, checked against the elemental
//! Shannon inequalities. XOR of two fair bits is the classic tight case.

use wiretap::entropy::{check_membership, elemental_inequalities, entropy_vector_of_pmf, Pmf};
use wiretap::rational::{fmt_q, Q};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for n in 2..=5 {
        println!("n = {n}: {} elemental rows", elemental_inequalities(n)?.constraints.len());
    }
    let xor = Pmf::uniform(3, (0..4u64).map(|v| vec![v & 1, v >> 1, (v & 1) ^ (v >> 1)]).collect());
    let h = entropy_vector_of_pmf(&xor)?;
    for (mask, x) in h.coords.iter().enumerate().skip(1) {
        println!("H({mask:03b}) = {}", fmt_q(x));
    }
    let rep = check_membership(&h, &elemental_inequalities(3)?, &Q::default())?;
    let tight = rep.checks.iter().filter(|c| c.slack == Q::default()).count();
    println!("in the cone: {}, tight rows: {tight}/{}", rep.ok, rep.checks.len());
    Ok(())
}
