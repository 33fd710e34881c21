//! Conditioning on `Y = y` costs more than `log|Y| + lambda` bits of min-entropy
//! with probability at most `2^-lambda`. Checks that on a noisy 8x8 channel.
//!
//! `cargo run --example drop_test [keep]` where the diagonal carries `keep/8` of the mass.

use wiretap::amplifier::{min_entropy, min_entropy_drop_test};
use wiretap::rational::{fmt_q, frac, Q};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let keep: i64 = std::env::args().nth(1).map_or(Ok(6), |s| s.parse())?;
    let off = (Q::from_integer(1.into()) - frac(keep, 8)) / Q::from_integer(56.into());
    let joint: Vec<Vec<Q>> = (0..8).map(|x| (0..8).map(|y| if x == y { frac(keep, 64) } else { off.clone() }).collect()).collect();
    let px: Vec<Q> = joint.iter().map(|r| r.iter().sum()).collect();
    println!("H_inf(X) = {:.4}", min_entropy(&px)?.approx);
    for lambda in 1..=4 {
        let t = min_entropy_drop_test(&joint, lambda)?;
        println!("lambda = {lambda}: frequency {} >= {} {}", fmt_q(&t.frequency), fmt_q(&t.bound), t.holds);
    }
    Ok(())
}
