//! Sizes a Toeplitz extractor for a min-entropy rate and measures how close its
//! output is to uniform on random flat sources, jointly with the seed.
//!
//! `cargo run --example extractor [n1] [k] [eps'] [sources]`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wiretap::amplifier::{make_extractor, random_flat_source, strong_extraction_check};
use wiretap::rational::{fmt_q, frac, parse_q, to_f64};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let n1: u32 = args.get(1).map_or(Ok(12), |s| s.parse())?;
    let k: u32 = args.get(2).map_or(Ok(9), |s| s.parse())?;
    let eps = parse_q(args.get(3).map_or("1/8", String::as_str))?;
    let count: usize = args.get(4).map_or(Ok(20), |s| s.parse())?;
    let ex = make_extractor(n1, &frac(k as i64, n1 as i64), &eps, 0)?;
    println!("n1 = {}, seed bits n2 = {}, output bits n3 = {}", ex.n1, ex.n2, ex.n3);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let sources: Vec<Vec<u64>> = (0..count).map(|_| random_flat_source(n1, k, &mut rng)).collect();
    let checks = strong_extraction_check(&ex, &sources)?;
    for (i, c) in checks.iter().enumerate() {
        println!("source {i:>3}: d_TV((Z, V), (U, V)) = {:.6}, H(Z | V) = {:.4}", to_f64(&c.distance), c.conditional_entropy);
    }
    let worst = checks.iter().map(|c| c.distance.clone()).max().unwrap_or_default();
    println!("worst {} against eps' = {}", fmt_q(&worst), fmt_q(&eps));
    Ok(())
}
