//! Typical-set sizes by the method of types, next to the `2^{n(H +- eps)}` bracket.
//!
//! `cargo run --example typicality [p1] [eps] [max_n]` for a Bernoulli(p1) source.

use wiretap::codelab::{big_log2, bracket_onset, size_bracket, typical_probability, typical_set_size};
use wiretap::rational::{parse_q, to_f64, Q};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let p1 = parse_q(args.get(1).map_or("1/4", String::as_str))?;
    let eps = parse_q(args.get(2).map_or("1/10", String::as_str))?;
    let max_n: usize = args.get(3).map_or(Ok(24), |s| s.parse())?;
    let p: Vec<Q> = vec![Q::from_integer(1.into()) - &p1, p1];
    println!("{:>4} {:>12} {:>9} {:>9} {:>9} {:>8}", "n", "|T|", "lower", "log|T|", "upper", "P(T)");
    for n in (2..=max_n).step_by(2) {
        let size = typical_set_size(&p, n, &eps);
        let (lo, _, hi) = size_bracket(&p, n, &eps);
        let prob = to_f64(&typical_probability(&p, n, &eps));
        println!("{n:>4} {size:>12} {lo:>9.3} {:>9.3} {hi:>9.3} {prob:>8.4}", big_log2(&size));
    }
    match bracket_onset(&p, &eps, 256) {
        Some(n) => println!("bracket holds from n = {n}"),
        None => println!("bracket does not hold for any n <= 256"),
    }
    Ok(())
}
