//! Runs both random constructions on the one-time-pad system over growing
//! `n_t` and prints decoding error, leakage and per-edge loads.
//!
//! `cargo run --example simulate [rv.json] [eps]`

use wiretap::codelab::{build_asymptotic_sim, build_zero_error_sim, parse_rv, run_sim, SimCaps, SimMode};
use wiretap::rational::{fmt_q, parse_q};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let text = match args.get(1) {
        Some(p) => std::fs::read_to_string(p)?,
        None => include_str!("../fixtures/otp_rv.json").to_string(),
    };
    let eps = parse_q(args.get(2).map_or("1/2", String::as_str))?;
    let rv = parse_rv(&text)?.compile()?;
    let caps = SimCaps::default();
    for n_t in [4, 6, 8] {
        let z = run_sim(&build_zero_error_sim(&rv, n_t, &eps, caps)?, SimMode::Exhaustive, caps)?;
        let a = run_sim(&build_asymptotic_sim(&rv, n_t, &eps, caps)?, SimMode::Exhaustive, caps)?;
        println!("n_t = {n_t}, eps = {}", fmt_q(&eps));
        for (name, r) in [("zero-error", &z), ("asymptotic", &a)] {
            println!("  {name}: n = {}, inputs = {}, P(error) = {}", r.n, r.samples, fmt_q(&r.error_probability()));
            for l in &r.leakage {
                println!("    I(M; W_{:?}) = {:.6} bits (bound {:.6})", l.alpha, l.bits.approx, l.bound.approx);
            }
            for e in &r.edges {
                println!("    {}: load {:.4} bits, budget {}", e.edge, e.load.approx, fmt_q(&e.budget));
            }
        }
    }
    Ok(())
}
