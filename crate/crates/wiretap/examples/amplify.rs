//! Amplifies the two-bit toy weak code for growing `L` and prints the exact
//! leakage to an eavesdropper who also reads the side messages.
//!
//! `cargo run --example amplify [weak.json] [delta2] [L...]`

use std::time::Instant;
use wiretap::amplifier::{amplify, evaluate_amplified, parse_weak, AmpParams, DEFAULT_SEED_CAP};
use wiretap::rational::{fmt_q, parse_q};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let text = match args.get(1) {
        Some(p) => std::fs::read_to_string(p)?,
        None => include_str!("../fixtures/weak_bsc.json").to_string(),
    };
    let weak = parse_weak(&text)?;
    let delta2 = parse_q(args.get(2).map_or("1/10", String::as_str))?;
    let ls: Vec<u32> = if args.len() > 3 { args[3..].iter().map(|x| x.parse()).collect::<Result<_, _>>()? } else { vec![2, 4, 8] };
    for l in ls {
        let start = Instant::now();
        let code = amplify(&weak, &AmpParams { l, delta2: delta2.clone(), ..AmpParams::default() })?;
        let r = evaluate_amplified(&code, DEFAULT_SEED_CAP)?;
        println!("L = {l}, lambda = {}, seeds = {}, {:.1?}", r.lambda, r.seeds, start.elapsed());
        for p in &r.plans {
            println!("  {}: n1 = {}, n2 = {}, n3 = {}, side bits = {}", p.source, p.n1, p.n2, p.n3, p.side_bits);
        }
        for x in &r.leakage {
            println!("  I(M_bar; Y_{:?}, O, V) = {:.6} bits", x.alpha, x.bits.approx);
        }
        for u in &r.uniformity {
            println!("  {}: d_TV = {}, D = {}, Pinsker {}", u.source, fmt_q(&u.dtv), fmt_q(&u.divergence), u.pinsker_every_seed && u.pinsker_average);
        }
        for e in &r.errors {
            println!("  {} -> {}: block error {:?}", e.source, e.sink, e.block_error.as_ref().map(fmt_q));
        }
        let i = &r.inflation;
        println!("  inflation: side {:?}, seed {:?}, budget {}", i.side.as_ref().map(fmt_q), i.seed.as_ref().map(fmt_q), fmt_q(&i.budget));
    }
    Ok(())
}
