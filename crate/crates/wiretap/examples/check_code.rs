//! Evaluates a hand-built code exactly and checks its entropy vector against
//! the inner-bound families, scaled so that every edge fits its capacity.
//!
//! `cargo run --release --example check_code -- [network.json code.json scale]`

use wiretap::bounds::{inner_certificate, Mode};
use wiretap::codelab::{evaluate_code, parse_code, DEFAULT_STATE_CAP};
use wiretap::network::parse_network;
use wiretap::rational::{fmt_q, parse_q};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let (net, code, scale) = if args.len() > 3 {
        (std::fs::read_to_string(&args[1])?, std::fs::read_to_string(&args[2])?, parse_q(&args[3])?)
    } else {
        (
            include_str!("../fixtures/butterfly.json").to_string(),
            include_str!("../fixtures/butterfly_secure_code.json").to_string(),
            parse_q("1/2")?,
        )
    };
    let net = parse_network(&net)?;
    let eval = evaluate_code(&net, &parse_code(&code)?, DEFAULT_STATE_CAP)?;
    println!("inputs = {}, zero error = {}, zero leakage = {}", eval.inputs, eval.zero_error(), eval.zero_leakage());
    for r in &eval.rates {
        println!("  {}: H(W) = {:.4}, log|W| = {:.4}", r.edge, r.variable.approx, r.fixed.approx);
    }
    for mode in [Mode::ZeroError, Mode::Asymptotic] {
        let cert = inner_certificate(&eval.entropy, &net, mode, &scale)?;
        let rate: Vec<String> = cert.rate.iter().map(fmt_q).collect();
        println!("{}: certified = {}, rate = {:?}", mode.as_str(), cert.ok, rate);
        for f in cert.families.iter().filter(|f| !f.ok) {
            println!("  {} violated: {}", f.family, f.violations.iter().map(|v| v.provenance.as_str()).collect::<Vec<_>>().join("; "));
        }
    }
    Ok(())
}
