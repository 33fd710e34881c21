//! Shannon-relaxed outer bound on the secure rate of a network.
//!
//! `cargo run --release --example outer_bound -- [network.json]`
//! (defaults to the butterfly with every single edge wiretapped).

use std::time::Instant;
use wiretap::bounds::{outer_bound, BoundQuery, Mode};
use wiretap::network::parse_network;
use wiretap::rational::{fmt_q, q};

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/butterfly.json").into());
    let net = parse_network(&std::fs::read_to_string(&path).expect("readable network file")).expect("valid network");
    let weights = vec![q(1); net.sources.len()];
    for mode in [Mode::ZeroError, Mode::Asymptotic] {
        let t = Instant::now();
        let r = outer_bound(&BoundQuery::new(net.clone(), mode, weights.clone())).expect("bound");
        println!(
            "{:<11} status={} value={} pivots={} witness_verified={} ({} coords -> {} vars, {} rows -> {}) {:.2?}",
            mode.as_str(),
            r.status.as_str(),
            r.value.as_ref().map_or("-".into(), fmt_q),
            r.pivots,
            r.witness_verified,
            r.stats.coordinates,
            r.stats.reduced_variables,
            r.stats.rows,
            r.stats.reduced_rows,
            t.elapsed()
        );
    }
}
