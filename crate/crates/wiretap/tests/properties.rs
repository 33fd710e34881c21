use num_traits::{One, Zero};
use proptest::prelude::*;
use wiretap::amplifier::{maximal_coupling, min_entropy, min_entropy_drop_test, mismatch_probability, total_variation, Extractor};
use wiretap::bounds::{inner_certificate, outer_bound, BoundQuery, Mode};
use wiretap::codelab::{evaluate_code, parse_code, pushforward_typicality_check, DEFAULT_ENUM_CAP, DEFAULT_STATE_CAP};
use wiretap::entropy::{check_membership, elemental_inequalities, entropy_vector_of_pmf, Pmf};
use wiretap::network::{edge, parse_network, serialize_network, Network, Sink};
use wiretap::rational::{entropy_of_pmf, fmt_q, frac, from_f64, q, Q};

/// Source `v0`, sink `v{nodes-1}`; every `(tail, head, cap)` must have `tail < head`.
fn dag(caps: &[(usize, usize, i64)], nodes: usize, taps: &[Vec<usize>]) -> Network {
    let names: Vec<String> = (0..nodes).map(|i| format!("v{i}")).collect();
    let edges: Vec<_> = caps.iter().enumerate().map(|(i, &(a, b, c))| edge(&format!("e{i}"), &names[a], &names[b], &c.to_string())).collect();
    let wiretap_sets = taps
        .iter()
        .map(|s| s.iter().filter(|&&i| i < edges.len()).map(|i| format!("e{i}")).collect())
        .collect();
    Network {
        nodes: names.clone(),
        edges,
        sources: vec![names[0].clone()],
        sinks: vec![Sink { node: names[nodes - 1].clone(), beta: vec![names[0].clone()] }],
        wiretap_sets,
        key_only: Vec::new(),
    }
}

fn parallel(caps: &[i64], taps: &[Vec<usize>]) -> Network {
    dag(&caps.iter().map(|&c| (0, 1, c)).collect::<Vec<_>>(), 2, taps)
}

fn arb_dag() -> impl Strategy<Value = Network> {
    (3usize..6)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec((0..n - 1, 0..n, 0i64..4).prop_map(move |(a, off, c)| (a, a + 1 + off % (n - 1 - a), c)), 1..7),
                prop::collection::vec(prop::collection::vec(0usize..7, 0..3), 0..3),
            )
        })
        .prop_map(|(n, caps, taps)| dag(&caps, n, &taps))
}

/// `2^k` equally likely, possibly repeated, outcomes over `n` variables.
fn arb_dyadic_pmf() -> impl Strategy<Value = Pmf> {
    (1usize..=4, 0u32..=4).prop_flat_map(|(n, k)| {
        prop::collection::vec(prop::collection::vec(0u64..3, n), 1usize << k).prop_map(move |outs| Pmf::uniform(n, outs))
    })
}

fn arb_pmf(max: usize) -> impl Strategy<Value = Vec<Q>> {
    prop::collection::vec(0i64..6, 2..=max).prop_filter_map("nonzero", |w| {
        let total: i64 = w.iter().sum();
        (total > 0).then(|| w.iter().map(|&x| frac(x, total)).collect())
    })
}

fn arb_joint(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<Q>>> {
    prop::collection::vec(0i64..5, rows * cols).prop_filter_map("nonzero", move |w| {
        let total: i64 = w.iter().sum();
        (total > 0).then(|| w.chunks(cols).map(|r| r.iter().map(|&x| frac(x, total)).collect()).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn network_round_trips_through_json(net in arb_dag()) {
        let back = parse_network(&serialize_network(&net)).unwrap();
        prop_assert_eq!(back, net);
    }

    #[test]
    fn topological_order_respects_every_edge(net in arb_dag()) {
        let order = net.topological_order().unwrap();
        let pos = |v: &str| order.iter().position(|x| x == v).unwrap();
        for e in &net.edges {
            prop_assert!(pos(&e.tail) < pos(&e.head));
        }
        prop_assert_eq!(order.len(), net.nodes.len());
    }

    #[test]
    fn pmf_entropy_vectors_satisfy_elemental_rows(pmf in arb_dyadic_pmf()) {
        let h = entropy_vector_of_pmf(&pmf).unwrap();
        let sys = elemental_inequalities(pmf.n).unwrap();
        let rep = check_membership(&h, &sys, &from_f64(1e-9)).unwrap();
        prop_assert!(rep.ok, "{:?}", rep.violations().collect::<Vec<_>>());
    }

    #[test]
    fn min_entropy_never_exceeds_shannon(p in arb_pmf(8)) {
        prop_assert!(min_entropy(&p).unwrap().approx <= entropy_of_pmf(&p).approx + 1e-12);
    }

    #[test]
    fn drop_test_meets_its_bound(joint in (2usize..=8, 2usize..=8).prop_flat_map(|(r, c)| arb_joint(r, c)), lambda in 1u32..=3) {
        let t = min_entropy_drop_test(&joint, lambda).unwrap();
        prop_assert_eq!(&t.bound, &(Q::one() - frac(1, 1 << lambda)));
        prop_assert!(t.holds && t.frequency >= t.bound, "{}", fmt_q(&t.frequency));
    }

    #[test]
    fn maximal_coupling_attains_total_variation(p in arb_pmf(6), r in arb_pmf(6)) {
        let n = p.len().max(r.len());
        let pad = |mut v: Vec<Q>| { v.resize(n, Q::zero()); v };
        let (p, r) = (pad(p), pad(r));
        let j = maximal_coupling(&p, &r);
        for i in 0..n {
            prop_assert_eq!(j[i].iter().sum::<Q>(), p[i].clone());
            prop_assert_eq!(j.iter().map(|row| row[i].clone()).sum::<Q>(), r[i].clone());
        }
        prop_assert_eq!(mismatch_probability(&j), total_variation(&p, &r));
    }

    #[test]
    fn extractor_is_linear(n1 in 1u32..=12, n3_frac in 0u32..=100, a in any::<u64>(), b in any::<u64>(), v in any::<u64>()) {
        let n3 = (n1 * n3_frac / 100).max(1);
        let ex = Extractor::new(n1, n3).unwrap();
        let mask = (1u64 << n1) - 1;
        let v = v % ex.num_seeds();
        let (a, b) = (a & mask, b & mask);
        prop_assert_eq!(ex.extract(a ^ b, v), ex.extract(a, v) ^ ex.extract(b, v));
        prop_assert!(ex.extract(a, v) < 1 << n3);
    }

    #[test]
    fn typical_sequences_push_forward(p in arb_pmf(4), g in prop::collection::vec(0u32..3, 4), n in 1usize..=6) {
        let g = &g[..p.len()];
        let found = pushforward_typicality_check(&p, g, 3, n, &frac(1, 10), DEFAULT_ENUM_CAP).unwrap();
        prop_assert!(found.is_none(), "{:?}", found);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn outer_bound_is_homogeneous(caps in prop::collection::vec(0i64..4, 1..=3), k in 1i64..5, zero in any::<bool>()) {
        let taps: Vec<Vec<usize>> = (0..caps.len()).map(|i| vec![i]).collect();
        let net = parallel(&caps, &taps);
        let mode = if zero { Mode::ZeroError } else { Mode::Asymptotic };
        let base = outer_bound(&BoundQuery::new(net.clone(), mode, vec![q(1)])).unwrap().value.unwrap();
        let scaled = outer_bound(&BoundQuery::new(net.scale_capacities(&q(k)), mode, vec![q(1)])).unwrap().value.unwrap();
        prop_assert_eq!(scaled, base * q(k));
    }

    #[test]
    fn more_wiretap_sets_never_raise_the_bound(caps in prop::collection::vec(1i64..3, 2..=3), extra in prop::collection::vec(0usize..3, 1..=2)) {
        let taps: Vec<Vec<usize>> = vec![vec![0]];
        let net = parallel(&caps, &taps);
        let mut bigger = taps.clone();
        bigger.push(extra);
        let small = outer_bound(&BoundQuery::new(net, Mode::ZeroError, vec![q(1)])).unwrap().value.unwrap();
        let large = outer_bound(&BoundQuery::new(parallel(&caps, &bigger), Mode::ZeroError, vec![q(1)])).unwrap().value.unwrap();
        prop_assert!(large <= small);
    }

    #[test]
    fn certified_rates_stay_below_the_outer_bound(num in 1i64..=8, w in 0i64..4, zero in any::<bool>()) {
        let net = parse_network(include_str!("../fixtures/parallel_edges.json")).unwrap();
        let code = parse_code(include_str!("../fixtures/otp_code.json")).unwrap();
        let eval = evaluate_code(&net, &code, DEFAULT_STATE_CAP).unwrap();
        let mode = if zero { Mode::ZeroError } else { Mode::Asymptotic };
        let cert = inner_certificate(&eval.entropy, &net, mode, &frac(num, 8)).unwrap();
        prop_assert!(cert.ok);
        let outer = outer_bound(&BoundQuery::new(net, mode, vec![q(w)])).unwrap().value.unwrap();
        prop_assert!(&cert.rate[0] * q(w) <= outer);
    }
}
