//! Edmonds-Karp max flow with exact capacities; the multicast rate without an
//! eavesdropper is the smallest source-to-sink max flow.

use num_traits::{Signed, Zero};
use std::collections::VecDeque;
use wiretap::network::Network;
use wiretap::rational::Q;

pub fn max_flow(net: &Network, from: &str, to: &str) -> Q {
    let idx = |v: &str| net.nodes.iter().position(|x| x == v).expect("known node");
    let n = net.nodes.len();
    let mut cap = vec![vec![Q::zero(); n]; n];
    for e in &net.edges {
        cap[idx(&e.tail)][idx(&e.head)] += &e.cap;
    }
    let (s, t) = (idx(from), idx(to));
    let mut total = Q::zero();
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if prev[v] == usize::MAX && cap[u][v].is_positive() {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[t] == usize::MAX {
            return total;
        }
        let mut push = None::<Q>;
        let mut v = t;
        while v != s {
            let c = &cap[prev[v]][v];
            push = Some(push.map_or_else(|| c.clone(), |p| p.min(c.clone())));
            v = prev[v];
        }
        let push = push.expect("nonempty path");
        let mut v = t;
        while v != s {
            let u = prev[v];
            cap[u][v] -= &push;
            cap[v][u] += &push;
            v = u;
        }
        total += push;
    }
}

pub fn multicast_capacity(net: &Network) -> Q {
    let s = &net.sources[0];
    net.sinks.iter().map(|t| max_flow(net, s, &t.node)).min().expect("at least one sink")
}
