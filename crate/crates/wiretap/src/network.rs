//! Wiretap network instances: parsing, validation and small structural transforms.

use crate::rational::{deserialize_q, fmt_q, parse_q, serialize_q, Q};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub id: String,
    pub tail: String,
    pub head: String,
    #[serde(serialize_with = "serialize_q", deserialize_with = "deserialize_q")]
    pub cap: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sink {
    pub node: String,
    pub beta: Vec<String>,
}

/// A DAG of capacitated noiseless links with sources, sinks, demands and the
/// collection of edge sets an eavesdropper may observe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Network {
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
    pub sources: Vec<String>,
    pub sinks: Vec<Sink>,
    pub wiretap_sets: Vec<Vec<String>>,
    /// Sources that inject key only; their message coordinate is pinned to zero.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub key_only: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NetworkError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown node reference {0:?}")]
    UnknownNode(String),
    #[error("unknown edge reference {0:?}")]
    UnknownEdge(String),
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("graph not acyclic")]
    Cycle,
    #[error("node {0:?} is a source or sink and cannot receive a key link")]
    NotIntermediate(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

pub fn parse_network(text: &str) -> Result<Network, NetworkError> {
    let net: Network = serde_json::from_str(text).map_err(|e| NetworkError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    net.check_references()?;
    Ok(net)
}

pub fn serialize_network(net: &Network) -> String {
    serde_json::to_string_pretty(net).expect("network serializes") + "\n"
}

impl Network {
    fn check_references(&self) -> Result<(), NetworkError> {
        let mut nodes = BTreeSet::new();
        for n in &self.nodes {
            if !nodes.insert(n.as_str()) {
                return Err(NetworkError::DuplicateId(n.clone()));
            }
        }
        let mut edges = BTreeSet::new();
        for e in &self.edges {
            if !edges.insert(e.id.as_str()) {
                return Err(NetworkError::DuplicateId(e.id.clone()));
            }
            for end in [&e.tail, &e.head] {
                if !nodes.contains(end.as_str()) {
                    return Err(NetworkError::UnknownNode(end.clone()));
                }
            }
        }
        let mut roles = BTreeSet::new();
        for s in &self.sources {
            if !nodes.contains(s.as_str()) {
                return Err(NetworkError::UnknownNode(s.clone()));
            }
            if !roles.insert(("source", s.as_str())) {
                return Err(NetworkError::DuplicateId(s.clone()));
            }
        }
        for t in &self.sinks {
            if !nodes.contains(t.node.as_str()) {
                return Err(NetworkError::UnknownNode(t.node.clone()));
            }
            if !roles.insert(("sink", t.node.as_str())) {
                return Err(NetworkError::DuplicateId(t.node.clone()));
            }
            if let Some(b) = t.beta.iter().find(|b| !nodes.contains(b.as_str())) {
                return Err(NetworkError::UnknownNode(b.clone()));
            }
        }
        if let Some(k) = self.key_only.iter().find(|k| !nodes.contains(k.as_str())) {
            return Err(NetworkError::UnknownNode(k.clone()));
        }
        for alpha in &self.wiretap_sets {
            if let Some(e) = alpha.iter().find(|e| !edges.contains(e.as_str())) {
                return Err(NetworkError::UnknownEdge(e.clone()));
            }
        }
        Ok(())
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn source_index(&self, node: &str) -> Option<usize> {
        self.sources.iter().position(|s| s == node)
    }

    pub fn is_source(&self, v: &str) -> bool {
        self.sources.iter().any(|s| s == v)
    }

    pub fn is_sink(&self, v: &str) -> bool {
        self.sinks.iter().any(|t| t.node == v)
    }

    pub fn is_key_only(&self, s: &str) -> bool {
        self.key_only.iter().any(|k| k == s)
    }

    /// Incoming edge indices of `v`, in edge-list order.
    pub fn in_edges(&self, v: &str) -> Vec<usize> {
        (0..self.edges.len()).filter(|&i| self.edges[i].head == v).collect()
    }

    /// Outgoing edge indices of `v`, in edge-list order.
    pub fn out_edges(&self, v: &str) -> Vec<usize> {
        (0..self.edges.len()).filter(|&i| self.edges[i].tail == v).collect()
    }

    pub fn intermediates(&self) -> Vec<&str> {
        self.nodes
            .iter()
            .map(String::as_str)
            .filter(|v| !self.is_source(v) && !self.is_sink(v))
            .collect()
    }

    /// Ground-set size `2|S| + |E|`.
    pub fn ground_size(&self) -> usize {
        2 * self.sources.len() + self.edges.len()
    }

    /// Sum of capacities leaving sources.
    pub fn source_out_capacity(&self) -> Q {
        self.edges.iter().filter(|e| self.is_source(&e.tail)).map(|e| e.cap.clone()).sum()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        let mut push = |rule, detail: String| v.push(Violation { rule, detail });
        let node_set: BTreeSet<&str> = self.nodes.iter().map(String::as_str).collect();
        let edge_set: BTreeSet<&str> = self.edges.iter().map(|e| e.id.as_str()).collect();
        for e in &self.edges {
            for end in [&e.tail, &e.head] {
                if !node_set.contains(end.as_str()) {
                    push("edge-endpoint", format!("edge {} references unknown node {}", e.id, end));
                }
            }
            if e.cap.is_negative() {
                push("capacity-nonnegative", format!("edge {} has negative capacity {}", e.id, fmt_q(&e.cap)));
            }
            if self.is_source(&e.head) {
                push("source-no-incoming", format!("source has incoming edge: {} enters {}", e.id, e.head));
            }
            if self.is_sink(&e.tail) {
                push("sink-no-outgoing", format!("sink has outgoing edge: {} leaves {}", e.id, e.tail));
            }
        }
        for t in &self.sinks {
            if self.is_source(&t.node) {
                push("sources-sinks-disjoint", format!("node {} is both a source and a sink", t.node));
            }
            for b in &t.beta {
                if !self.is_source(b) {
                    push("demand-subset-of-sources", format!("sink {} demands {} which is not a source", t.node, b));
                }
            }
        }
        for k in &self.key_only {
            if !self.is_source(k) {
                push("key-only-is-source", format!("key-only node {k} is not a source"));
            }
        }
        for (i, alpha) in self.wiretap_sets.iter().enumerate() {
            for e in alpha {
                if !edge_set.contains(e.as_str()) {
                    push("wiretap-edge-exists", format!("wiretap set {i} references unknown edge {e}"));
                }
            }
        }
        if self.topological_order().is_err() {
            push("acyclic", "graph not acyclic".to_string());
        }
        ValidationReport { ok: v.is_empty(), violations: v }
    }

    /// Kahn's algorithm; ready nodes leave in lexicographic id order.
    pub fn topological_order(&self) -> Result<Vec<String>, NetworkError> {
        let mut indeg: BTreeMap<&str, usize> = self.nodes.iter().map(|n| (n.as_str(), 0)).collect();
        for e in &self.edges {
            if let Some(d) = indeg.get_mut(e.head.as_str()) {
                *d += 1;
            }
        }
        let mut ready: BTreeSet<&str> = indeg.iter().filter(|(_, &d)| d == 0).map(|(n, _)| *n).collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(v) = ready.pop_first() {
            order.push(v.to_string());
            for e in self.edges.iter().filter(|e| e.tail == v) {
                if let Some(d) = indeg.get_mut(e.head.as_str()) {
                    *d -= 1;
                    if *d == 0 {
                        ready.insert(e.head.as_str());
                    }
                }
            }
        }
        if order.len() == self.nodes.len() {
            Ok(order)
        } else {
            Err(NetworkError::Cycle)
        }
    }

    /// Edge indices sorted so every edge comes after the edges entering its tail.
    pub fn edges_in_topological_order(&self) -> Result<Vec<usize>, NetworkError> {
        let order = self.topological_order()?;
        let rank: BTreeMap<&str, usize> = order.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut idx: Vec<usize> = (0..self.edges.len()).collect();
        idx.sort_by_key(|&i| (rank[self.edges[i].tail.as_str()], i));
        Ok(idx)
    }

    /// Adds a key-only source feeding `v` through a fresh edge of capacity `cap`.
    pub fn promote_key_node(&self, v: &str, cap: Q) -> Result<Network, NetworkError> {
        if !self.nodes.iter().any(|n| n == v) {
            return Err(NetworkError::UnknownNode(v.to_string()));
        }
        if self.is_source(v) || self.is_sink(v) {
            return Err(NetworkError::NotIntermediate(v.to_string()));
        }
        let fresh = |base: String, taken: &dyn Fn(&str) -> bool| {
            let mut name = base.clone();
            let mut k = 1;
            while taken(&name) {
                name = format!("{base}_{k}");
                k += 1;
            }
            name
        };
        let s = fresh(format!("key_{v}"), &|n| self.nodes.iter().any(|x| x == n));
        let e = fresh(format!("key_{v}"), &|n| self.edges.iter().any(|x| x.id == n));
        let mut net = self.clone();
        net.nodes.push(s.clone());
        net.sources.push(s.clone());
        net.key_only.push(s.clone());
        net.edges.push(Edge { id: e, tail: s, head: v.to_string(), cap });
        Ok(net)
    }

    /// Copy with every capacity multiplied by `k`.
    pub fn scale_capacities(&self, k: &Q) -> Network {
        let mut net = self.clone();
        for e in &mut net.edges {
            e.cap = &e.cap * k;
        }
        net
    }

    pub fn with_wiretap_sets(&self, sets: Vec<Vec<String>>) -> Network {
        let mut net = self.clone();
        net.wiretap_sets = sets;
        net
    }

    /// Every capacity is zero or positive and finite.
    pub fn capacities(&self) -> Vec<Q> {
        self.edges.iter().map(|e| e.cap.clone()).collect()
    }

    pub fn all_zero_capacity(&self) -> bool {
        self.edges.iter().all(|e| e.cap.is_zero())
    }
}

/// Builder used by fixtures and tests.
pub fn edge(id: &str, tail: &str, head: &str, cap: &str) -> Edge {
    Edge { id: id.into(), tail: tail.into(), head: head.into(), cap: parse_q(cap).expect("valid capacity") }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond() -> Network {
        Network {
            nodes: ["t", "b", "a", "s"].map(String::from).to_vec(),
            edges: vec![edge("e1", "s", "a", "1"), edge("e2", "s", "b", "1"), edge("e3", "a", "t", "1"), edge("e4", "b", "t", "1")],
            sources: vec!["s".into()],
            sinks: vec![Sink { node: "t".into(), beta: vec!["s".into()] }],
            wiretap_sets: vec![],
            key_only: vec![],
        }
    }

    #[test]
    fn diamond_order_breaks_ties_lexicographically() {
        assert_eq!(diamond().topological_order().unwrap(), ["s", "a", "b", "t"]);
    }

    #[test]
    fn unknown_edge_in_wiretap_set() {
        let text = r#"{"nodes":["s","t"],"edges":[{"id":"e1","tail":"s","head":"t","cap":"1"}],
            "sources":["s"],"sinks":[{"node":"t","beta":["s"]}],"wiretap_sets":[["e9"]]}"#;
        let err = parse_network(text).unwrap_err();
        assert!(err.to_string().contains("unknown edge reference"), "{err}");
    }

    #[test]
    fn unknown_keys_and_syntax_errors() {
        let text = r#"{"nodes":[],"edges":[],"sources":[],"sinks":[],"wiretap_sets":[],"extra":1}"#;
        assert!(matches!(parse_network(text), Err(NetworkError::Syntax { .. })));
        let err = parse_network("{\"nodes\": [").unwrap_err();
        assert!(matches!(err, NetworkError::Syntax { line: 1, .. }), "{err}");
    }

    #[test]
    fn duplicate_ids() {
        let mut net = diamond();
        net.edges.push(edge("e1", "a", "t", "1"));
        let text = serialize_network(&net);
        assert_eq!(parse_network(&text), Err(NetworkError::DuplicateId("e1".into())));
    }

    #[test]
    fn empty_edge_list_parses() {
        let text = r#"{"nodes":["s","t"],"edges":[],"sources":["s"],"sinks":[{"node":"t","beta":["s"]}],"wiretap_sets":[]}"#;
        let net = parse_network(text).unwrap();
        assert!(net.validate().ok);
    }

    #[test]
    fn validation_lists_every_violation() {
        let mut net = diamond();
        net.edges.push(edge("back", "a", "s", "1"));
        net.edges.push(edge("loop", "t", "a", "-1"));
        let report = net.validate();
        let rules: BTreeSet<&str> = report.violations.iter().map(|v| v.rule).collect();
        assert!(!report.ok);
        for r in ["source-no-incoming", "sink-no-outgoing", "capacity-nonnegative", "acyclic"] {
            assert!(rules.contains(r), "missing {r}: {rules:?}");
        }
        assert!(report.violations.iter().any(|v| v.detail.contains("source has incoming edge")));
        assert!(report.violations.iter().any(|v| v.detail == "graph not acyclic"));
    }

    #[test]
    fn promote_key_node_adds_source_and_edge() {
        let net = diamond();
        let p = net.promote_key_node("a", Q::zero()).unwrap();
        assert_eq!(p.sources.len(), 2);
        assert_eq!(p.edges.len(), 5);
        assert!(p.validate().ok);
        assert!(p.is_key_only("key_a"));
        assert_eq!(net, diamond());
        assert!(matches!(net.promote_key_node("t", Q::zero()), Err(NetworkError::NotIntermediate(_))));
        assert!(matches!(net.promote_key_node("s", Q::zero()), Err(NetworkError::NotIntermediate(_))));
    }
}
