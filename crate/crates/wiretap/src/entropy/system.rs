use crate::lp::{LpProblem, Relation, VarSign};
use crate::rational::{fmt_q, parse_q, Q};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt::Write;

/// One linear constraint over subset coordinates. Coefficients are sorted by
/// mask, nonzero, and never mention the empty set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub coeffs: Vec<(u32, Q)>,
    pub rel: Relation,
    pub rhs: Q,
    pub provenance: String,
}

impl Constraint {
    /// Builds a constraint from signed terms, merging repeats and dropping `h_∅`.
    pub fn new(terms: impl IntoIterator<Item = (u32, Q)>, rel: Relation, rhs: Q, provenance: impl Into<String>) -> Self {
        let mut acc: BTreeMap<u32, Q> = BTreeMap::new();
        for (m, c) in terms {
            if m != 0 {
                *acc.entry(m).or_insert_with(Q::zero) += c;
            }
        }
        let coeffs = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Constraint { coeffs, rel, rhs, provenance: provenance.into() }
    }

    /// `Σ c_α h_α` for a coordinate vector indexed by mask.
    pub fn lhs(&self, h: &[Q]) -> Q {
        self.coeffs.iter().map(|(m, c)| c * &h[*m as usize]).sum()
    }

    pub fn to_line(&self) -> String {
        let mut s = String::new();
        for (m, c) in &self.coeffs {
            let sign = if *c < Q::zero() { "-" } else { "+" };
            let _ = write!(s, "{sign}{}·h{m} ", fmt_q(&c.abs()));
        }
        if self.coeffs.is_empty() {
            s.push_str("0 ");
        }
        let _ = write!(s, "{} {} # {}", self.rel.symbol(), fmt_q(&self.rhs), self.provenance);
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct TextFormatError {
    pub line: usize,
    pub message: String,
}

/// An ordered list of constraints over the coordinates of an `n`-variable ground set.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstraintSystem {
    pub n: usize,
    pub constraints: Vec<Constraint>,
}

impl ConstraintSystem {
    pub fn new(n: usize) -> Self {
        ConstraintSystem { n, constraints: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn push(&mut self, c: Constraint) {
        self.constraints.push(c);
    }

    pub fn extend(&mut self, other: ConstraintSystem) {
        debug_assert_eq!(self.n, other.n);
        self.constraints.extend(other.constraints);
    }

    /// Number of subset coordinates, `2^n - 1`.
    pub fn dim(&self) -> usize {
        (1usize << self.n) - 1
    }

    /// Text form: one constraint per line, `±p/q·h<mask> ... <rel> p/q # provenance`,
    /// masks in decimal. A leading `n <n>` line fixes the ground-set size.
    pub fn to_text(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for c in &self.constraints {
            out.push_str(&c.to_line());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, TextFormatError> {
        let err = |line: usize, message: String| TextFormatError { line, message };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or_else(|| err(1, "empty input".into()))?;
        let n: usize = first
            .strip_prefix("n ")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| err(1, "expected header `n <size>`".into()))?;
        let mut sys = ConstraintSystem::new(n);
        for (i, line) in lines {
            let ln = i + 1;
            let (body, prov) = line.split_once(" # ").ok_or_else(|| err(ln, "missing provenance".into()))?;
            let toks: Vec<&str> = body.split_whitespace().collect();
            if toks.len() < 3 {
                return Err(err(ln, "too few tokens".into()));
            }
            let rel = match toks[toks.len() - 2] {
                "<=" => Relation::Le,
                ">=" => Relation::Ge,
                "=" => Relation::Eq,
                other => return Err(err(ln, format!("unknown relation {other:?}"))),
            };
            let rhs = parse_q(toks[toks.len() - 1]).map_err(|e| err(ln, e.to_string()))?;
            let mut terms = Vec::new();
            for t in &toks[..toks.len() - 2] {
                if *t == "0" {
                    continue;
                }
                let (coef, mask) = t.split_once("·h").ok_or_else(|| err(ln, format!("bad term {t:?}")))?;
                let (neg, mag) = match coef.split_at(1) {
                    ("+", m) => (false, m),
                    ("-", m) => (true, m),
                    _ => return Err(err(ln, format!("term {t:?} lacks a sign"))),
                };
                let mut c = parse_q(mag).map_err(|e| err(ln, e.to_string()))?;
                if neg {
                    c = -c;
                }
                let m: u32 = mask.parse().map_err(|_| err(ln, format!("bad mask in {t:?}")))?;
                if m == 0 || (m as u64) >= (1u64 << n) {
                    return Err(err(ln, format!("mask {m} out of range for n = {n}")));
                }
                terms.push((m, c));
            }
            sys.push(Constraint::new(terms, rel, rhs, prov.trim()));
        }
        Ok(sys)
    }

    /// LP over all `2^n - 1` coordinates; variable `mask - 1` is `h[mask]`.
    pub fn to_lp(&self, objective: &[(u32, Q)], sign: VarSign) -> LpProblem {
        let mut p = LpProblem::new(self.dim(), sign);
        for c in &self.constraints {
            p.push(c.coeffs.iter().map(|(m, q)| (*m as usize - 1, q.clone())).collect(), c.rel, c.rhs.clone());
        }
        p.objective = objective.iter().filter(|(m, _)| *m != 0).map(|(m, q)| (*m as usize - 1, q.clone())).collect();
        p
    }
}

/// Unit-coefficient helper: `+h_a - h_b` style term lists.
pub(crate) fn terms(pos: &[u32], neg: &[u32]) -> Vec<(u32, Q)> {
    pos.iter().map(|&m| (m, Q::one())).chain(neg.iter().map(|&m| (m, -Q::one()))).collect()
}
