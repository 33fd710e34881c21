//! Exact rational helpers shared by every module.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Q = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed rational {text:?}: {reason}")]
pub struct RationalParseError {
    pub text: String,
    pub reason: &'static str,
}

/// Parses `"p/q"` or an integer string. Surrounding whitespace is ignored.
pub fn parse_q(text: &str) -> Result<Q, RationalParseError> {
    let t = text.trim();
    let bad = |reason| RationalParseError { text: text.to_string(), reason };
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad("numerator is not an integer"))?;
    let den: BigInt = den.parse().map_err(|_| bad("denominator is not an integer"))?;
    if den.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(Q::new(num, den))
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise (lowest terms, q > 0).
pub fn fmt_q(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // numerator and denominator too large for a direct conversion
        let shift = x.denom().bits().max(x.numer().bits()) as i64 - 60;
        let n = (x.numer() >> shift.max(0) as usize).to_f64().unwrap_or(0.0);
        let d = (x.denom() >> shift.max(0) as usize).to_f64().unwrap_or(1.0);
        n / d
    })
}

/// Exact binary expansion of a finite double.
pub fn from_f64(x: f64) -> Q {
    Q::from_float(x).unwrap_or_else(Q::zero)
}

/// `Some(k)` when `x == 2^k` for an integer `k`.
pub fn log2_exact(x: &Q) -> Option<i64> {
    if !x.is_positive() {
        return None;
    }
    let pow2 = |b: &BigInt| -> Option<i64> {
        let bits = b.bits();
        (bits > 0 && b.is_positive() && (b.clone() & (b - BigInt::one())).is_zero()).then(|| bits as i64 - 1)
    };
    Some(pow2(x.numer())? - pow2(x.denom())?)
}

pub fn log2_f64(x: &Q) -> f64 {
    match log2_exact(x) {
        Some(k) => k as f64,
        None => {
            let n = x.numer().bits() as f64;
            let d = x.denom().bits() as f64;
            if n < 1000.0 && d < 1000.0 {
                to_f64(x).log2()
            } else {
                // large operands: split off powers of two before converting
                let sn = x.numer().bits().saturating_sub(60) as usize;
                let sd = x.denom().bits().saturating_sub(60) as usize;
                let nf = (x.numer() >> sn).to_f64().unwrap();
                let df = (x.denom() >> sd).to_f64().unwrap();
                nf.log2() - df.log2() + sn as f64 - sd as f64
            }
        }
    }
}

pub fn floor_q(x: &Q) -> BigInt {
    x.floor().to_integer()
}

pub fn ceil_q(x: &Q) -> BigInt {
    x.ceil().to_integer()
}

pub fn pow2(k: u32) -> Q {
    Q::from_integer(BigInt::one() << k as usize)
}

pub fn lcm_denoms<'a>(xs: impl IntoIterator<Item = &'a Q>) -> BigInt {
    xs.into_iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

pub fn serialize_q<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_q(x))
}

pub fn deserialize_q<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
    let s = String::deserialize(d)?;
    parse_q(&s).map_err(serde::de::Error::custom)
}

pub fn serialize_q_vec<S: Serializer>(xs: &[Q], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(fmt_q))
}

pub fn deserialize_q_vec<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
    let v = Vec::<String>::deserialize(d)?;
    v.iter().map(|s| parse_q(s).map_err(serde::de::Error::custom)).collect()
}

/// A quantity in bits that is exact when the arithmetic allows it.
#[derive(Debug, Clone, PartialEq)]
pub struct Bits {
    pub exact: Option<Q>,
    pub approx: f64,
}

impl Bits {
    pub fn exact(x: Q) -> Self {
        let approx = to_f64(&x);
        Bits { exact: Some(x), approx }
    }

    pub fn approx(x: f64) -> Self {
        Bits { exact: None, approx: x }
    }

    pub fn zero() -> Self {
        Bits::exact(Q::zero())
    }

    pub fn is_exactly_zero(&self) -> bool {
        self.exact.as_ref().is_some_and(Zero::is_zero)
    }

    pub fn add(&self, other: &Bits) -> Bits {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Bits::exact(a + b),
            _ => Bits::approx(self.approx + other.approx),
        }
    }

    pub fn sub(&self, other: &Bits) -> Bits {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Bits::exact(a - b),
            _ => Bits::approx(self.approx - other.approx),
        }
    }

    pub fn scale(&self, k: &Q) -> Bits {
        match &self.exact {
            Some(a) => Bits::exact(a * k),
            None => Bits::approx(self.approx * to_f64(k)),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match &self.exact {
            Some(x) => serde_json::json!({ "exact": fmt_q(x) }),
            None => serde_json::json!({ "approx": true, "value": self.approx, "tol": crate::FLOAT_TOL }),
        }
    }
}

/// Serializes a double-precision field in the tagged form used for every inexact value.
pub fn serialize_approx<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    Bits::approx(*x).to_json().serialize(s)
}

/// Shannon entropy in bits of a distribution given as nonnegative integer weights.
/// Exact whenever every nonzero weight is a power-of-two fraction of the total.
pub fn entropy_of_counts<'a>(counts: impl IntoIterator<Item = &'a BigInt> + Clone) -> Bits {
    let total: BigInt = counts.clone().into_iter().sum();
    if total.is_zero() {
        return Bits::zero();
    }
    let mut exact = Some(Q::zero());
    let mut approx = 0.0;
    let tot_f = total.to_f64().unwrap_or(f64::INFINITY);
    for c in counts {
        if c.is_zero() {
            continue;
        }
        let p = Q::new(c.clone(), total.clone());
        match (exact.as_mut(), log2_exact(&p)) {
            (Some(acc), Some(k)) => *acc -= &p * q(k),
            _ => exact = None,
        }
        let pf = c.to_f64().unwrap_or(0.0) / tot_f;
        approx -= pf * pf.log2();
    }
    match exact {
        Some(x) => Bits::exact(x),
        None => Bits::approx(approx),
    }
}

/// Entropy in bits of a rational pmf (zero entries ignored).
pub fn entropy_of_pmf(p: &[Q]) -> Bits {
    let mut exact = Some(Q::zero());
    let mut approx = 0.0;
    for x in p.iter().filter(|x| !x.is_zero()) {
        match (exact.as_mut(), log2_exact(x)) {
            (Some(acc), Some(k)) => *acc -= x * q(k),
            _ => exact = None,
        }
        let pf = to_f64(x);
        approx -= pf * pf.log2();
    }
    match exact {
        Some(x) => Bits::exact(x),
        None => Bits::approx(approx),
    }
}

pub fn abs_q(x: &Q) -> Q {
    x.abs()
}
