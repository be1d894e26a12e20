//! Exact rational helpers shared by the optimization side.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"`, an integer, or a finite decimal such as `"-0.125"`.
pub fn parse_rational(text: &str) -> Result<Q> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational literal".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = den.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Q::new(n, d));
    }
    let (neg, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    let digits_ok = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
    if (int_part.is_empty() && frac_part.is_empty()) || !digits_ok(int_part) || !digits_ok(frac_part) {
        return Err(Error::Parse(format!("not a rational literal: {s:?}")));
    }
    let joined = format!("{}{}", if int_part.is_empty() { "0" } else { int_part }, frac_part);
    let n: BigInt = joined.parse().map_err(|_| Error::Parse(format!("not a rational literal: {s:?}")))?;
    let d = num_traits::pow(BigInt::from(10), frac_part.len());
    let v = Q::new(n, d);
    Ok(if neg { -v } else { v })
}

/// Canonical text form: `"p/q"`, or `"p"` when integral.
pub fn format_rational(v: &Q) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub fn to_f64(v: &Q) -> f64 {
    v.to_f64().unwrap_or_else(|| if v.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// `base^exp` for a non-negative integer exponent.
pub fn pow(base: &Q, exp: usize) -> Q {
    let mut out = Q::one();
    for _ in 0..exp {
        out *= base;
    }
    out
}

/// Exact `n`-th root: `Some(r)` with `r^n == v` when such a rational exists.
pub fn exact_root(v: &Q, n: u32) -> Option<Q> {
    if n == 0 || (v.is_negative() && n.is_multiple_of(2)) {
        return None;
    }
    let num = v.numer().nth_root(n);
    let den = v.denom().nth_root(n);
    (num.pow(n) == *v.numer() && den.pow(n) == *v.denom()).then(|| Q::new(num, den))
}

/// Max-plus scalar: a rational or minus infinity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum MaxPlus {
    NegInf,
    Finite(Q),
}

impl MaxPlus {
    pub fn finite(&self) -> Option<&Q> {
        match self {
            MaxPlus::Finite(v) => Some(v),
            MaxPlus::NegInf => None,
        }
    }

    pub fn plus(&self, w: &Q) -> MaxPlus {
        match self {
            MaxPlus::Finite(v) => MaxPlus::Finite(v + w),
            MaxPlus::NegInf => MaxPlus::NegInf,
        }
    }

    pub fn times(&self, other: &MaxPlus) -> MaxPlus {
        match (self, other) {
            (MaxPlus::Finite(a), MaxPlus::Finite(b)) => MaxPlus::Finite(a + b),
            _ => MaxPlus::NegInf,
        }
    }
}
