//! Exact rational arithmetic, the shifted double factorial and bracket quotients.
//!
//! The double factorial used throughout this crate is the *shifted* one:
//! `dfact(m) = (m-1)(m-3)(m-5)...`, the product stopping at 1 or 2, with the
//! empty product equal to 1. In standard notation `dfact(m) = (m-1)!!`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact arbitrary-precision rational, always in lowest terms with a positive denominator.
pub type Rational = BigRational;

pub fn rat(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int_to_rat(v: BigInt) -> Rational {
    Rational::from_integer(v)
}

/// Shifted double factorial `(m-1)(m-3)...`, stopping at 1 or 2.
pub fn dfact(m: u64) -> BigInt {
    let mut acc = BigInt::one();
    let mut f = m.saturating_sub(1);
    while f >= 2 {
        acc *= f;
        f -= 2;
    }
    acc
}

/// `dfact` on a signed argument; negative arguments are a domain error.
pub fn dfact_signed(m: i64, n: i64) -> Result<BigInt> {
    if m < 0 {
        return Err(Error::Domain { argument: m, n });
    }
    Ok(dfact(m as u64))
}

pub fn factorial(m: u64) -> BigInt {
    (2..=m).fold(BigInt::one(), |acc, f| acc * f)
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Prints `p/q`, or `p` when the denominator is 1.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let parse_int = |t: &str| {
        BigInt::from_str(t.trim()).map_err(|_| Error::Parse(format!("not a rational: {s:?}")))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let q = parse_int(q)?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(parse_int(p)?, q))
        }
        None => Ok(Rational::from_integer(parse_int(s)?)),
    }
}

pub fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

/// Serde adapter storing a [`Rational`] as its `p/q` string.
pub mod rational_string {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter storing a [`BigInt`] as its decimal string.
pub mod bigint_string {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        BigInt::from_str(&s).map_err(serde::de::Error::custom)
    }
}

/// Quotient of shifted double factorials
/// `[a_1..a_k / b_1..b_s]_n = prod dfact(a_i+n-2) / prod dfact(b_i+n-2)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BracketSpec {
    pub numerators: Vec<u64>,
    pub denominators: Vec<u64>,
}

impl BracketSpec {
    pub fn new(numerators: Vec<u64>, denominators: Vec<u64>) -> Self {
        BracketSpec {
            numerators,
            denominators,
        }
    }

    /// Equal term counts and equal sums.
    pub fn is_balanced(&self) -> bool {
        self.numerators.len() == self.denominators.len()
            && self.numerators.iter().sum::<u64>() == self.denominators.iter().sum::<u64>()
    }

    /// Multiset union of numerators and of denominators.
    pub fn union(&self, other: &BracketSpec) -> BracketSpec {
        let mut out = self.clone();
        out.numerators.extend_from_slice(&other.numerators);
        out.denominators.extend_from_slice(&other.denominators);
        out
    }

    /// Removes terms common to both sides. The value at every n is unchanged.
    pub fn reduced(&self) -> BracketSpec {
        let mut num = self.numerators.clone();
        let mut den = self.denominators.clone();
        num.sort_unstable();
        den.sort_unstable();
        let (mut i, mut j) = (0, 0);
        let (mut keep_num, mut keep_den) = (Vec::new(), Vec::new());
        while i < num.len() && j < den.len() {
            match num[i].cmp(&den[j]) {
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
                std::cmp::Ordering::Less => {
                    keep_num.push(num[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    keep_den.push(den[j]);
                    j += 1;
                }
            }
        }
        keep_num.extend_from_slice(&num[i..]);
        keep_den.extend_from_slice(&den[j..]);
        BracketSpec::new(keep_num, keep_den)
    }

    pub fn eval(&self, n: i64) -> Result<Rational> {
        let mut num = BigInt::one();
        for &a in &self.numerators {
            num *= dfact_signed(a as i64 + n - 2, n)?;
        }
        let mut den = BigInt::one();
        for &b in &self.denominators {
            den *= dfact_signed(b as i64 + n - 2, n)?;
        }
        Ok(Rational::new(num, den))
    }
}

impl fmt::Display for BracketSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(
            f,
            "[{} / {}]",
            join(&self.numerators),
            join(&self.denominators)
        )
    }
}

/// Shorthand for building a bracket from slices.
pub fn bracket(numerators: &[u64], denominators: &[u64]) -> BracketSpec {
    BracketSpec::new(numerators.to_vec(), denominators.to_vec())
}

pub fn bracket_eval(b: &BracketSpec, n: i64) -> Result<Rational> {
    b.eval(n)
}
