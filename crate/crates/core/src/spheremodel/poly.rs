use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{format_rational, Rational};
use crate::integrals::one_row;

/// Polynomial with rational coefficients in a fixed number of variables.
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SparsePolynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl SparsePolynomial {
    pub fn zero(nvars: usize) -> Self {
        SparsePolynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    /// The variable `x_i`, zero-based.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable {i} out of range for {nvars} variables");
        Self::monomial(nvars, Rational::one(), {
            let mut e = vec![0; nvars];
            e[i] = 1;
            e
        })
    }

    pub fn monomial(nvars: usize, c: Rational, exponents: Vec<u32>) -> Self {
        assert_eq!(exponents.len(), nvars);
        let mut p = Self::zero(nvars);
        p.add_term(exponents, c);
        p
    }

    /// Linear form `sum_i c_i x_i`.
    pub fn linear(coeffs: &[Rational]) -> Self {
        let nvars = coeffs.len();
        let mut p = Self::zero(nvars);
        for (i, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; nvars];
            e[i] = 1;
            p.add_term(e, c.clone());
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Rational)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn coefficient(&self, exponents: &[u32]) -> Rational {
        self.terms.get(exponents).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn add_term(&mut self, exponents: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exponents) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Value at a rational point.
    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars);
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(point)
                    .fold(c.clone(), |acc, (&k, x)| acc * num_traits::pow(x.clone(), k as usize))
            })
            .sum()
    }

    /// Average over the unit sphere `S^{dim-1}`, with `dim >= nvars`.
    pub fn sphere_average(&self, dim: u64) -> Result<Rational> {
        if dim < self.nvars as u64 || dim < 2 {
            return Err(Error::Invalid(format!(
                "cannot average {} variables over S^{}",
                self.nvars,
                dim.saturating_sub(1)
            )));
        }
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let a: Vec<u64> = e.iter().map(|&k| k as u64).collect();
            acc += c * sphere_moment(&a, dim)?;
        }
        Ok(acc)
    }
}

/// `E[prod x_i^{a_i}]` over the unit sphere `S^{dim-1}`.
pub fn sphere_moment(a: &[u64], dim: u64) -> Result<Rational> {
    if dim < 2 {
        return Err(Error::Invalid(format!("sphere dimension {dim} is below 2")));
    }
    if a.len() as u64 > dim {
        return Err(Error::SizeMismatch(format!(
            "{} exponents for a sphere in R^{}",
            a.len(),
            dim
        )));
    }
    Ok(one_row(a, dim))
}

fn combine(a: &SparsePolynomial, b: &SparsePolynomial, sign: i64) -> SparsePolynomial {
    assert_eq!(a.nvars, b.nvars, "polynomials in different variable counts");
    let mut out = a.clone();
    for (e, c) in &b.terms {
        out.add_term(e.clone(), c * Rational::from_integer(sign.into()));
    }
    out
}

impl Add for &SparsePolynomial {
    type Output = SparsePolynomial;
    fn add(self, rhs: &SparsePolynomial) -> SparsePolynomial {
        combine(self, rhs, 1)
    }
}

impl Sub for &SparsePolynomial {
    type Output = SparsePolynomial;
    fn sub(self, rhs: &SparsePolynomial) -> SparsePolynomial {
        combine(self, rhs, -1)
    }
}

impl Mul for &SparsePolynomial {
    type Output = SparsePolynomial;
    fn mul(self, rhs: &SparsePolynomial) -> SparsePolynomial {
        assert_eq!(self.nvars, rhs.nvars, "polynomials in different variable counts");
        let mut out = SparsePolynomial::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(x, y)| x + y).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &SparsePolynomial {
    type Output = SparsePolynomial;
    fn neg(self) -> SparsePolynomial {
        self.scale(&-Rational::one())
    }
}

impl Add for SparsePolynomial {
    type Output = SparsePolynomial;
    fn add(self, rhs: SparsePolynomial) -> SparsePolynomial {
        &self + &rhs
    }
}

impl Sub for SparsePolynomial {
    type Output = SparsePolynomial;
    fn sub(self, rhs: SparsePolynomial) -> SparsePolynomial {
        &self - &rhs
    }
}

impl Mul for SparsePolynomial {
    type Output = SparsePolynomial;
    fn mul(self, rhs: SparsePolynomial) -> SparsePolynomial {
        &self * &rhs
    }
}

impl Neg for SparsePolynomial {
    type Output = SparsePolynomial;
    fn neg(self) -> SparsePolynomial {
        -&self
    }
}

const NAMES: [&str; 4] = ["x", "y", "z", "t"];

fn var_name(i: usize, nvars: usize) -> String {
    if nvars <= NAMES.len() {
        NAMES[i].to_string()
    } else {
        format!("x{}", i + 1)
    }
}

/// Terms in descending degree, variables named `x, y, z, t` when there are
/// at most four of them.
impl fmt::Display for SparsePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut terms: Vec<(&Vec<u32>, &Rational)> = self.terms.iter().collect();
        terms.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        for (k, (e, c)) in terms.into_iter().enumerate() {
            let negative = c < &Rational::zero();
            let mag = if negative { -c.clone() } else { c.clone() };
            if k == 0 {
                if negative {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if negative { " - " } else { " + " })?;
            }
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0)
                .map(|(i, &p)| {
                    if p == 1 {
                        var_name(i, self.nvars)
                    } else {
                        format!("{}^{}", var_name(i, self.nvars), p)
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{}", format_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", format_rational(&mag), vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Serialized as `{nvars, terms: [[exponents, "p/q"], ...]}`.
impl Serialize for SparsePolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            nvars: usize,
            terms: Vec<(&'a [u32], String)>,
        }
        Repr {
            nvars: self.nvars,
            terms: self.terms().map(|(e, c)| (e, format_rational(c))).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SparsePolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            nvars: usize,
            terms: Vec<(Vec<u32>, String)>,
        }
        let r = Repr::deserialize(d)?;
        let mut p = SparsePolynomial::zero(r.nvars);
        for (e, c) in r.terms {
            if e.len() != r.nvars {
                return Err(serde::de::Error::custom("exponent vector of wrong length"));
            }
            let c = crate::exactnum::parse_rational(&c).map_err(serde::de::Error::custom)?;
            p.add_term(e, c);
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{rat, ratio};

    #[test]
    fn arithmetic_cancels_to_zero() {
        let x = SparsePolynomial::var(2, 0);
        let y = SparsePolynomial::var(2, 1);
        let lhs = (&x + &y).pow(2);
        let rhs = &(&x.pow(2) + &y.pow(2)) + &(&x * &y).scale(&rat(2));
        assert_eq!(lhs, rhs);
        assert!((&lhs - &rhs).is_zero());
        assert_eq!(lhs.len(), 3);
        assert_eq!(lhs.degree(), 2);
    }

    #[test]
    fn sphere_moments() {
        assert_eq!(sphere_moment(&[4], 4).unwrap(), ratio(1, 8));
        assert_eq!(sphere_moment(&[2, 2], 4).unwrap(), ratio(1, 24));
        assert_eq!(sphere_moment(&[3, 1], 4).unwrap(), rat(0));
        assert_eq!(sphere_moment(&[2], 3).unwrap(), ratio(1, 3));
        assert!(sphere_moment(&[2, 2, 2], 2).is_err());
    }

    #[test]
    fn sphere_average_of_norm_is_one() {
        let vars: Vec<_> = (0..4).map(|i| SparsePolynomial::var(4, i)).collect();
        let norm = vars.iter().fold(SparsePolynomial::zero(4), |acc, v| &acc + &v.pow(2));
        for k in 1..5 {
            assert_eq!(norm.pow(k).sphere_average(4).unwrap(), rat(1));
        }
    }

    #[test]
    fn display_and_serde() {
        let x = SparsePolynomial::var(4, 0);
        let t = SparsePolynomial::var(4, 3);
        let p = &(&x.pow(2) - &t.pow(2)) + &(&x * &t).scale(&ratio(-1, 2));
        assert_eq!(p.to_string(), "x^2 - 1/2*x*t - t^2");
        let json = serde_json::to_string(&p).unwrap();
        let back: SparsePolynomial = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn eval_at_point() {
        let x = SparsePolynomial::var(2, 0);
        let y = SparsePolynomial::var(2, 1);
        let p = &(&x * &y).scale(&rat(3)) - &SparsePolynomial::constant(2, rat(1));
        assert_eq!(p.eval(&[rat(2), ratio(1, 2)]), rat(2));
    }
}
