//! Three-row matrices: the `J_c(x, y)` recurrence, the diagonal moments of
//! `u_11, u_22, u_33` and the integrality checker.
//!
//! Everything here needs `n >= 3`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{binomial, bracket, dfact, factorial, is_integer, rat, Rational};
use crate::integrals::sign_pow;
use crate::matrix::ExponentMatrix;

/// The matrix `[[a,0,0],[0,b,0],[x,y,c]]` at dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ThreeRowConfig {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub x: u64,
    pub y: u64,
    pub n: u64,
}

impl ThreeRowConfig {
    pub fn new(a: u64, b: u64, c: u64, x: u64, y: u64, n: u64) -> Self {
        ThreeRowConfig { a, b, c, x, y, n }
    }

    pub fn diagonal(a: u64, b: u64, c: u64, n: u64) -> Self {
        Self::new(a, b, c, 0, 0, n)
    }

    /// `L = a + b + c + x + y`.
    pub fn l(&self) -> u64 {
        self.a + self.b + self.c + self.x + self.y
    }

    pub fn matrix(&self) -> ExponentMatrix {
        ExponentMatrix::new(&[[self.a, 0, 0], [0, self.b, 0], [self.x, self.y, self.c]])
    }

    fn is_admissible(&self) -> bool {
        [self.a, self.b, self.c, self.x, self.y].iter().all(|v| v % 2 == 0)
    }

    fn check_n(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::Invalid(format!(
                "three-row formulas need n >= 3, got {}",
                self.n
            )));
        }
        Ok(())
    }
}

/// `J_0(x, y)`, a transposed spark.
fn initial(a: u64, b: u64, x: u64, y: u64, n: u64) -> Result<Rational> {
    bracket(&[0, a + b + x, a + b + y], &[a + b, a + x, b + y]).eval(n as i64)
}

/// `J` of `cfg.matrix()` by the recurrence in `c`, memoized on `(c, x, y)`.
pub fn j3_recurrence(cfg: ThreeRowConfig) -> Result<Rational> {
    cfg.check_n()?;
    if !cfg.is_admissible() {
        return Ok(rat(0));
    }
    let mut memo: HashMap<(u64, u64, u64), Rational> = HashMap::new();
    recur(&cfg, cfg.c, cfg.x, cfg.y, &mut memo)
}

fn recur(
    cfg: &ThreeRowConfig,
    c: u64,
    x: u64,
    y: u64,
    memo: &mut HashMap<(u64, u64, u64), Rational>,
) -> Result<Rational> {
    if let Some(v) = memo.get(&(c, x, y)) {
        return Ok(v.clone());
    }
    let (a, b, n) = (cfg.a, cfg.b, cfg.n);
    let v = if c == 0 {
        initial(a, b, x, y, n)?
    } else {
        let c0 = c - 2;
        let l = a + b + c0 + x + y;
        let here = recur(cfg, c0, x, y, memo)?;
        let right = recur(cfg, c0, x + 2, y, memo)?;
        let down = recur(cfg, c0, x, y + 2, memo)?;
        (rat((l + n) as i64) * here - rat(x as i64 + 1) * right - rat(y as i64 + 1) * down)
            / rat((c0 + n - 2) as i64)
    };
    memo.insert((c, x, y), v.clone());
    Ok(v)
}

/// The explicit double sum solving the recurrence.
pub fn j3_closed(cfg: ThreeRowConfig) -> Result<Rational> {
    cfg.check_n()?;
    if !cfg.is_admissible() {
        return Ok(rat(0));
    }
    let ThreeRowConfig { a, b, c, x, y, n } = cfg;
    let n = n as i64;
    let l = cfg.l();
    let half = c / 2;
    let lead = bracket(&[0], &[c]).eval(n - 1)?;
    let mut total = Rational::zero();
    for k in 0..=half {
        let outer = sign_pow(2 * k) * Rational::from_integer(binomial(half, k));
        let shift = bracket(&[l], &[l - c + 2 * k]).eval(n + 1)?;
        let mut inner = Rational::zero();
        for r in 0..=k {
            let s = k - r;
            let coeff = Rational::from_integer(binomial(k, r))
                * Rational::new(dfact(x + 2 * r), dfact(x))
                * Rational::new(dfact(y + 2 * s), dfact(y));
            let spark = bracket(
                &[0, a + b + x + 2 * r, a + b + y + 2 * s],
                &[a + b, a + x + 2 * r, b + y + 2 * s],
            )
            .eval(n)?;
            inner += coeff * spark;
        }
        total += outer * shift * inner;
    }
    Ok(lead * total)
}

/// `J(diag(a, b, c))` by the single-sum specialization with
/// coefficients `k!/2^k C(2r,r) C(2s,s)`.
pub fn diagonal_moments(a: u64, b: u64, c: u64, n: u64) -> Result<Rational> {
    let cfg = ThreeRowConfig::diagonal(a, b, c, n);
    cfg.check_n()?;
    if !cfg.is_admissible() {
        return Ok(rat(0));
    }
    let n = n as i64;
    let half = c / 2;
    let lead = bracket(&[0], &[c]).eval(n - 1)?;
    let mut total = Rational::zero();
    for k in 0..=half {
        let outer = sign_pow(2 * k)
            * Rational::from_integer(binomial(half, k))
            * Rational::new(factorial(k), BigInt::from(2u32).pow(k as u32));
        let shift = bracket(&[a + b + c], &[a + b + 2 * k]).eval(n + 1)?;
        let mut inner = Rational::zero();
        for r in 0..=k {
            let s = k - r;
            let coeff = Rational::from_integer(binomial(2 * r, r) * binomial(2 * s, s));
            let spark = bracket(
                &[0, a + b + 2 * r, a + b + 2 * s],
                &[a + b, a + 2 * r, b + 2 * s],
            )
            .eval(n)?;
            inner += coeff * spark;
        }
        total += outer * shift * inner;
    }
    Ok(lead * total)
}

/// Right side of `J(diag(a,b,2)) = [0, a+b / a+2, b+2] (1 + (a+b+n)(a+n-2)(b+n-2)/(n-2))`.
pub fn diag_ab2_value(a: u64, b: u64, n: u64) -> Result<Rational> {
    if n < 3 {
        return Err(Error::Invalid("needs n >= 3".into()));
    }
    let (ai, bi, ni) = (a as i64, b as i64, n as i64);
    let br = bracket(&[0, a + b], &[a + 2, b + 2]).eval(ni)?;
    let tail = rat(1) + Rational::new(
        BigInt::from((ai + bi + ni) * (ai + ni - 2) * (bi + ni - 2)),
        BigInt::from(ni - 2),
    );
    Ok(br * tail)
}

pub fn diag_ab2_check(a: u64, b: u64, n: u64) -> Result<bool> {
    if !a.is_multiple_of(2) || !b.is_multiple_of(2) {
        return Ok(diagonal_moments(a, b, 2, n)?.is_zero());
    }
    Ok(diagonal_moments(a, b, 2, n)? == diag_ab2_value(a, b, n)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjectureReport {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub n: u64,
    #[serde(with = "crate::exactnum::rational_string")]
    pub value: Rational,
    pub is_integer: bool,
}

/// `[c / 0]_{n-1} [b+c / 0]_n J(diag(a,b,c))` and whether it is an integer.
pub fn scaled_diagonal(a: u64, b: u64, c: u64, n: u64) -> Result<ConjectureReport> {
    if !(a >= b && b >= c) {
        return Err(Error::Invalid(format!("need a >= b >= c, got ({a},{b},{c})")));
    }
    let ni = n as i64;
    let value = bracket(&[c], &[0]).eval(ni - 1)?
        * bracket(&[b + c], &[0]).eval(ni)?
        * diagonal_moments(a, b, c, n)?;
    Ok(ConjectureReport {
        a,
        b,
        c,
        n,
        is_integer: is_integer(&value),
        value,
    })
}

/// Finds `[[a,0,0],[0,b,0],[x,y,c]]` among row/column permutations and the
/// transpose of a 3x3 matrix.
pub fn match_config(m: &ExponentMatrix, n: u64) -> Option<ThreeRowConfig> {
    if m.rows() != 3 || m.cols() != 3 {
        return None;
    }
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut best: Option<ThreeRowConfig> = None;
    for base in [m.clone(), m.transpose()] {
        for rp in PERMS {
            let rows = base.permute_rows(&rp);
            for cp in PERMS {
                let t = rows.permute_cols(&cp);
                if t.get(0, 1) == 0 && t.get(0, 2) == 0 && t.get(1, 0) == 0 && t.get(1, 2) == 0 {
                    let cfg = ThreeRowConfig::new(
                        t.get(0, 0),
                        t.get(1, 1),
                        t.get(2, 2),
                        t.get(2, 0),
                        t.get(2, 1),
                        n,
                    );
                    if best.is_none_or(|b| cfg.c < b.c) {
                        best = Some(cfg);
                    }
                }
            }
        }
    }
    best
}

/// `J` by the closed three-row formula when `m` has the required shape.
pub fn closed_j(m: &ExponentMatrix, n: u64) -> Result<Option<Rational>> {
    if n < 3 {
        return Ok(None);
    }
    match match_config(m, n) {
        Some(cfg) => Ok(Some(j3_closed(cfg)?)),
        None => Ok(None),
    }
}

/// Number of pairings of `a + b + c` points with `r` mixed a-b pairs,
/// `s` mixed a-c pairs and `t` mixed b-c pairs.
pub fn k_rst(a: u64, b: u64, c: u64, r: u64, s: u64, t: u64) -> Option<BigInt> {
    if r + s > a || r + t > b || s + t > c {
        return None;
    }
    let (da, db, dc) = (a - r - s, b - r - t, c - s - t);
    if da % 2 != 0 || db % 2 != 0 || dc % 2 != 0 {
        return None;
    }
    let num = factorial(a) * factorial(b) * factorial(c) * dfact(da) * dfact(db) * dfact(dc);
    let den = factorial(r)
        * factorial(s)
        * factorial(t)
        * factorial(da)
        * factorial(db)
        * factorial(dc);
    Some(num / den)
}

/// One term of the three-row expansion: per-column `(r_j, s_j, t_j)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreeRowTerm {
    pub rst: Vec<(u64, u64, u64)>,
    #[serde(with = "crate::exactnum::rational_string")]
    pub coefficient: Rational,
    pub matrix: ExponentMatrix,
}

/// `J(a; b; c) = sum K'_rst J(E)` where `E` carries `1^R, 1^S, 0^T` and so on.
pub fn three_row_expansion(m: &ExponentMatrix) -> Result<Vec<ThreeRowTerm>> {
    if m.rows() != 3 {
        return Err(Error::SizeMismatch("three-row expansion needs 3 rows".into()));
    }
    let per_col: Vec<Vec<((u64, u64, u64), BigInt)>> = (0..m.cols())
        .map(|j| {
            let (a, b, c) = (m.get(0, j), m.get(1, j), m.get(2, j));
            let mut out = Vec::new();
            for r in 0..=a.min(b) {
                for s in 0..=a.min(c) {
                    for t in 0..=b.min(c) {
                        if let Some(k) = k_rst(a, b, c, r, s, t) {
                            out.push(((r, s, t), k));
                        }
                    }
                }
            }
            out
        })
        .collect();
    let norm: BigInt = m.entries().iter().map(|&x| dfact(x)).product();
    let sums = m.row_sums();
    let mut terms: Vec<(Vec<(u64, u64, u64)>, BigInt)> = vec![(vec![], BigInt::from(1))];
    for choices in per_col {
        let mut next = Vec::new();
        for (prefix, k) in &terms {
            for (rst, kc) in &choices {
                let mut p = prefix.clone();
                p.push(*rst);
                next.push((p, k * kc));
            }
        }
        terms = next;
    }
    Ok(terms
        .into_iter()
        .map(|(rst, k)| {
            let big_r: u64 = rst.iter().map(|v| v.0).sum();
            let big_s: u64 = rst.iter().map(|v| v.1).sum();
            let big_t: u64 = rst.iter().map(|v| v.2).sum();
            let width = (big_r + big_s + big_t + 3) as usize;
            let mut e = ExponentMatrix::zeros(3, width);
            let mut col = 0;
            for _ in 0..big_r {
                e.set(0, col, 1);
                e.set(1, col, 1);
                col += 1;
            }
            for _ in 0..big_s {
                e.set(0, col, 1);
                e.set(2, col, 1);
                col += 1;
            }
            for _ in 0..big_t {
                e.set(1, col, 1);
                e.set(2, col, 1);
                col += 1;
            }
            e.set(0, col, sums[0] - big_r - big_s);
            e.set(1, col + 1, sums[1] - big_r - big_t);
            e.set(2, col + 2, sums[2] - big_s - big_t);
            ThreeRowTerm {
                rst,
                coefficient: Rational::new(k, norm.clone()),
                matrix: e,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::ratio;
    use crate::integrals::{cross_j, j_value, Method};
    use crate::pairings::{count_of_type, TypeMatrix};

    #[test]
    fn recurrence_examples() {
        assert_eq!(j3_recurrence(ThreeRowConfig::new(0, 0, 0, 0, 0, 5)).unwrap(), rat(1));
        for n in 3..=8 {
            let v = j3_recurrence(ThreeRowConfig::diagonal(2, 0, 2, n)).unwrap();
            assert_eq!(v, ratio(n as i64 + 1, n as i64 - 1));
        }
        assert_eq!(j3_recurrence(ThreeRowConfig::diagonal(2, 2, 2, 3)).unwrap(), rat(8));
        assert_eq!(j3_recurrence(ThreeRowConfig::diagonal(2, 1, 2, 3)).unwrap(), rat(0));
        assert!(j3_recurrence(ThreeRowConfig::diagonal(2, 2, 2, 2)).is_err());
    }

    #[test]
    fn closed_matches_recurrence() {
        let vals = [0u64, 2, 4];
        for &a in &vals {
            for &b in &vals {
                for &c in &vals {
                    for &x in &vals {
                        for &y in &vals {
                            for n in 3..=8 {
                                let cfg = ThreeRowConfig::new(a, b, c, x, y, n);
                                assert_eq!(j3_recurrence(cfg).unwrap(), j3_closed(cfg).unwrap(), "{cfg:?}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn diagonal_examples() {
        assert_eq!(diagonal_moments(2, 0, 2, 3).unwrap(), rat(2));
        assert_eq!(diagonal_moments(2, 2, 2, 3).unwrap(), rat(8));
        for c in [0, 2, 4, 6] {
            assert_eq!(diagonal_moments(0, 0, c, 5).unwrap(), rat(1));
        }
    }

    #[test]
    fn diagonal_symmetric() {
        for a in (0..=6).step_by(2) {
            for b in (0..=6).step_by(2) {
                for c in (0..=6).step_by(2) {
                    for n in 3..=8 {
                        let v = diagonal_moments(a, b, c, n).unwrap();
                        assert_eq!(v, diagonal_moments(b, c, a, n).unwrap());
                        assert_eq!(v, diagonal_moments(c, a, b, n).unwrap());
                        assert_eq!(v, diagonal_moments(b, a, c, n).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn diagonal_matches_weingarten() {
        for (a, b, c) in [(2, 2, 2), (2, 0, 2), (4, 2, 2)] {
            for n in 4..=7 {
                let m = ExponentMatrix::new(&[[a, 0, 0], [0, b, 0], [0, 0, c]]);
                if a + b + c > 8 {
                    continue;
                }
                assert_eq!(
                    diagonal_moments(a, b, c, n).unwrap(),
                    j_value(&m, n, Method::Weingarten).unwrap()
                );
            }
        }
    }

    #[test]
    fn diag_ab2_identity() {
        assert!(diag_ab2_check(0, 0, 5).unwrap());
        assert_eq!(diag_ab2_value(2, 0, 3).unwrap(), rat(2));
        for a in 0..=6 {
            for b in 0..=6 {
                for n in 3..=10 {
                    assert!(diag_ab2_check(a, b, n).unwrap(), "a={a} b={b} n={n}");
                }
            }
        }
    }

    #[test]
    fn conjecture_examples() {
        let r = scaled_diagonal(2, 2, 2, 3).unwrap();
        assert_eq!(r.value, rat(64));
        assert!(r.is_integer);
        for n in 3..=8 {
            assert_eq!(scaled_diagonal(2, 2, 0, n).unwrap().value, rat(n as i64 + 1));
        }
        assert_eq!(scaled_diagonal(0, 0, 0, 4).unwrap().value, rat(1));
        assert!(scaled_diagonal(0, 2, 0, 4).is_err());
    }

    #[test]
    fn no_three_by_three_flipping() {
        let diag = diagonal_moments(2, 2, 2, 5).unwrap();
        let flipped = cross_j(0, 2, &[2, 2], 5).unwrap();
        assert_ne!(diag, flipped);
    }

    #[test]
    fn shape_matching() {
        let m = ExponentMatrix::new(&[[2, 0, 4], [0, 2, 0], [0, 0, 2]]);
        let cfg = match_config(&m, 5).unwrap();
        assert_eq!(j3_closed(cfg).unwrap(), j_value(&m, 5, Method::Weingarten).unwrap());
        assert!(match_config(&ExponentMatrix::new(&[[1, 1, 0], [1, 0, 1], [0, 1, 1]]), 5).is_none());
    }

    #[test]
    fn k_rst_counts_pairings() {
        for (a, b, c) in [(3u64, 5u64, 4u64), (2, 2, 2), (1, 1, 2), (4, 2, 2)] {
            for r in 0..=4 {
                for s in 0..=4 {
                    for t in 0..=4 {
                        let Some(k) = k_rst(a, b, c, r, s, t) else { continue };
                        let tm = TypeMatrix {
                            entries: vec![
                                vec![a - r - s, r, s],
                                vec![r, b - r - t, t],
                                vec![s, t, c - s - t],
                            ],
                        };
                        assert_eq!(k, count_of_type(&tm, &[a, b, c]).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn three_row_expansion_identity() {
        let m = ExponentMatrix::new(&[[2, 1], [1, 1], [1, 0]]);
        for n in 5..=6 {
            let mut acc = Rational::zero();
            for t in three_row_expansion(&m).unwrap() {
                acc += &t.coefficient * j_value(&t.matrix, n, Method::Weingarten).unwrap();
            }
            assert_eq!(acc, j_value(&m, n, Method::Weingarten).unwrap());
        }
    }
}
