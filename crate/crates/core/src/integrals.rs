//! The normalized integral `J(a)` and its closed forms.
//!
//! `I(a) = dfact(n-1) prod dfact(a_ij) / dfact(sum a + n - 1) * J(a)`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{bracket, dfact, rat, Rational};
use crate::matrix::ExponentMatrix;
use crate::pairings::{
    enumerate_type_assignments, kprime, kprime_two_row, two_row_types, TypeAssignment,
};
use crate::threerow;
use crate::weingarten;

/// A sign in `{-1, 0, +1}` produced by one of the parity rules below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParitySign {
    Negative,
    Zero,
    Positive,
}

impl ParitySign {
    pub fn value(self) -> i64 {
        match self {
            ParitySign::Negative => -1,
            ParitySign::Zero => 0,
            ParitySign::Positive => 1,
        }
    }

    pub fn to_rational(self) -> Rational {
        rat(self.value())
    }

    /// `+1` when every entry is even, `0` otherwise. Used by the one-row,
    /// cross, spark and asymptotic formulas.
    pub fn all_even(entries: &[u64]) -> Self {
        if entries.iter().all(|x| x % 2 == 0) {
            ParitySign::Positive
        } else {
            ParitySign::Zero
        }
    }

    /// The `n = 2` rule: `+1` all even, `-1` all odd, `0` mixed.
    pub fn circle(entries: &[u64]) -> Self {
        if entries.iter().all(|x| x % 2 == 0) {
            ParitySign::Positive
        } else if entries.iter().all(|x| x % 2 == 1) {
            ParitySign::Negative
        } else {
            ParitySign::Zero
        }
    }
}

impl fmt::Display for ParitySign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// An exponent matrix whose every column sums to 2.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ElementaryMatrix(ExponentMatrix);

impl ElementaryMatrix {
    pub fn new(m: ExponentMatrix) -> Result<Self> {
        if m.col_sums().iter().any(|&s| s != 2) {
            return Err(Error::Invalid(format!("{m} is not elementary")));
        }
        Ok(ElementaryMatrix(m))
    }

    pub fn matrix(&self) -> &ExponentMatrix {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Auto,
    Weingarten,
    TwoRow,
    ClosedForm,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Method::Auto),
            "weingarten" => Ok(Method::Weingarten),
            "two-row" | "two_row" => Ok(Method::TwoRow),
            "closed-form" | "closed_form" => Ok(Method::ClosedForm),
            _ => Err(Error::Parse(format!("unknown method {s:?}"))),
        }
    }
}

/// The path `j_value` took, reported by `--trace` and tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    NotAdmissible,
    Empty,
    OneRow,
    Circle,
    Cross,
    Spark,
    ThreeRow,
    TwoRow,
    Weingarten,
}

/// `dfact(n-1) prod dfact(a_ij) / dfact(sum a + n - 1)`, so that `I = factor * J`.
pub fn normalization_factor(a: &ExponentMatrix, n: u64) -> Rational {
    let num: BigInt = dfact(n.saturating_sub(1)) * a.entries().iter().map(|&x| dfact(x)).product::<BigInt>();
    Rational::new(num, dfact(a.total() + n - 1))
}

pub fn j_from_i(a: &ExponentMatrix, n: u64, i: &Rational) -> Rational {
    i / normalization_factor(a, n)
}

pub fn i_from_j(a: &ExponentMatrix, n: u64, j: &Rational) -> Rational {
    j * normalization_factor(a, n)
}

/// `I(a)` over `O_n` from a Haar integral of monomials on the sphere
/// `S^{n-1}`: `eps * dfact(n-1) prod dfact(a_i) / dfact(sum a + n - 1)`.
pub fn one_row(a: &[u64], n: u64) -> Rational {
    let eps = ParitySign::all_even(a);
    if eps == ParitySign::Zero {
        return rat(0);
    }
    normalization_factor(&ExponentMatrix::row_vector(a), n)
}

/// `I([[a, c], [b, d]])` over `O_2`.
pub fn n2_closed(a: u64, b: u64, c: u64, d: u64) -> Rational {
    let eps = ParitySign::circle(&[a, b, c, d]);
    if eps == ParitySign::Zero {
        return rat(0);
    }
    eps.to_rational() * Rational::new(dfact(a + d) * dfact(b + c), dfact(a + b + c + d + 1))
}

/// `J` at `n = 2` in bracket form: `eps [0, 0, a+d, b+c / a, b, c, d]_2`.
pub fn n2_j_form(a: u64, b: u64, c: u64, d: u64) -> Rational {
    let eps = ParitySign::circle(&[a, b, c, d]);
    if eps == ParitySign::Zero {
        return rat(0);
    }
    eps.to_rational()
        * bracket(&[0, 0, a + d, b + c], &[a, b, c, d])
            .eval(2)
            .expect("n = 2 keeps every argument non-negative")
}

/// `J(^a_b ^c_0) = eps [0, b + C / b, C]` with `C = sum c`.
pub fn cross_j(a: u64, b: u64, c: &[u64], n: u64) -> Result<Rational> {
    let mut entries = vec![a, b];
    entries.extend_from_slice(c);
    if ParitySign::all_even(&entries) == ParitySign::Zero {
        return Ok(rat(0));
    }
    let cs: u64 = c.iter().sum();
    bracket(&[0, b + cs], &[b, cs]).eval(n as i64)
}

/// Cross shape: every nonzero entry in row `i` or column `j`. `B` and `C`
/// are the column and row sums without the centre.
pub fn cross_center(a: &ExponentMatrix) -> Option<(usize, usize)> {
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let off = (0..a.rows())
                .flat_map(|r| (0..a.cols()).map(move |c| (r, c)))
                .any(|(r, c)| r != i && c != j && a.get(r, c) != 0);
            if !off {
                return Some((i, j));
            }
        }
    }
    None
}

pub fn cross_j_matrix(a: &ExponentMatrix, n: u64) -> Result<Rational> {
    let (i, j) = cross_center(a).ok_or(Error::NoClosedForm)?;
    if ParitySign::all_even(a.entries()) == ParitySign::Zero {
        return Ok(rat(0));
    }
    let b = a.col_sums()[j] - a.get(i, j);
    let c = a.row_sums()[i] - a.get(i, j);
    bracket(&[0, b + c], &[b, c]).eval(n as i64)
}

/// `J(^x_y ^a_0 ^0_b) = eps [0, a+b+x, a+b+y / a+b, a+x, b+y]`.
pub fn spark_j(x: u64, y: u64, a: u64, b: u64, n: u64) -> Result<Rational> {
    if ParitySign::all_even(&[x, y, a, b]) == ParitySign::Zero {
        return Ok(rat(0));
    }
    bracket(&[0, a + b + x, a + b + y], &[a + b, a + x, b + y]).eval(n as i64)
}

/// Parameters `(x, y, a, b)` when a two-row matrix compresses to a spark:
/// at most one column with both entries nonzero and even entries elsewhere.
pub fn spark_parameters(a: &ExponentMatrix) -> Option<(u64, u64, u64, u64)> {
    let m = if a.rows() == 2 {
        a.clone()
    } else if a.cols() == 2 {
        a.transpose()
    } else {
        return None;
    };
    let (mut x, mut y, mut top, mut bottom) = (0, 0, 0, 0);
    let mut full = 0;
    for j in 0..m.cols() {
        let (t, b) = (m.get(0, j), m.get(1, j));
        match (t > 0, b > 0) {
            (true, true) => {
                full += 1;
                x = t;
                y = b;
            }
            (true, false) if t % 2 == 0 => top += t,
            (false, true) if b % 2 == 0 => bottom += b,
            (false, false) => {}
            _ => return None,
        }
    }
    (full <= 1).then_some((x, y, top, bottom))
}

/// `J` of a two-row matrix by the closed two-row expansion:
/// `sum_r prod K'_r (-1)^{R/2} dfact(R) [0, A+B-R / A, B]`.
pub fn two_row_j(a: &ExponentMatrix, n: u64) -> Result<Rational> {
    if a.rows() != 2 {
        return Err(Error::SizeMismatch(format!(
            "two-row expansion of a {}-row matrix",
            a.rows()
        )));
    }
    if !a.is_admissible() {
        return Ok(rat(0));
    }
    let (top, bottom) = (a.row(0), a.row(1));
    let big_a: u64 = top.iter().sum();
    let big_b: u64 = bottom.iter().sum();
    // coefficient of each total R, convolving column by column
    let mut by_r: Vec<Rational> = vec![rat(1)];
    for j in 0..a.cols() {
        let (aj, bj) = (top[j], bottom[j]);
        let mut next = vec![Rational::zero(); by_r.len() + aj.min(bj) as usize];
        for r in two_row_types(aj, bj) {
            let k = kprime_two_row(aj, bj, r)?;
            for (s, c) in by_r.iter().enumerate() {
                if !c.is_zero() {
                    next[s + r as usize] += c * &k;
                }
            }
        }
        by_r = next;
    }
    let mut total = Rational::zero();
    for (r, c) in by_r.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let r = r as u64;
        let sign = sign_pow(r);
        let br = bracket(&[0, big_a + big_b - r], &[big_a, big_b]).eval(n as i64)?;
        total += c * sign * Rational::from_integer(dfact(r)) * br;
    }
    Ok(total)
}

/// `F = [A, B / 0, A+B] J`, invariant under flipping any column.
pub fn flip_f(a: &ExponentMatrix, n: u64) -> Result<Rational> {
    let sums = a.row_sums();
    if sums.len() != 2 {
        return Err(Error::SizeMismatch("flipping needs a two-row matrix".into()));
    }
    let scale = bracket(&[sums[0], sums[1]], &[0, sums[0] + sums[1]]).eval(n as i64)?;
    Ok(scale * two_row_j(a, n)?)
}

/// One term of the full elementary expansion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpansionTerm {
    pub assignment: TypeAssignment,
    #[serde(with = "crate::exactnum::bigint_string")]
    pub coefficient: BigInt,
    pub matrix: ElementaryMatrix,
}

/// One term of the compressed expansion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompressedTerm {
    pub assignment: TypeAssignment,
    #[serde(with = "crate::exactnum::rational_string")]
    pub coefficient: Rational,
    pub matrix: ExponentMatrix,
}

/// Column blocks in `(k, l)` order with `k <= l`. Off-diagonal blocks hold
/// `R_kl` columns with ones at rows `k` and `l`; the diagonal block holds
/// what `diag` returns for `R_ii`.
fn block_matrix(p: usize, agg: &[Vec<u64>], diag: impl Fn(u64) -> Vec<u64>) -> ExponentMatrix {
    let mut cols: Vec<Vec<u64>> = Vec::new();
    for k in 0..p {
        for l in k..p {
            if k == l {
                for v in diag(agg[k][k]) {
                    let mut col = vec![0; p];
                    col[k] = v;
                    cols.push(col);
                }
            } else {
                for _ in 0..agg[k][l] {
                    let mut col = vec![0; p];
                    col[k] = 1;
                    col[l] = 1;
                    cols.push(col);
                }
            }
        }
    }
    let mut m = ExponentMatrix::zeros(p, cols.len());
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            m.set(i, j, v);
        }
    }
    m
}

/// `I(a) = sum_r K_r(a) I(E_r(a))` over `r in [a]`.
pub fn elementary_expansion(a: &ExponentMatrix) -> Result<Vec<ExpansionTerm>> {
    let p = a.rows();
    enumerate_type_assignments(a)
        .into_iter()
        .map(|r| {
            let agg = r.aggregate();
            let m = block_matrix(p, &agg, |rii| vec![2; (rii / 2) as usize]);
            Ok(ExpansionTerm {
                coefficient: r.count(a)?,
                matrix: ElementaryMatrix::new(m)?,
                assignment: r,
            })
        })
        .collect()
}

/// `J(a) = sum_r K'_r(a) J(E'_r(a))`.
pub fn compressed_expansion(a: &ExponentMatrix) -> Result<Vec<CompressedTerm>> {
    let p = a.rows();
    enumerate_type_assignments(a)
        .into_iter()
        .map(|r| {
            let agg = r.aggregate();
            let m = block_matrix(p, &agg, |rii| if rii > 0 { vec![rii] } else { vec![] });
            Ok(CompressedTerm {
                coefficient: kprime(&r, a)?,
                matrix: m,
                assignment: r,
            })
        })
        .collect()
}

/// Evaluated term of the compressed expansion, as printed by `--trace`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceTerm {
    pub r: Vec<Vec<Vec<u64>>>,
    #[serde(with = "crate::exactnum::rational_string")]
    pub kprime: Rational,
    pub e: ExponentMatrix,
    #[serde(with = "crate::exactnum::rational_string")]
    pub value: Rational,
}

pub fn expansion_trace(a: &ExponentMatrix, n: u64) -> Result<Vec<TraceTerm>> {
    compressed_expansion(a)?
        .into_iter()
        .map(|t| {
            let j = j_value(&t.matrix, n, Method::Auto)?;
            Ok(TraceTerm {
                r: t.assignment.columns.iter().map(|c| c.entries.clone()).collect(),
                value: &t.coefficient * j,
                kprime: t.coefficient,
                e: t.matrix,
            })
        })
        .collect()
}

/// `J(a)` over `O_n` together with the route that produced it.
pub fn j_value_routed(a: &ExponentMatrix, n: u64, method: Method) -> Result<(Rational, Route)> {
    if n < 2 {
        return Err(Error::Invalid(format!("J needs n >= 2, got {n}")));
    }
    match method {
        Method::Weingarten => {
            let i = weingarten::integral(a, n)?;
            return Ok((j_from_i(a, n, &i), Route::Weingarten));
        }
        Method::TwoRow => {
            let s = a.strip_zeros();
            if !s.is_admissible() {
                return Ok((rat(0), Route::NotAdmissible));
            }
            let m = match (s.rows(), s.cols()) {
                (0, _) | (_, 0) => return Ok((rat(1), Route::Empty)),
                (1, _) => s.vcat(&ExponentMatrix::zeros(1, s.cols()))?,
                (2, _) => s,
                (_, 1) | (_, 2) => {
                    let t = s.transpose();
                    if t.rows() == 1 {
                        t.vcat(&ExponentMatrix::zeros(1, t.cols()))?
                    } else {
                        t
                    }
                }
                _ => {
                    return Err(Error::SizeMismatch(format!(
                        "{}x{} matrix has no two-row form",
                        s.rows(),
                        s.cols()
                    )))
                }
            };
            return Ok((two_row_j(&m, n)?, Route::TwoRow));
        }
        Method::Auto | Method::ClosedForm => {}
    }
    let s = a.strip_zeros();
    if !s.is_admissible() {
        return Ok((rat(0), Route::NotAdmissible));
    }
    if s.rows() == 0 {
        return Ok((rat(1), Route::Empty));
    }
    if s.rows() == 1 || s.cols() == 1 {
        return Ok((rat(1), Route::OneRow));
    }
    if n == 2 && s.rows() == 2 && s.cols() == 2 {
        let j = n2_j_form(s.get(0, 0), s.get(1, 0), s.get(0, 1), s.get(1, 1));
        return Ok((j, Route::Circle));
    }
    if cross_center(&s).is_some() {
        return Ok((cross_j_matrix(&s, n)?, Route::Cross));
    }
    if let Some((x, y, ta, tb)) = spark_parameters(&s) {
        return Ok((spark_j(x, y, ta, tb, n)?, Route::Spark));
    }
    if let Some(j) = threerow::closed_j(&s, n)? {
        return Ok((j, Route::ThreeRow));
    }
    if method == Method::ClosedForm {
        return Err(Error::NoClosedForm);
    }
    if s.rows() == 2 {
        return Ok((two_row_j(&s, n)?, Route::TwoRow));
    }
    if s.cols() == 2 {
        return Ok((two_row_j(&s.transpose(), n)?, Route::TwoRow));
    }
    let i = weingarten::integral(&s, n)?;
    Ok((j_from_i(&s, n, &i), Route::Weingarten))
}

pub fn j_value(a: &ExponentMatrix, n: u64, method: Method) -> Result<Rational> {
    Ok(j_value_routed(a, n, method)?.0)
}

/// `I(a)` through `j_value`, so closed forms are used where they apply.
pub fn i_value(a: &ExponentMatrix, n: u64, method: Method) -> Result<Rational> {
    if method == Method::Weingarten {
        return weingarten::integral(a, n);
    }
    if n == 1 {
        return weingarten::integral(a, n);
    }
    let j = j_value(a, n, method)?;
    Ok(i_from_j(a, n, &j))
}

/// Checks `J_n(^a_b ^c_0) = [0, B+C / B, C]_n J_{n+C}(^a_b)` by two-row
/// expansion on both sides. The identity is stated for `c` with even
/// entries; an odd entry makes the left side vanish.
pub fn transmutation_check(a: &[u64], b: &[u64], c: &[u64], n: u64) -> Result<bool> {
    let (lhs, rhs) = transmutation_sides(a, b, c, n)?;
    Ok(lhs == rhs)
}

pub fn transmutation_sides(
    a: &[u64],
    b: &[u64],
    c: &[u64],
    n: u64,
) -> Result<(Rational, Rational)> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch("a and b differ in length".into()));
    }
    let mut top = a.to_vec();
    top.extend_from_slice(c);
    let mut bottom = b.to_vec();
    bottom.extend(std::iter::repeat_n(0, c.len()));
    let lhs = two_row_j(&ExponentMatrix::two_row(&top, &bottom)?, n)?;
    let big_b: u64 = b.iter().sum();
    let big_c: u64 = c.iter().sum();
    let scale = bracket(&[0, big_b + big_c], &[big_b, big_c]).eval(n as i64)?;
    let rhs = scale * two_row_j(&ExponentMatrix::two_row(a, b)?, n + big_c)?;
    Ok((lhs, rhs))
}

/// Checks `I(^a c / b 0) = prod dfact(c_j) / dfact(sum c) * I(^a sum(c) / b 0)`
/// with the Weingarten evaluator on both sides. `b` has one row per extra row.
pub fn compression_check(a: &[u64], c: &[u64], b: &[Vec<u64>], n: u64) -> Result<bool> {
    let (lhs, rhs) = compression_sides(a, c, b, n)?;
    Ok(lhs == rhs)
}

pub fn compression_sides(
    a: &[u64],
    c: &[u64],
    b: &[Vec<u64>],
    n: u64,
) -> Result<(Rational, Rational)> {
    if c.iter().any(|x| x % 2 != 0) {
        return Err(Error::Invalid("compression needs even c".into()));
    }
    let build = |extra: &[u64]| -> Result<ExponentMatrix> {
        let mut rows = vec![[a, extra].concat()];
        for row in b {
            if row.len() != a.len() {
                return Err(Error::SizeMismatch("rows of b must match a".into()));
            }
            let mut r = row.clone();
            r.extend(std::iter::repeat_n(0, extra.len()));
            rows.push(r);
        }
        ExponentMatrix::from_rows(rows)
    };
    let sum: u64 = c.iter().sum();
    let lhs = weingarten::integral(&build(c)?, n)?;
    let factor = Rational::new(c.iter().map(|&x| dfact(x)).product(), dfact(sum));
    let rhs = factor * weingarten::integral(&build(&[sum])?, n)?;
    Ok((lhs, rhs))
}

/// `sum_r K_r(a) I(E_r(a))` via the Weingarten evaluator.
pub fn expansion_sum(a: &ExponentMatrix, n: u64) -> Result<Rational> {
    let mut acc = Rational::zero();
    for t in elementary_expansion(a)? {
        acc += Rational::from_integer(t.coefficient) * weingarten::integral(t.matrix.matrix(), n)?;
    }
    Ok(acc)
}

/// `sum_r K'_r(a) J(E'_r(a))` with each `J` by `method`.
pub fn compressed_sum(a: &ExponentMatrix, n: u64, method: Method) -> Result<Rational> {
    let mut acc = Rational::zero();
    for t in compressed_expansion(a)? {
        acc += &t.coefficient * j_value(&t.matrix, n, method)?;
    }
    Ok(acc)
}

/// `J` of a 1 x q or q x 1 admissible matrix is 1.
pub fn is_trivial_shape(a: &ExponentMatrix) -> bool {
    let s = a.strip_zeros();
    s.rows() <= 1 || s.cols() <= 1
}

pub(crate) fn sign_pow(r: u64) -> Rational {
    if (r / 2).is_multiple_of(2) {
        Rational::one()
    } else {
        -Rational::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::ratio;

    fn m<const Q: usize>(rows: &[[u64; Q]]) -> ExponentMatrix {
        ExponentMatrix::new(rows)
    }

    #[test]
    fn parity_rules() {
        assert_eq!(ParitySign::circle(&[1, 1, 1, 1]), ParitySign::Negative);
        assert_eq!(ParitySign::circle(&[2, 0, 0, 2]), ParitySign::Positive);
        assert_eq!(ParitySign::circle(&[1, 0, 0, 1]), ParitySign::Zero);
        assert_eq!(ParitySign::all_even(&[2, 4]), ParitySign::Positive);
        assert_eq!(ParitySign::all_even(&[2, 3]), ParitySign::Zero);
    }

    #[test]
    fn one_row_examples() {
        assert_eq!(one_row(&[2], 3), ratio(1, 3));
        assert_eq!(one_row(&[2, 2], 2), ratio(1, 8));
        assert_eq!(one_row(&[1, 1], 5), rat(0));
    }

    #[test]
    fn n2_examples() {
        assert_eq!(n2_closed(1, 1, 1, 1), ratio(-1, 8));
        assert_eq!(n2_closed(2, 0, 0, 2), ratio(3, 8));
        assert_eq!(n2_closed(1, 0, 0, 1), rat(0));
    }

    #[test]
    fn n2_bracket_form_agrees() {
        for a in 0..=5 {
            for b in 0..=5 {
                for c in 0..=5 {
                    for d in 0..=5 {
                        let mat = m(&[[a, c], [b, d]]);
                        let via_i = j_from_i(&mat, 2, &n2_closed(a, b, c, d));
                        assert_eq!(via_i, n2_j_form(a, b, c, d), "{mat}");
                    }
                }
            }
        }
    }

    #[test]
    fn j_examples() {
        assert_eq!(j_value(&m(&[[2, 4, 0]]), 5, Method::Auto).unwrap(), rat(1));
        assert_eq!(j_value(&m(&[[2, 0], [0, 2]]), 3, Method::Weingarten).unwrap(), rat(2));
        assert_eq!(j_value(&m(&[[2, 0], [0, 2]]), 3, Method::Auto).unwrap(), rat(2));
        let j = j_value(&m(&[[1, 1], [1, 1]]), 2, Method::Auto).unwrap();
        assert_eq!(i_from_j(&m(&[[1, 1], [1, 1]]), 2, &j), ratio(-1, 8));
        assert_eq!(j_value(&m(&[[1, 1], [1, 0]]), 4, Method::Auto).unwrap(), rat(0));
    }

    #[test]
    fn two_row_examples() {
        for n in 3..=9 {
            assert_eq!(two_row_j(&m(&[[2], [2]]), n).unwrap(), rat(1));
            let ni = n as i64;
            assert_eq!(two_row_j(&m(&[[2, 0], [0, 2]]), n).unwrap(), ratio(ni + 1, ni - 1));
        }
        assert_eq!(two_row_j(&m(&[[2, 2], [2, 0]]), 3).unwrap(), rat(2));
        for n in 2..=9 {
            assert_eq!(
                two_row_j(&m(&[[1, 1], [1, 1]]), n).unwrap(),
                ratio(-1, n as i64 - 1)
            );
        }
    }

    #[test]
    fn cross_and_spark_examples() {
        assert_eq!(cross_j(2, 2, &[2], 3).unwrap(), rat(2));
        assert_eq!(cross_j(2, 3, &[2], 3).unwrap(), rat(0));
        assert_eq!(cross_j(4, 2, &[], 7).unwrap(), rat(1));
        assert_eq!(spark_j(2, 0, 2, 2, 3).unwrap(), rat(3));
        assert_eq!(spark_j(4, 2, 0, 0, 5).unwrap(), rat(1));
        for n in 3..8 {
            assert_eq!(spark_j(0, 0, 2, 4, n).unwrap(), cross_j(0, 2, &[4], n).unwrap());
        }
        assert_eq!(
            cross_j_matrix(&m(&[[0, 2, 0], [2, 4, 2], [0, 2, 0]]), 5).unwrap(),
            bracket(&[0, 8], &[4, 4]).eval(5).unwrap()
        );
    }

    #[test]
    fn spark_detection() {
        assert_eq!(spark_parameters(&m(&[[2, 2, 0], [4, 0, 2]])), Some((2, 4, 2, 2)));
        assert_eq!(spark_parameters(&m(&[[2, 2, 0, 2], [4, 0, 2, 0]])), Some((2, 4, 4, 2)));
        assert_eq!(spark_parameters(&m(&[[2, 2], [4, 2]])), None);
        assert_eq!(spark_parameters(&m(&[[2, 4], [2, 0], [0, 2]])), Some((2, 4, 2, 2)));
    }

    #[test]
    fn flip_examples() {
        for n in 3..=8 {
            assert_eq!(flip_f(&m(&[[2, 2], [0, 0]]), n).unwrap(), rat(1));
            assert_eq!(flip_f(&m(&[[2, 0], [0, 2]]), n).unwrap(), rat(1));
        }
    }

    #[test]
    fn transmutation_examples() {
        assert!(transmutation_check(&[2], &[2], &[2], 3).unwrap());
        assert!(transmutation_check(&[2], &[2], &[], 3).unwrap());
        assert!(transmutation_check(&[1, 3], &[1, 1], &[2, 4], 4).unwrap());
        let (lhs, rhs) = transmutation_sides(&[2], &[2], &[1, 1], 4).unwrap();
        assert_eq!(lhs, rat(0));
        assert_ne!(rhs, rat(0));
    }

    #[test]
    fn compression_examples() {
        assert!(compression_check(&[2], &[2, 2], &[vec![2]], 8).unwrap());
        assert!(compression_check(&[2], &[4], &[vec![2]], 8).unwrap());
        assert!(compression_check(&[2], &[2, 0], &[vec![2]], 8).unwrap());
    }

    #[test]
    fn expansion_identity() {
        let a = m(&[[2, 2], [2, 0]]);
        assert_eq!(expansion_sum(&a, 8).unwrap(), weingarten::integral(&a, 8).unwrap());
        let e = m(&[[1, 2, 0], [1, 0, 2]]);
        let terms = elementary_expansion(&e).unwrap();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].coefficient, BigInt::from(1));
        let c = compressed_expansion(&m(&[[2], [2]])).unwrap();
        let mut ks: Vec<Rational> = c.iter().map(|t| t.coefficient.clone()).collect();
        ks.sort();
        assert_eq!(ks, vec![rat(1), rat(2)]);
    }

    #[test]
    fn compressed_expansion_three_rows() {
        let a = m(&[[2, 1], [1, 1], [1, 0]]);
        for n in 5..=7 {
            assert_eq!(
                compressed_sum(&a, n, Method::Weingarten).unwrap(),
                j_value(&a, n, Method::Weingarten).unwrap()
            );
        }
    }

    #[test]
    fn routes() {
        let r = |a: ExponentMatrix, n| j_value_routed(&a, n, Method::Auto).unwrap().1;
        assert_eq!(r(m(&[[1, 1], [1, 0]]), 3), Route::NotAdmissible);
        assert_eq!(r(m(&[[0, 0], [0, 0]]), 3), Route::Empty);
        assert_eq!(r(m(&[[2, 2]]), 3), Route::OneRow);
        assert_eq!(r(m(&[[2, 2], [2, 2]]), 2), Route::Circle);
        assert_eq!(r(m(&[[2, 2], [2, 0]]), 3), Route::Cross);
        assert_eq!(r(m(&[[2, 2, 0], [2, 0, 2]]), 3), Route::Spark);
        assert_eq!(r(m(&[[2, 2], [2, 2]]), 3), Route::TwoRow);
        assert_eq!(r(m(&[[1, 1, 0], [1, 0, 1], [0, 1, 1]]), 4), Route::Weingarten);
        assert!(matches!(
            j_value(&m(&[[2, 2], [2, 2]]), 3, Method::ClosedForm),
            Err(Error::NoClosedForm)
        ));
    }

    proptest::proptest! {
        #[test]
        fn flipping_invariance(
            cols in proptest::collection::vec((0u64..=4, 0u64..=4), 1..=3),
            flip in 0usize..3,
            n in 3u64..=10,
        ) {
            let top: Vec<u64> = cols.iter().map(|c| c.0).collect();
            let bottom: Vec<u64> = cols.iter().map(|c| c.1).collect();
            let a = ExponentMatrix::two_row(&top, &bottom).unwrap();
            let mut flipped = a.clone();
            let j = flip % a.cols();
            flipped.set(0, j, a.get(1, j));
            flipped.set(1, j, a.get(0, j));
            proptest::prop_assert_eq!(flip_f(&a, n).unwrap(), flip_f(&flipped, n).unwrap());
        }

        #[test]
        fn two_row_symmetric_under_transpositions(
            cols in proptest::collection::vec((0u64..=4, 0u64..=4), 1..=3),
            n in 3u64..=10,
        ) {
            let top: Vec<u64> = cols.iter().map(|c| c.0).collect();
            let bottom: Vec<u64> = cols.iter().map(|c| c.1).collect();
            let a = ExponentMatrix::two_row(&top, &bottom).unwrap();
            let swapped = a.permute_rows(&[1, 0]);
            let rev: Vec<usize> = (0..a.cols()).rev().collect();
            let v = two_row_j(&a, n).unwrap();
            proptest::prop_assert_eq!(&v, &two_row_j(&swapped, n).unwrap());
            proptest::prop_assert_eq!(&v, &two_row_j(&a.permute_cols(&rev), n).unwrap());
        }
    }
}
