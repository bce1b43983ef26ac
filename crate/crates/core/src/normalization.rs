//! Normalization of two-row integrals.
//!
//! For a `2 x q` exponent matrix with rows `a`, `b` and row sums `A`, `B`,
//! the constant
//!
//! ```text
//! Gamma = [0 / A, B] * prod_r P_r^((-1)^(q-r))
//! ```
//!
//! is a balanced bracket built from the subset-sum multisets `P_r`, and
//! `phi = J / Gamma` is invariant under the hyperoctahedral group acting on
//! columns. This module builds `P_r`, `Gamma`, `Lambda` and `phi`, runs the
//! property battery for `phi`, and reproduces the uniqueness argument for the
//! exponents of `Lambda` as an exact linear system over orbit symbols.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{bracket, format_rational, BracketSpec, Rational};
use crate::integrals::{j_value, Method};
use crate::matrix::ExponentMatrix;

/// The multiset `P_r`: for every `r`-subset of columns and every choice of
/// one entry per chosen column, the sum of the chosen entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetSumProduct {
    pub q: usize,
    pub r: usize,
    /// Sorted ascending.
    pub sums: Vec<u64>,
}

impl SubsetSumProduct {
    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }
}

fn require_two_rows(a: &ExponentMatrix) -> Result<()> {
    if a.rows() != 2 {
        return Err(Error::SizeMismatch(format!(
            "expected a 2 x q matrix, got {} x {}",
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

pub fn p_product(a: &ExponentMatrix, r: usize) -> Result<SubsetSumProduct> {
    require_two_rows(a)?;
    let q = a.cols();
    if r > q {
        return Err(Error::Invalid(format!("r={r} exceeds q={q}")));
    }
    let mut sums = Vec::new();
    for mask in 0u32..(1 << q) {
        if mask.count_ones() as usize != r {
            continue;
        }
        let cols: Vec<usize> = (0..q).filter(|&j| mask & (1 << j) != 0).collect();
        for pick in 0u32..(1 << r) {
            let s = cols
                .iter()
                .enumerate()
                .map(|(t, &j)| a.get(((pick >> t) & 1) as usize, j))
                .sum();
            sums.push(s);
        }
    }
    sums.sort_unstable();
    Ok(SubsetSumProduct { q, r, sums })
}

/// The unreduced bracket of `Gamma`.
pub fn gamma_spec(a: &ExponentMatrix) -> Result<BracketSpec> {
    require_two_rows(a)?;
    let q = a.cols();
    let rs = a.row_sums();
    let mut spec = bracket(&[0], &[rs[0], rs[1]]);
    for r in 0..=q {
        let p = p_product(a, r)?;
        if (q - r).is_multiple_of(2) {
            spec.numerators.extend(p.sums);
        } else {
            spec.denominators.extend(p.sums);
        }
    }
    Ok(spec)
}

pub fn gamma(a: &ExponentMatrix, n: u64) -> Result<Rational> {
    gamma_spec(a)?.reduced().eval(n as i64)
}

/// `Lambda = [A, B / 0, A+B] * Gamma`.
pub fn lambda_spec(a: &ExponentMatrix) -> Result<BracketSpec> {
    let rs = a.row_sums();
    Ok(bracket(&[rs[0], rs[1]], &[0, rs[0] + rs[1]]).union(&gamma_spec(a)?))
}

pub fn lambda(a: &ExponentMatrix, n: u64) -> Result<Rational> {
    lambda_spec(a)?.reduced().eval(n as i64)
}

/// `phi = J / Gamma`.
pub fn phi(a: &ExponentMatrix, n: u64) -> Result<Rational> {
    let g = gamma(a, n)?;
    if g.is_zero() {
        return Err(Error::GammaVanishes);
    }
    Ok(j_value(a, n, Method::Auto)? / g)
}

pub fn gamma_balanced_check(a: &ExponentMatrix) -> Result<bool> {
    Ok(gamma_spec(a)?.is_balanced())
}

/// Balance of `Gamma` for every `2 x q` matrix with entries up to `max_entry`.
pub fn gamma_balanced_grid(q: usize, max_entry: u64) -> Result<bool> {
    for m in two_row_grid(q, max_entry) {
        if !gamma_balanced_check(&m)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Both sides of `Gamma_n(^a c / b 0) = [0, B+C / B, C]_n Gamma_{n+C}(^a_b)`.
pub fn rational_transmutation_sides(
    a: &[u64],
    b: &[u64],
    c: &[u64],
    n: u64,
) -> Result<(Rational, Rational)> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch("a and b differ in length".into()));
    }
    let base = ExponentMatrix::two_row(a, b)?;
    let extended = ExponentMatrix::two_row(&[a, c].concat(), &[b.to_vec(), vec![0; c.len()]].concat())?;
    let big_b: u64 = b.iter().sum();
    let big_c: u64 = c.iter().sum();
    let lhs = gamma(&extended, n)?;
    let rhs = bracket(&[0, big_b + big_c], &[big_b, big_c]).eval(n as i64)? * gamma(&base, n + big_c)?;
    Ok((lhs, rhs))
}

pub fn rational_transmutation_check(a: &[u64], b: &[u64], c: &[u64], n: u64) -> Result<bool> {
    let (lhs, rhs) = rational_transmutation_sides(a, b, c, n)?;
    Ok(lhs == rhs)
}

/// All `2 x q` matrices with entries in `0..=max_entry`, in lexicographic order.
pub fn two_row_grid(q: usize, max_entry: u64) -> Vec<ExponentMatrix> {
    let len = 2 * q;
    let base = max_entry + 1;
    let total = base.pow(len as u32);
    (0..total)
        .map(|mut code| {
            let mut v = vec![0u64; len];
            for slot in v.iter_mut().rev() {
                *slot = code % base;
                code /= base;
            }
            ExponentMatrix::two_row(&v[..q], &v[q..]).expect("rows of equal length")
        })
        .collect()
}

/// Parameters of the property battery.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Largest number of columns; every `q` from 1 up to this is tested.
    pub max_q: usize,
    pub max_entry: u64,
    pub n_min: u64,
    pub n_max: u64,
    /// Counterexamples kept per property.
    pub max_counterexamples: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            max_q: 3,
            max_entry: 4,
            n_min: 3,
            n_max: 10,
            max_counterexamples: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiProperty {
    Extension,
    RowSwap,
    ColumnPermutation,
    ColumnFlip,
    Compression,
    Transmutation,
    CrossTriviality,
    CircleTriviality,
    SquareSymmetry,
}

impl PhiProperty {
    pub const ALL: [PhiProperty; 9] = [
        PhiProperty::Extension,
        PhiProperty::RowSwap,
        PhiProperty::ColumnPermutation,
        PhiProperty::ColumnFlip,
        PhiProperty::Compression,
        PhiProperty::Transmutation,
        PhiProperty::CrossTriviality,
        PhiProperty::CircleTriviality,
        PhiProperty::SquareSymmetry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PhiProperty::Extension => "extension",
            PhiProperty::RowSwap => "row-swap",
            PhiProperty::ColumnPermutation => "column-permutation",
            PhiProperty::ColumnFlip => "column-flip",
            PhiProperty::Compression => "compression",
            PhiProperty::Transmutation => "transmutation",
            PhiProperty::CrossTriviality => "cross-triviality",
            PhiProperty::CircleTriviality => "circle-triviality",
            PhiProperty::SquareSymmetry => "square-symmetry",
        }
    }
}

impl fmt::Display for PhiProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub property: PhiProperty,
    pub pass: bool,
    pub checked: usize,
    pub failures: usize,
    pub counterexamples: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub grid: GridSpec,
    pub properties: Vec<PropertyResult>,
    pub pass: bool,
}

impl BatteryReport {
    pub fn get(&self, p: PhiProperty) -> Option<&PropertyResult> {
        self.properties.iter().find(|r| r.property == p)
    }
}

/// Outcome of one exact comparison inside the battery.
struct Outcome {
    property: PhiProperty,
    failure: Option<String>,
}

fn equal_case(
    property: PhiProperty,
    out: &mut Vec<Outcome>,
    left: (&ExponentMatrix, u64),
    right: (&ExponentMatrix, u64),
) -> Result<()> {
    let l = phi(left.0, left.1)?;
    let r = phi(right.0, right.1)?;
    let failure = (l != r).then(|| {
        format!(
            "phi_{}({}) = {} but phi_{}({}) = {}",
            left.1,
            left.0,
            format_rational(&l),
            right.1,
            right.0,
            format_rational(&r)
        )
    });
    out.push(Outcome { property, failure });
    Ok(())
}

fn member_case(
    property: PhiProperty,
    out: &mut Vec<Outcome>,
    m: &ExponentMatrix,
    n: u64,
    allowed: &[i64],
) -> Result<()> {
    let v = phi(m, n)?;
    let ok = allowed.iter().any(|&x| v == Rational::from_integer(x.into()));
    let failure = (!ok).then(|| format!("phi_{}({}) = {} not in {:?}", n, m, format_rational(&v), allowed));
    out.push(Outcome { property, failure });
    Ok(())
}

fn permutations(q: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            prefix.push(x);
            go(prefix, rest, out);
            prefix.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..q).collect(), &mut out);
    out
}

fn flip_column(m: &ExponentMatrix, j: usize) -> ExponentMatrix {
    let mut f = m.clone();
    f.set(0, j, m.get(1, j));
    f.set(1, j, m.get(0, j));
    f
}

fn append_top(m: &ExponentMatrix, c: &[u64]) -> ExponentMatrix {
    m.hcat(&ExponentMatrix::two_row(c, &vec![0; c.len()]).expect("equal rows"))
        .expect("two rows each")
}

fn cases_for(m: &ExponentMatrix, grid: &GridSpec, n: u64) -> Result<Vec<Outcome>> {
    let q = m.cols();
    let mut out = Vec::new();
    let evens: Vec<u64> = (1..=grid.max_entry / 2).map(|x| 2 * x).collect();

    equal_case(PhiProperty::Extension, &mut out, (m, n), (&append_top(m, &[0]), n))?;
    equal_case(PhiProperty::RowSwap, &mut out, (m, n), (&m.permute_rows(&[1, 0]), n))?;
    for p in permutations(q).into_iter().skip(1) {
        equal_case(PhiProperty::ColumnPermutation, &mut out, (m, n), (&m.permute_cols(&p), n))?;
    }
    for j in 0..q {
        equal_case(PhiProperty::ColumnFlip, &mut out, (m, n), (&flip_column(m, j), n))?;
    }
    if q < grid.max_q {
        for &c1 in &evens {
            for &c2 in &evens {
                equal_case(
                    PhiProperty::Compression,
                    &mut out,
                    (&append_top(m, &[c1, c2]), n),
                    (&append_top(m, &[c1 + c2]), n),
                )?;
            }
        }
        for &c in &evens {
            equal_case(PhiProperty::Transmutation, &mut out, (&append_top(m, &[c]), n), (m, n + c))?;
        }
    }
    if q == grid.max_q && q >= 2 && m.row(1)[1..].iter().all(|&x| x == 0) {
        member_case(PhiProperty::CrossTriviality, &mut out, m, n, &[0, 1])?;
    }
    if q == 2 {
        let (a, c, b, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
        let vals = [a, b, c, d];
        for p in permutations(4).into_iter().skip(1) {
            let v: Vec<u64> = p.iter().map(|&i| vals[i]).collect();
            let other = ExponentMatrix::two_row(&[v[0], v[2]], &[v[1], v[3]])?;
            equal_case(PhiProperty::SquareSymmetry, &mut out, (m, n), (&other, n))?;
        }
    }
    Ok(out)
}

/// Runs the nine `phi` properties as exact comparisons over the grid.
///
/// Matrices have `q = 1..=max_q` columns and entries up to `max_entry`;
/// compression and transmutation append even columns to matrices with
/// fewer than `max_q` columns, cross triviality uses `2 x max_q` crosses,
/// and the last two properties use `2 x 2` matrices, with triviality at
/// `n = 2`.
pub fn phi_property_battery(grid: &GridSpec) -> Result<BatteryReport> {
    if grid.n_min < 2 || grid.n_min > grid.n_max || grid.max_q == 0 {
        return Err(Error::Invalid("battery needs 2 <= n_min <= n_max and max_q >= 1".into()));
    }
    let mut jobs: Vec<(ExponentMatrix, u64)> = Vec::new();
    for q in 1..=grid.max_q {
        for m in two_row_grid(q, grid.max_entry) {
            for n in grid.n_min..=grid.n_max {
                jobs.push((m.clone(), n));
            }
        }
    }
    let mut outcomes: Vec<Vec<Outcome>> = jobs
        .par_iter()
        .map(|(m, n)| cases_for(m, grid, *n))
        .collect::<Result<_>>()?;
    let circle: Vec<Vec<Outcome>> = two_row_grid(2, grid.max_entry)
        .par_iter()
        .map(|m| {
            let mut out = Vec::new();
            member_case(PhiProperty::CircleTriviality, &mut out, m, 2, &[-1, 0, 1])?;
            Ok(out)
        })
        .collect::<Result<_>>()?;
    outcomes.extend(circle);

    let mut table: BTreeMap<PhiProperty, PropertyResult> = PhiProperty::ALL
        .iter()
        .map(|&p| {
            (
                p,
                PropertyResult {
                    property: p,
                    pass: true,
                    checked: 0,
                    failures: 0,
                    counterexamples: Vec::new(),
                },
            )
        })
        .collect();
    for o in outcomes.into_iter().flatten() {
        let entry = table.get_mut(&o.property).expect("all properties present");
        entry.checked += 1;
        if let Some(msg) = o.failure {
            entry.pass = false;
            entry.failures += 1;
            if entry.counterexamples.len() < grid.max_counterexamples {
                entry.counterexamples.push(msg);
            }
        }
    }
    let properties: Vec<PropertyResult> = table.into_values().collect();
    let pass = properties.iter().all(|p| p.pass && p.checked > 0);
    Ok(BatteryReport {
        grid: grid.clone(),
        properties,
        pass,
    })
}

/// Orbit symbols `(x_1 ... x_q)` with `2 >= x_1 >= ... >= x_q >= 0`, in
/// lexicographic order. Symbol entry `x` says how many entries are taken
/// from a column.
pub fn orbit_symbols(q: usize) -> Vec<Vec<u8>> {
    fn go(prefix: &mut Vec<u8>, q: usize, cap: u8, out: &mut Vec<Vec<u8>>) {
        if prefix.len() == q {
            out.push(prefix.clone());
            return;
        }
        for x in 0..=cap {
            prefix.push(x);
            go(prefix, q, x, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), q, 2, &mut out);
    out.sort();
    out
}

fn symbol_name(s: &[u8]) -> String {
    let digits: String = s.iter().map(|x| x.to_string()).collect();
    format!("({digits})")
}

/// Every selection of entries of a `2 x q` matrix, as
/// `(sorted column counts, selected cells)`.
fn selections(q: usize) -> Vec<(Vec<u8>, Vec<(usize, usize)>)> {
    let mut out = Vec::new();
    for code in 0..4usize.pow(q as u32) {
        let mut counts = Vec::with_capacity(q);
        let mut cells = Vec::new();
        let mut c = code;
        for j in 0..q {
            match c % 4 {
                0 => counts.push(0),
                1 => {
                    counts.push(1);
                    cells.push((0, j));
                }
                2 => {
                    counts.push(1);
                    cells.push((1, j));
                }
                _ => {
                    counts.push(2);
                    cells.push((0, j));
                    cells.push((1, j));
                }
            }
            c /= 4;
        }
        counts.sort_unstable_by(|a, b| b.cmp(a));
        out.push((counts, cells));
    }
    out
}

/// The product attached to an orbit symbol, evaluated on a concrete matrix.
pub fn symbol_product(a: &ExponentMatrix, symbol: &[u8]) -> Result<Vec<u64>> {
    require_two_rows(a)?;
    if symbol.len() != a.cols() {
        return Err(Error::SizeMismatch("symbol length differs from q".into()));
    }
    let mut sums: Vec<u64> = selections(a.cols())
        .into_iter()
        .filter(|(s, _)| s == symbol)
        .map(|(_, cells)| cells.iter().map(|&(i, j)| a.get(i, j)).sum())
        .collect();
    sums.sort_unstable();
    Ok(sums)
}

/// Exponents of `Lambda` for the constructed `Gamma`: `+-1` on the symbols
/// of the `P_r` and `-1` on the all-twos symbol.
pub fn gamma_exponents(q: usize) -> Vec<i64> {
    orbit_symbols(q)
        .iter()
        .map(|s| {
            if s.iter().all(|&x| x == 2) {
                -1
            } else if s.iter().all(|&x| x <= 1) {
                let r = s.iter().filter(|&&x| x == 1).count();
                if (q - r).is_multiple_of(2) {
                    1
                } else {
                    -1
                }
            } else {
                0
            }
        })
        .collect()
}

/// `Gamma = [0, A+B / A, B] * prod symbol^exponent` on a concrete matrix.
pub fn symbol_gamma_spec(exponents: &[i64], a: &ExponentMatrix) -> Result<BracketSpec> {
    let symbols = orbit_symbols(a.cols());
    if symbols.len() != exponents.len() {
        return Err(Error::SizeMismatch("one exponent per orbit symbol".into()));
    }
    let rs = a.row_sums();
    let mut spec = bracket(&[0, rs[0] + rs[1]], &[rs[0], rs[1]]);
    for (sym, &e) in symbols.iter().zip(exponents) {
        let p = symbol_product(a, sym)?;
        for _ in 0..e.unsigned_abs() {
            if e > 0 {
                spec.numerators.extend_from_slice(&p);
            } else {
                spec.denominators.extend_from_slice(&p);
            }
        }
    }
    Ok(spec)
}

/// Linear system for the exponents of `Lambda` over the orbit symbols.
///
/// Unknowns are the exponents of the orbit-symbol products. The equations
/// are balance (term count and total sum) and, on the cross
/// `(^a c / x 0)` with formal variables, equality of the exponent of every
/// linear form with its exponent in `[(a+C)(x+C) / C(a+x+C)]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentSystem {
    pub q: usize,
    pub symbols: Vec<String>,
    /// Equation names: `#`, `sum`, then the linear form, e.g. `a+c1`.
    pub labels: Vec<String>,
    pub coefficients: Vec<Vec<i64>>,
    pub rhs: Vec<i64>,
}

/// Solution set of an [`ExponentSystem`]: `particular + span(kernel)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentSolution {
    pub q: usize,
    pub symbols: Vec<String>,
    pub equations: usize,
    pub rank: usize,
    pub unique: bool,
    /// Free variables set to zero.
    #[serde(with = "rational_vec")]
    pub particular: Vec<Rational>,
    /// Integer basis of the null space.
    pub kernel: Vec<Vec<i64>>,
}

mod rational_vec {
    use super::Rational;
    use crate::exactnum::{format_rational, parse_rational};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(format_rational).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|x| parse_rational(x).map_err(serde::de::Error::custom))
            .collect()
    }
}

impl ExponentSystem {
    pub fn build(q: usize) -> Result<Self> {
        if !(2..=4).contains(&q) {
            return Err(Error::Invalid("orbit systems are built for 2 <= q <= 4".into()));
        }
        let symbols = orbit_symbols(q);
        let sels = selections(q);
        let k = symbols.len();
        let index = |s: &Vec<u8>| symbols.iter().position(|x| x == s).expect("symbol exists");

        let mut count = vec![0i64; k];
        let mut cells = vec![0i64; k];
        for (s, sel) in &sels {
            count[index(s)] += 1;
            cells[index(s)] += sel.len() as i64;
        }
        let width = 2 * q as i64;
        if cells.iter().any(|c| c % width != 0) {
            return Err(Error::Invalid("symbol sums are not multiples of the total".into()));
        }
        let mut labels = vec!["#".to_string(), "sum".to_string()];
        let mut coefficients = vec![count, cells.iter().map(|c| c / width).collect()];
        let mut rhs = vec![0, 0];

        // Variables: bit 0 = a, bit 1 = x, bit 1+j = c_j.
        let var = |cell: (usize, usize)| -> Option<u32> {
            match cell {
                (0, 0) => Some(1),
                (1, 0) => Some(2),
                (0, j) => Some(1 << (1 + j)),
                _ => None,
            }
        };
        let mut forms: BTreeMap<u32, Vec<i64>> = BTreeMap::new();
        for (s, sel) in &sels {
            let form = sel.iter().filter_map(|&c| var(c)).fold(0u32, |acc, b| acc | b);
            forms.entry(form).or_insert_with(|| vec![0; k])[index(s)] += 1;
        }
        let big_c: u32 = (1..q).map(|j| 1u32 << (1 + j)).fold(0, |a, b| a | b);
        let mut target: BTreeMap<u32, i64> = BTreeMap::new();
        *target.entry(1 | big_c).or_default() += 1;
        *target.entry(2 | big_c).or_default() += 1;
        *target.entry(big_c).or_default() -= 1;
        *target.entry(3 | big_c).or_default() -= 1;
        for &form in target.keys() {
            forms.entry(form).or_insert_with(|| vec![0; k]);
        }
        for (form, coeffs) in forms {
            labels.push(form_name(form, q));
            coefficients.push(coeffs);
            rhs.push(target.get(&form).copied().unwrap_or(0));
        }
        Ok(ExponentSystem {
            q,
            symbols: symbols.iter().map(|s| symbol_name(s)).collect(),
            labels,
            coefficients,
            rhs,
        })
    }

    pub fn satisfies(&self, exponents: &[i64]) -> bool {
        exponents.len() == self.symbols.len()
            && self
                .coefficients
                .iter()
                .zip(&self.rhs)
                .all(|(row, &r)| row.iter().zip(exponents).map(|(a, b)| a * b).sum::<i64>() == r)
    }

    pub fn solve(&self) -> Result<ExponentSolution> {
        let k = self.symbols.len();
        let mut m: Vec<Vec<Rational>> = self
            .coefficients
            .iter()
            .zip(&self.rhs)
            .map(|(row, &r)| {
                row.iter()
                    .chain(std::iter::once(&r))
                    .map(|&x| Rational::from_integer(x.into()))
                    .collect()
            })
            .collect();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..k {
            let Some(p) = (row..m.len()).find(|&i| !m[i][col].is_zero()) else {
                continue;
            };
            m.swap(row, p);
            let inv = m[row][col].recip();
            for x in m[row].iter_mut() {
                *x *= &inv;
            }
            let pivot_row = m[row].clone();
            for (i, r) in m.iter_mut().enumerate() {
                if i != row && !r[col].is_zero() {
                    let f = r[col].clone();
                    for (x, y) in r.iter_mut().zip(&pivot_row) {
                        *x -= &f * y;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        if m[row..].iter().any(|r| !r[k].is_zero()) {
            return Err(Error::Invalid("exponent system is inconsistent".into()));
        }
        let mut particular = vec![Rational::zero(); k];
        for (i, &c) in pivots.iter().enumerate() {
            particular[c] = m[i][k].clone();
        }
        let mut kernel = Vec::new();
        for free in (0..k).filter(|c| !pivots.contains(c)) {
            let mut v = vec![Rational::zero(); k];
            v[free] = Rational::one();
            for (i, &c) in pivots.iter().enumerate() {
                v[c] = -m[i][free].clone();
            }
            let scale = v
                .iter()
                .fold(num_bigint::BigInt::one(), |acc, x| num_integer::Integer::lcm(&acc, x.denom()));
            let ints = v
                .iter()
                .map(|x| (x * Rational::from_integer(scale.clone())).to_integer().to_i64())
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::Invalid("kernel entry overflow".into()))?;
            kernel.push(ints);
        }
        Ok(ExponentSolution {
            q: self.q,
            symbols: self.symbols.clone(),
            equations: self.rhs.len(),
            rank: pivots.len(),
            unique: kernel.is_empty(),
            particular,
            kernel,
        })
    }
}

fn form_name(form: u32, q: usize) -> String {
    if form == 0 {
        return "0".into();
    }
    let mut names = Vec::new();
    if form & 1 != 0 {
        names.push("a".to_string());
    }
    if form & 2 != 0 {
        names.push("x".to_string());
    }
    for j in 1..q {
        if form & (1 << (1 + j)) != 0 {
            names.push(format!("c{j}"));
        }
    }
    names.join("+")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::ratio;
    use proptest::prelude::*;

    fn m<const Q: usize>(rows: &[[u64; Q]]) -> ExponentMatrix {
        ExponentMatrix::new(rows)
    }

    #[test]
    fn p_products_small() {
        let a = m(&[[1, 2], [3, 4]]);
        assert_eq!(p_product(&a, 0).unwrap().sums, vec![0]);
        assert_eq!(p_product(&a, 1).unwrap().sums, vec![1, 2, 3, 4]);
        assert_eq!(p_product(&a, 2).unwrap().sums, vec![3, 5, 5, 7]);
        let b = m(&[[1, 2, 5], [3, 4, 6]]);
        for r in 0..=3 {
            let p = p_product(&b, r).unwrap();
            assert_eq!(p.len(), (1 << r) * [1, 3, 3, 1][r]);
        }
    }

    #[test]
    fn gamma_low_q() {
        for n in 2..9 {
            assert_eq!(gamma(&m(&[[3], [5]]), n).unwrap(), Rational::one());
            let a = m(&[[2, 4], [6, 2]]);
            let expect = bracket(&[0, 0, 2 + 2, 4 + 6], &[2, 4, 6, 2]).eval(n as i64).unwrap();
            assert_eq!(gamma(&a, n).unwrap(), expect);
        }
    }

    #[test]
    fn gamma_q3_matches_closed_constant() {
        let (a, b, c, x, y, z) = (2u64, 4, 2, 6, 0, 2);
        let spec = bracket(
            &[a, b, c, a + b + z, a + c + y, b + c + x, x, y, z, a + y + z, b + x + z, c + x + y],
            &[
                a + b,
                a + c,
                b + c,
                x + y,
                x + z,
                y + z,
                a + y,
                a + z,
                b + x,
                b + z,
                c + x,
                c + y,
            ],
        );
        let mat = m(&[[a, b, c], [x, y, z]]);
        for n in 2..9 {
            assert_eq!(gamma(&mat, n).unwrap(), spec.eval(n as i64).unwrap());
        }
    }

    #[test]
    fn phi_on_square_diagonal() {
        let a = m(&[[2, 0], [0, 2]]);
        for n in 3..10i64 {
            let g = gamma(&a, n as u64).unwrap();
            assert_eq!(g, ratio(n + 1, n - 1));
            assert_eq!(phi(&a, n as u64).unwrap(), Rational::one());
        }
    }

    #[test]
    fn phi_row_swap_example() {
        let a = m(&[[2, 4], [4, 2]]);
        for n in 3..9 {
            assert_eq!(phi(&a, n).unwrap(), phi(&a.permute_rows(&[1, 0]), n).unwrap());
        }
    }

    #[test]
    fn balanced_grids() {
        for q in 1..=3 {
            assert!(gamma_balanced_grid(q, 4).unwrap());
        }
    }

    #[test]
    fn rational_transmutation_examples() {
        for n in 3..9 {
            assert!(rational_transmutation_check(&[2], &[2], &[2], n).unwrap());
            assert!(rational_transmutation_check(&[2, 1], &[3, 0], &[0], n).unwrap());
            assert!(rational_transmutation_check(&[2, 1], &[3, 4], &[2, 3], n).unwrap());
        }
    }

    #[test]
    fn battery_small_grid() {
        let grid = GridSpec {
            max_q: 3,
            max_entry: 2,
            n_min: 3,
            n_max: 5,
            max_counterexamples: 5,
        };
        let report = phi_property_battery(&grid).unwrap();
        for p in &report.properties {
            assert!(p.pass && p.checked > 0, "{:?}", p);
        }
        assert!(report.pass);
    }

    #[test]
    fn constructed_exponents() {
        assert_eq!(gamma_exponents(2), vec![1, -1, 1, 0, 0, -1]);
        assert_eq!(gamma_exponents(3), vec![-1, 1, -1, 1, 0, 0, 0, 0, 0, -1]);
    }

    #[test]
    fn exponent_system_q2() {
        let sys = ExponentSystem::build(2).unwrap();
        assert_eq!(sys.symbols, ["(00)", "(10)", "(11)", "(20)", "(21)", "(22)"]);
        assert!(sys.satisfies(&gamma_exponents(2)));
        let sol = sys.solve().unwrap();
        for v in &sol.kernel {
            let shifted: Vec<i64> = gamma_exponents(2).iter().zip(v).map(|(a, b)| a + b).collect();
            assert!(sys.satisfies(&shifted));
        }
        assert_eq!(sol.rank, 5);
        assert_eq!(sol.kernel, vec![vec![1, -1, 1, 1, -1, 1]]);
        assert!(!sol.unique);
    }

    #[test]
    fn exponent_system_q3() {
        let sys = ExponentSystem::build(3).unwrap();
        assert_eq!(sys.symbols.len(), 10);
        assert!(sys.satisfies(&gamma_exponents(3)));
        let sol = sys.solve().unwrap();
        assert_eq!(sol.rank, 7);
        assert_eq!(sol.kernel.len(), 3);
        for v in &sol.kernel {
            let shifted: Vec<i64> = gamma_exponents(3).iter().zip(v).map(|(a, b)| a + b).collect();
            assert!(sys.satisfies(&shifted));
        }
    }

    #[test]
    fn kernel_constants_agree_on_crosses() {
        for q in 2..=3 {
            let sol = ExponentSystem::build(q).unwrap().solve().unwrap();
            for v in &sol.kernel {
                let alt: Vec<i64> = gamma_exponents(q).iter().zip(v).map(|(a, b)| a + b).collect();
                let mut differs = false;
                for a in two_row_grid(q, 4) {
                    let spec = symbol_gamma_spec(&alt, &a).unwrap();
                    assert!(spec.is_balanced());
                    let cross = a.row(1)[1..].iter().all(|&x| x == 0);
                    for n in 3..7 {
                        let g_alt = spec.reduced().eval(n).unwrap();
                        let g = gamma(&a, n as u64).unwrap();
                        if cross {
                            assert_eq!(g_alt, g, "{a} n={n}");
                        } else {
                            differs |= g_alt != g;
                        }
                    }
                }
                assert!(differs);
            }
        }
    }

    #[test]
    fn symbol_constant_is_gamma() {
        for q in 2..=3 {
            let e = gamma_exponents(q);
            for a in two_row_grid(q, 3).into_iter().step_by(37) {
                let solved = symbol_gamma_spec(&e, &a).unwrap().reduced();
                assert_eq!(solved, gamma_spec(&a).unwrap().reduced(), "{a}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn p_product_hyperoctahedral(
            top in proptest::collection::vec(0u64..6, 3),
            bottom in proptest::collection::vec(0u64..6, 3),
            flips in proptest::collection::vec(any::<bool>(), 3),
            perm in Just(vec![2usize, 0, 1]).prop_shuffle(),
            r in 0usize..=3,
        ) {
            let a = ExponentMatrix::two_row(&top, &bottom).unwrap();
            let mut b = a.permute_cols(&perm);
            for (j, f) in flips.iter().enumerate() {
                if *f { b = flip_column(&b, j); }
            }
            prop_assert_eq!(p_product(&a, r).unwrap(), p_product(&b, r).unwrap());
        }

        #[test]
        fn phi_hyperoctahedral(
            top in proptest::collection::vec(0u64..5, 3),
            bottom in proptest::collection::vec(0u64..5, 3),
            flip in 0usize..3,
            perm in Just(vec![0usize, 1, 2]).prop_shuffle(),
            n in 3u64..11,
        ) {
            let a = ExponentMatrix::two_row(&top, &bottom).unwrap();
            let b = flip_column(&a.permute_cols(&perm), flip);
            prop_assert_eq!(phi(&a, n).unwrap(), phi(&b, n).unwrap());
        }

        #[test]
        fn gamma_always_balanced(
            top in proptest::collection::vec(0u64..9, 1..5),
            seed in proptest::collection::vec(0u64..9, 4),
        ) {
            let bottom: Vec<u64> = seed.iter().cycle().take(top.len()).copied().collect();
            let a = ExponentMatrix::two_row(&top, &bottom).unwrap();
            prop_assert!(gamma_balanced_check(&a).unwrap());
        }
    }
}
