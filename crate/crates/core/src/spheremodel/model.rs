use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::ops::{Add, Mul, Neg};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::poly::SparsePolynomial;
use crate::error::{Error, Result};
use crate::exactnum::{format_rational, rat, Rational};

/// A number `a + b sqrt(2)` with rational `a`, `b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct QSqrt2 {
    pub a: Rational,
    pub b: Rational,
}

impl QSqrt2 {
    pub fn rational(a: Rational) -> Self {
        QSqrt2 {
            a,
            b: Rational::zero(),
        }
    }

    pub fn integer(v: i64) -> Self {
        Self::rational(rat(v))
    }

    /// `v / sqrt(2) = (v/2) sqrt(2)`.
    pub fn over_sqrt2(v: i64) -> Self {
        QSqrt2 {
            a: Rational::zero(),
            b: Rational::new(v.into(), 2.into()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }
}

impl Add for &QSqrt2 {
    type Output = QSqrt2;
    fn add(self, rhs: &QSqrt2) -> QSqrt2 {
        QSqrt2 {
            a: &self.a + &rhs.a,
            b: &self.b + &rhs.b,
        }
    }
}

impl Mul for &QSqrt2 {
    type Output = QSqrt2;
    fn mul(self, rhs: &QSqrt2) -> QSqrt2 {
        QSqrt2 {
            a: &self.a * &rhs.a + rat(2) * &self.b * &rhs.b,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
        }
    }
}

impl Neg for &QSqrt2 {
    type Output = QSqrt2;
    fn neg(self) -> QSqrt2 {
        QSqrt2 {
            a: -self.a.clone(),
            b: -self.b.clone(),
        }
    }
}

impl fmt::Display for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", format_rational(&self.a)),
            (true, false) => write!(f, "{}*r2", format_rational(&self.b)),
            (false, false) => write!(f, "{}+{}*r2", format_rational(&self.a), format_rational(&self.b)),
        }
    }
}

/// Row scale of a displayed model matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowScale {
    One,
    InvSqrt2,
}

/// Square matrix over `Q(sqrt 2)` acting on `R^{2n}` with coordinates
/// `(x_1..x_n, y_1..y_n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModelMatrix {
    size: usize,
    entries: Vec<QSqrt2>,
}

impl ModelMatrix {
    /// Integer rows, each multiplied by its scale.
    pub fn from_scaled(rows: &[Vec<i64>], scales: &[RowScale]) -> Result<Self> {
        let size = rows.len();
        if scales.len() != size || rows.iter().any(|r| r.len() != size) {
            return Err(Error::SizeMismatch("model matrix must be square with one scale per row".into()));
        }
        let entries = rows
            .iter()
            .zip(scales)
            .flat_map(|(r, s)| {
                r.iter().map(move |&v| match s {
                    RowScale::One => QSqrt2::integer(v),
                    RowScale::InvSqrt2 => QSqrt2::over_sqrt2(v),
                })
            })
            .collect();
        Ok(ModelMatrix { size, entries })
    }

    fn uniform<const S: usize>(rows: [[i64; S]; S], scale: RowScale) -> Self {
        let rows: Vec<Vec<i64>> = rows.iter().map(|r| r.to_vec()).collect();
        Self::from_scaled(&rows, &vec![scale; S]).expect("square literal")
    }

    pub fn identity(size: usize) -> Self {
        Self::permutation(&(0..size).collect::<Vec<_>>()).expect("identity is a permutation")
    }

    /// `(P v)_i = v_{perm[i]}`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let size = perm.len();
        let mut seen = vec![false; size];
        for &p in perm {
            if p >= size || seen[p] {
                return Err(Error::Invalid(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        let mut entries = vec![QSqrt2::default(); size * size];
        for (i, &p) in perm.iter().enumerate() {
            entries[i * size + p] = QSqrt2::integer(1);
        }
        Ok(ModelMatrix { size, entries })
    }

    /// The 45 degree rotation `[[1, 1], [-1, 1]] / sqrt 2` repeated on the
    /// coordinate pairs `(1,2), (3,4), ...` of `R^{2n}`.
    pub fn rho(n: usize) -> Self {
        let size = 2 * n;
        let mut entries = vec![QSqrt2::default(); size * size];
        for b in 0..n {
            let (i, j) = (2 * b, 2 * b + 1);
            entries[i * size + i] = QSqrt2::over_sqrt2(1);
            entries[i * size + j] = QSqrt2::over_sqrt2(1);
            entries[j * size + i] = QSqrt2::over_sqrt2(-1);
            entries[j * size + j] = QSqrt2::over_sqrt2(1);
        }
        ModelMatrix { size, entries }
    }

    pub fn rho_inv(n: usize) -> Self {
        Self::rho(n).transpose()
    }

    /// The 45 degree rotation in every plane `(x_i, y_i)`, sending
    /// `(x_i, y_i)` to `((x_i + y_i), (y_i - x_i)) / sqrt 2`. At `n = 1`
    /// this is `rho(1)`.
    pub fn plane_rotation(n: usize) -> Self {
        let size = 2 * n;
        let mut entries = vec![QSqrt2::default(); size * size];
        for i in 0..n {
            let (xi, yi) = (i, n + i);
            entries[xi * size + xi] = QSqrt2::over_sqrt2(1);
            entries[xi * size + yi] = QSqrt2::over_sqrt2(1);
            entries[yi * size + xi] = QSqrt2::over_sqrt2(-1);
            entries[yi * size + yi] = QSqrt2::over_sqrt2(1);
        }
        ModelMatrix { size, entries }
    }

    /// Coordinate switch on `R^2`.
    pub fn sigma() -> Self {
        Self::permutation(&[1, 0]).expect("valid permutation")
    }

    /// Cycle on the last three coordinates of `R^4`: `(x,y,z,t) -> (x,z,t,y)`.
    pub fn tau() -> Self {
        Self::permutation(&[0, 2, 3, 1]).expect("valid permutation")
    }

    pub fn tau_inv() -> Self {
        Self::permutation(&[0, 3, 1, 2]).expect("valid permutation")
    }

    /// The off-diagonal matrices of the `n = 2` solution, indexed from 1.
    pub fn rho_ij(i: usize, j: usize) -> Result<Self> {
        use RowScale::InvSqrt2 as S;
        let rows = match (i, j) {
            (1, 2) => [[0, 1, 1, 0], [1, 0, 0, -1], [0, 1, -1, 0], [1, 0, 0, 1]],
            (1, 3) => [[1, 0, 1, 0], [0, 1, 0, 1], [1, 0, -1, 0], [0, 1, 0, -1]],
            (2, 3) => [[0, 0, 1, 1], [1, -1, 0, 0], [0, 0, 1, -1], [1, 1, 0, 0]],
            (2, 1) => [[0, 1, 1, 0], [1, 0, 0, 1], [0, 1, -1, 0], [1, 0, 0, -1]],
            (3, 1) => [[1, 0, -1, 0], [0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, -1]],
            (3, 2) => [[0, 0, 1, 1], [1, 1, 0, 0], [0, 0, 1, -1], [1, -1, 0, 0]],
            _ => return Err(Error::Invalid(format!("no off-diagonal model matrix at ({i},{j})"))),
        };
        Ok(Self::uniform(rows, S))
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &QSqrt2 {
        &self.entries[i * self.size + j]
    }

    pub fn transpose(&self) -> Self {
        let s = self.size;
        let entries = (0..s * s).map(|k| self.get(k % s, k / s).clone()).collect();
        ModelMatrix { size: s, entries }
    }

    pub fn mul(&self, other: &ModelMatrix) -> Result<Self> {
        if self.size != other.size {
            return Err(Error::SizeMismatch("model matrices of different size".into()));
        }
        let s = self.size;
        let mut entries = Vec::with_capacity(s * s);
        for i in 0..s {
            for j in 0..s {
                let mut acc = QSqrt2::default();
                for k in 0..s {
                    acc = &acc + &(self.get(i, k) * other.get(k, j));
                }
                entries.push(acc);
            }
        }
        Ok(ModelMatrix { size: s, entries })
    }

    pub fn is_orthogonal(&self) -> bool {
        match self.mul(&self.transpose()) {
            Ok(p) => p == Self::identity(self.size),
            Err(_) => false,
        }
    }
}

impl fmt::Display for ModelMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.size)
            .map(|i| {
                (0..self.size)
                    .map(|j| self.get(i, j).to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        write!(f, "[{}]", rows.join("; "))
    }
}

/// `xi(U) = sum_i (Ux)_i^2 - sum_i (Uy)_i^2` as a polynomial in the `2n`
/// sphere coordinates. Each squared row must have rational coefficients.
pub fn xi_polynomial(u: &ModelMatrix) -> Result<SparsePolynomial> {
    let s = u.size();
    if s == 0 || !s.is_multiple_of(2) {
        return Err(Error::SizeMismatch(format!("xi needs an even size, got {s}")));
    }
    let n = s / 2;
    let mut out = SparsePolynomial::zero(s);
    for row in 0..s {
        let mut sq = SparsePolynomial::zero(s);
        for j in 0..s {
            for k in 0..s {
                let c = u.get(row, j) * u.get(row, k);
                if c.is_zero() {
                    continue;
                }
                let mut e = vec![0u32; s];
                e[j] += 1;
                e[k] += 1;
                sq = &sq + &monomial_q2(s, c, e, row)?;
            }
        }
        out = if row < n { &out + &sq } else { &out - &sq };
    }
    Ok(out)
}

fn monomial_q2(nvars: usize, c: QSqrt2, e: Vec<u32>, row: usize) -> Result<SparsePolynomial> {
    if !c.is_rational() {
        return Err(Error::IrrationalCoefficient { row });
    }
    Ok(SparsePolynomial::monomial(nvars, c.a, e))
}

/// The array `U^K` solving the global modelling problem for `n = 1, 2`.
pub fn model_solution(n: usize) -> Result<Vec<Vec<ModelMatrix>>> {
    match n {
        1 => Ok(vec![
            vec![ModelMatrix::identity(2), ModelMatrix::rho(1)],
            vec![ModelMatrix::rho_inv(1), ModelMatrix::identity(2)],
        ]),
        2 => Ok(vec![
            vec![ModelMatrix::identity(4), ModelMatrix::rho_ij(1, 2)?, ModelMatrix::rho_ij(1, 3)?],
            vec![ModelMatrix::rho_ij(2, 1)?, ModelMatrix::tau(), ModelMatrix::rho_ij(2, 3)?],
            vec![ModelMatrix::rho_ij(3, 1)?, ModelMatrix::rho_ij(3, 2)?, ModelMatrix::tau_inv()],
        ]),
        _ => Err(Error::Invalid(format!("no model solution is known for n={n}"))),
    }
}

pub fn xi_matrix(us: &[Vec<ModelMatrix>]) -> Result<Vec<Vec<SparsePolynomial>>> {
    us.iter()
        .map(|row| row.iter().map(xi_polynomial).collect())
        .collect()
}

/// `E[prod_k xi(U_k)^{e_k}]` over `S^{2n-1}`, exact.
pub fn exact_model_moment(us: &[ModelMatrix], exps: &[u32]) -> Result<Rational> {
    if us.len() != exps.len() {
        return Err(Error::SizeMismatch("one exponent per model matrix".into()));
    }
    let Some(first) = us.first() else {
        return Ok(Rational::one());
    };
    let s = first.size();
    let mut acc = SparsePolynomial::one(s);
    for (u, &e) in us.iter().zip(exps) {
        if u.size() != s {
            return Err(Error::SizeMismatch("model matrices of different size".into()));
        }
        if e > 0 {
            acc = &acc * &xi_polynomial(u)?.pow(e);
        }
    }
    acc.sphere_average(s as u64)
}

/// The group generated by `gens`, by breadth-first closure. Fails beyond `cap`
/// elements.
pub fn group_closure(gens: &[ModelMatrix], cap: usize) -> Result<Vec<ModelMatrix>> {
    let Some(g0) = gens.first() else {
        return Err(Error::Invalid("no generators".into()));
    };
    let id = ModelMatrix::identity(g0.size());
    let mut seen: HashSet<ModelMatrix> = HashSet::from([id.clone()]);
    let mut order = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(m) = queue.pop_front() {
        for g in gens {
            let p = m.mul(g)?;
            if seen.insert(p.clone()) {
                if seen.len() > cap {
                    return Err(Error::ResourceCap {
                        requested: seen.len() as u128,
                        cap: cap as u128,
                    });
                }
                order.push(p.clone());
                queue.push_back(p);
            }
        }
    }
    Ok(order)
}

/// Multiset check for the dihedral group generated by `rho` and `sigma` on
/// `R^2`: sixteen elements whose `xi` values are `+-(x^2-y^2)` and `+-2xy`,
/// four times each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DihedralReport {
    pub order: usize,
    pub multiplicities: Vec<(SparsePolynomial, usize)>,
    pub pass: bool,
}

pub fn dihedral_check() -> Result<DihedralReport> {
    let group = group_closure(&[ModelMatrix::rho(1), ModelMatrix::sigma()], 64)?;
    let mut counts: std::collections::BTreeMap<SparsePolynomial, usize> = Default::default();
    for g in &group {
        *counts.entry(xi_polynomial(g)?).or_default() += 1;
    }
    let x = SparsePolynomial::var(2, 0);
    let y = SparsePolynomial::var(2, 1);
    let c = &x.pow(2) - &y.pow(2);
    let s = (&x * &y).scale(&rat(2));
    let expected: Vec<SparsePolynomial> = vec![c.clone(), -&c, s.clone(), -&s];
    let pass = group.len() == 16
        && counts.len() == 4
        && expected.iter().all(|p| counts.get(p) == Some(&4));
    Ok(DihedralReport {
        order: group.len(),
        multiplicities: counts.into_iter().collect(),
        pass,
    })
}
