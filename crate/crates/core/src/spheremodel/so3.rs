use std::f64::consts::PI;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{dihedral_check, exact_model_moment, model_solution, xi_matrix, DihedralReport};
use super::poly::{sphere_moment, SparsePolynomial};
use crate::error::{Error, Result};
use crate::exactnum::{format_rational, rat, Rational};
use crate::integrals::{i_value, Method};
use crate::matrix::ExponentMatrix;

/// Default bound on the total degree accepted by [`integrate_so3`].
pub const DEFAULT_SO3_DEGREE: u64 = 12;

/// The rotation of `R^3` attached to `(x, y, z, t)` on `S^3`, entrywise as
/// quadratic forms.
pub fn euler_rodrigues_matrix() -> Vec<Vec<SparsePolynomial>> {
    let v = [0, 1, 2, 3].map(|i| SparsePolynomial::var(4, i));
    let [x, y, z, t] = &v;
    let sq = |p: &SparsePolynomial| p.pow(2);
    let two = |p: SparsePolynomial| p.scale(&rat(2));
    vec![
        vec![
            &(&(&sq(x) + &sq(y)) - &sq(z)) - &sq(t),
            two(&(y * z) - &(x * t)),
            two(&(x * z) + &(y * t)),
        ],
        vec![
            two(&(x * t) + &(y * z)),
            &(&(&sq(x) + &sq(z)) - &sq(y)) - &sq(t),
            two(&(z * t) - &(x * y)),
        ],
        vec![
            two(&(y * t) - &(x * z)),
            two(&(x * y) + &(z * t)),
            &(&(&sq(x) + &sq(t)) - &sq(y)) - &sq(z),
        ],
    ]
}

/// `x^2 + y^2 + z^2 + t^2`.
pub fn quaternion_norm() -> SparsePolynomial {
    (0..4).fold(SparsePolynomial::zero(4), |acc, i| &acc + &SparsePolynomial::var(4, i).pow(2))
}

/// Polynomial determinant of a 3 x 3 polynomial matrix.
pub fn det3(m: &[Vec<SparsePolynomial>]) -> SparsePolynomial {
    let minor = |a: usize, b: usize, c: usize, d: usize| &(&m[1][a] * &m[2][b]) - &(&m[1][c] * &m[2][d]);
    let t0 = &m[0][0] * &minor(1, 2, 2, 1);
    let t1 = &m[0][1] * &minor(0, 2, 2, 0);
    let t2 = &m[0][2] * &minor(0, 1, 1, 0);
    &(&t0 - &t1) + &t2
}

/// `int_{SO_3} prod u_ij^{a_ij} du`, by expanding the monomial in the
/// Euler-Rodrigues parametrization and integrating over `S^3`.
pub fn integrate_so3(a: &ExponentMatrix) -> Result<Rational> {
    integrate_so3_capped(a, DEFAULT_SO3_DEGREE)
}

pub fn integrate_so3_capped(a: &ExponentMatrix, max_degree: u64) -> Result<Rational> {
    if a.rows() != 3 || a.cols() != 3 {
        return Err(Error::SizeMismatch(format!(
            "SO_3 monomials need a 3 x 3 exponent matrix, got {} x {}",
            a.rows(),
            a.cols()
        )));
    }
    if a.total() > max_degree {
        return Err(Error::ResourceCap {
            requested: a.total() as u128,
            cap: max_degree as u128,
        });
    }
    let er = euler_rodrigues_matrix();
    let mut acc = SparsePolynomial::one(4);
    for i in 0..3 {
        for j in 0..3 {
            let e = a.get(i, j) as u32;
            if e > 0 {
                acc = &acc * &er[i][j].pow(e);
            }
        }
    }
    acc.sphere_average(4)
}

/// `int_{SO_2} prod u_ij^{a_ij}` for `u = [[cos t, sin t], [-sin t, cos t]]`.
pub fn circle_moment(a: &ExponentMatrix) -> Result<Rational> {
    if a.rows() != 2 || a.cols() != 2 {
        return Err(Error::SizeMismatch("circle moments need a 2 x 2 exponent matrix".into()));
    }
    let p = a.get(0, 0) + a.get(1, 1);
    let q = a.get(0, 1) + a.get(1, 0);
    let sign = if a.get(1, 0).is_multiple_of(2) { rat(1) } else { rat(-1) };
    Ok(sign * sphere_moment(&[p, q], 2)?)
}

/// The same integral by the trapezoid rule on `points` equally spaced
/// angles, exact for trigonometric polynomials of degree below `points`.
pub fn circle_quadrature(a: &ExponentMatrix, points: usize) -> f64 {
    let p = (a.get(0, 0) + a.get(1, 1)) as i32;
    let q = a.get(0, 1) as i32;
    let r = a.get(1, 0) as i32;
    let h = 2.0 * PI / points as f64;
    let sum: f64 = (0..points)
        .map(|k| {
            let (s, c) = (k as f64 * h).sin_cos();
            c.powi(p) * s.powi(q) * (-s).powi(r)
        })
        .sum();
    sum / points as f64
}

/// `int_{O_2} u11^a u21^b u12^c u22^d` by the trapezoid rule over both
/// cosets `[[cos, sin], [-sin, cos]]` and `[[cos, sin], [sin, -cos]]`.
pub fn o2_quadrature(a: u64, b: u64, c: u64, d: u64, points: usize) -> f64 {
    let h = 2.0 * PI / points as f64;
    let (a, b, c, d) = (a as i32, b as i32, c as i32, d as i32);
    let sum: f64 = (0..points)
        .map(|k| {
            let (s, co) = (k as f64 * h).sin_cos();
            let rot = co.powi(a) * (-s).powi(b) * s.powi(c) * co.powi(d);
            let refl = co.powi(a) * s.powi(b) * s.powi(c) * (-co).powi(d);
            rot + refl
        })
        .sum();
    sum / (2 * points) as f64
}

/// All `rows x cols` exponent matrices with total degree at most `max_degree`.
pub fn exponent_patterns(rows: usize, cols: usize, max_degree: u64) -> Vec<ExponentMatrix> {
    fn go(slots: usize, left: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cur.len() == slots {
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur.push(v);
            go(slots, left - v, cur, out);
            cur.pop();
        }
    }
    let mut flat = Vec::new();
    go(rows * cols, max_degree, &mut Vec::new(), &mut flat);
    flat.into_iter()
        .map(|v| ExponentMatrix::from_rows(v.chunks(cols).map(|c| c.to_vec()).collect()).expect("rectangular"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelBattery {
    pub n: usize,
    /// `xi(U^K)` equals the rotation matrix pattern as polynomials.
    pub polynomial_identity: bool,
    /// Row norms and determinant of the pattern (Euler-Rodrigues at `n = 2`,
    /// `[[c, s], [-s, c]]` at `n = 1`).
    pub norm_identities: bool,
    pub dihedral: Option<DihedralReport>,
    pub patterns: usize,
    /// Patterns where `exact_model_moment` differs from the group integral.
    pub moment_failures: usize,
    /// Admissible patterns also compared with the `O_{n+1}` integral.
    pub admissible_checked: usize,
    pub admissible_failures: usize,
    pub counterexamples: Vec<String>,
    pub pass: bool,
}

/// Exact checks of the modelling solution at `n = 1` or `n = 2` for every
/// exponent pattern of total degree at most `max_degree`.
pub fn model_battery(n: usize, max_degree: u64) -> Result<ModelBattery> {
    let sol = model_solution(n)?;
    let xi = xi_matrix(&sol)?;
    let dim = n + 1;
    let (polynomial_identity, norm_identities, dihedral) = match n {
        1 => {
            let pattern_ok = xi[0][0] == xi[1][1] && xi[0][1] == -&xi[1][0];
            let norm2 = (&SparsePolynomial::var(2, 0).pow(2) + &SparsePolynomial::var(2, 1).pow(2)).pow(2);
            let norm_ok = &xi[0][0].pow(2) + &xi[0][1].pow(2) == norm2
                && &(&xi[0][0] * &xi[1][1]) - &(&xi[0][1] * &xi[1][0]) == norm2;
            (pattern_ok, norm_ok, Some(dihedral_check()?))
        }
        _ => {
            let er = euler_rodrigues_matrix();
            let norm2 = quaternion_norm().pow(2);
            let rows_ok = (0..3).all(|i| er[i].iter().fold(SparsePolynomial::zero(4), |acc, p| &acc + &p.pow(2)) == norm2);
            let cols_ok = (0..3).all(|j| (0..3).fold(SparsePolynomial::zero(4), |acc, i| &acc + &er[i][j].pow(2)) == norm2);
            let det_ok = det3(&er) == quaternion_norm().pow(3);
            (xi == er, rows_ok && cols_ok && det_ok, None)
        }
    };

    let flat: Vec<_> = sol.iter().flatten().cloned().collect();
    let patterns = exponent_patterns(dim, dim, max_degree);
    let results: Vec<(bool, Option<bool>, String)> = patterns
        .par_iter()
        .map(|a| -> Result<(bool, Option<bool>, String)> {
            let exps: Vec<u32> = a.entries().iter().map(|&e| e as u32).collect();
            let model = exact_model_moment(&flat, &exps)?;
            let group = if n == 1 { circle_moment(a)? } else { integrate_so3_capped(a, max_degree.max(DEFAULT_SO3_DEGREE))? };
            let mut note = String::new();
            if model != group {
                note = format!("{a}: model {} vs group {}", format_rational(&model), format_rational(&group));
            }
            let admissible = if a.is_admissible() {
                let o = i_value(a, dim as u64, Method::Auto)?;
                if o != group && note.is_empty() {
                    note = format!("{a}: O_{dim} {} vs group {}", format_rational(&o), format_rational(&group));
                }
                Some(o == group)
            } else {
                None
            };
            Ok((model == group, admissible, note))
        })
        .collect::<Result<_>>()?;

    let moment_failures = results.iter().filter(|r| !r.0).count();
    let admissible_checked = results.iter().filter(|r| r.1.is_some()).count();
    let admissible_failures = results.iter().filter(|r| r.1 == Some(false)).count();
    let counterexamples: Vec<String> = results
        .iter()
        .filter(|r| !r.2.is_empty())
        .take(10)
        .map(|r| r.2.clone())
        .collect();
    let pass = polynomial_identity
        && norm_identities
        && dihedral.as_ref().is_none_or(|d| d.pass)
        && moment_failures == 0
        && admissible_failures == 0;
    Ok(ModelBattery {
        n,
        polynomial_identity,
        norm_identities,
        dihedral,
        patterns: patterns.len(),
        moment_failures,
        admissible_checked,
        admissible_failures,
        counterexamples,
        pass,
    })
}

/// `E[z^p zbar^q]` for `z = x_1 + i x_2` on `S^{dim-1}`, as (real, imaginary).
pub fn disc_moment(p: u32, q: u32, dim: u64) -> Result<(Rational, Rational)> {
    let x = SparsePolynomial::var(2, 0);
    let y = SparsePolynomial::var(2, 1);
    let (re, im) = complex_power(&x, &y, p, q);
    Ok((re.sphere_average(dim)?, im.sphere_average(dim)?))
}

/// Real and imaginary parts of `(r + i s)^p (r - i s)^q`.
pub fn complex_power(r: &SparsePolynomial, s: &SparsePolynomial, p: u32, q: u32) -> (SparsePolynomial, SparsePolynomial) {
    let nv = r.nvars();
    let mut re = SparsePolynomial::one(nv);
    let mut im = SparsePolynomial::zero(nv);
    let mut step = |sign: i64| {
        let s2 = s.scale(&rat(sign));
        let new_re = &(&re * r) - &(&im * &s2);
        let new_im = &(&re * &s2) + &(&im * r);
        re = new_re;
        im = new_im;
    };
    for _ in 0..p {
        step(1);
    }
    for _ in 0..q {
        step(-1);
    }
    (re, im)
}

/// Converts an exact value for Monte Carlo comparisons.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::ratio;

    #[test]
    fn er_identities() {
        let er = euler_rodrigues_matrix();
        assert_eq!(er[0][0].to_string(), "x^2 + y^2 - z^2 - t^2");
        assert_eq!(det3(&er), quaternion_norm().pow(3));
    }

    #[test]
    fn so3_examples() {
        assert_eq!(integrate_so3(&ExponentMatrix::zeros(3, 3)).unwrap(), rat(1));
        let mut a = ExponentMatrix::zeros(3, 3);
        a.set(0, 0, 2);
        assert_eq!(integrate_so3(&a).unwrap(), ratio(1, 3));
        let d = ExponentMatrix::new(&[[2, 0, 0], [0, 2, 0], [0, 0, 2]]);
        assert_eq!(integrate_so3(&d).unwrap(), ratio(8, 105));
        let det_term = ExponentMatrix::new(&[[1, 0, 0], [0, 1, 0], [0, 0, 1]]);
        assert_eq!(integrate_so3(&det_term).unwrap(), ratio(1, 6));
        let big = ExponentMatrix::new(&[[13, 0, 0], [0, 0, 0], [0, 0, 0]]);
        assert!(matches!(integrate_so3(&big), Err(Error::ResourceCap { .. })));
    }

    #[test]
    fn so3_agrees_with_closed_forms() {
        for a in exponent_patterns(3, 3, 6) {
            if !a.is_admissible() {
                continue;
            }
            assert_eq!(integrate_so3(&a).unwrap(), i_value(&a, 3, Method::Auto).unwrap(), "{a}");
        }
    }

    #[test]
    fn circle_oracles_agree() {
        for a in exponent_patterns(2, 2, 10) {
            let exact = to_f64(&circle_moment(&a).unwrap());
            assert!((exact - circle_quadrature(&a, 64)).abs() < 1e-12, "{a}");
        }
    }

    #[test]
    fn o2_quadrature_matches_closed_form() {
        use crate::integrals::n2_closed;
        for a in exponent_patterns(2, 2, 10) {
            let (p, q, r, s) = (a.get(0, 0), a.get(1, 0), a.get(0, 1), a.get(1, 1));
            let exact = to_f64(&n2_closed(p, q, r, s));
            assert!((exact - o2_quadrature(p, q, r, s, 64)).abs() < 1e-12, "{a}");
        }
    }

    #[test]
    fn disc_moments() {
        assert_eq!(disc_moment(1, 1, 3).unwrap(), (ratio(2, 3), rat(0)));
        assert_eq!(disc_moment(2, 0, 3).unwrap(), (rat(0), rat(0)));
        assert_eq!(disc_moment(0, 0, 5).unwrap(), (rat(1), rat(0)));
    }

    #[test]
    fn batteries_pass() {
        for n in [1, 2] {
            let r = model_battery(n, 4).unwrap();
            assert!(r.pass, "{r:?}");
            assert!(r.admissible_checked > 0);
        }
    }
}
