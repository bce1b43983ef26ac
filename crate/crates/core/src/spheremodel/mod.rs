//! Sphere moments, the quadratic-form variables `xi(U)` over `S^{2n-1}`,
//! the exact `SO_3` oracle through the Euler-Rodrigues parametrization, and
//! Monte Carlo comparisons of laws.

pub mod model;
pub mod montecarlo;
pub mod poly;
pub mod so3;

pub use model::{
    dihedral_check, exact_model_moment, group_closure, model_solution, xi_matrix, xi_polynomial,
    DihedralReport, ModelMatrix, QSqrt2, RowScale,
};
pub use montecarlo::{
    haar_matrix, haar_moments, haar_sample, haar_trio_check, law_compare, sphere_sample, Estimate,
    LawReport, MomentCheck, SampleBatch,
};
pub use poly::{sphere_moment, SparsePolynomial};
pub use so3::{
    circle_moment, circle_quadrature, complex_power, disc_moment, euler_rodrigues_matrix, exponent_patterns,
    integrate_so3, integrate_so3_capped, model_battery, o2_quadrature, ModelBattery,
};

use crate::error::Result;
use crate::exactnum::Rational;

/// Exact law checks on `S^{2n-1}`: `E[xi(1)^p]` against a coordinate of
/// `S^n`, and `E[Z^p conj(Z)^q]` for `Z = xi(1) + i xi(R)` against
/// `z = x_1 + i x_2` on `S^n`, where `R` rotates every `(x_i, y_i)` plane.
/// Returns the failing `(p, q)` pairs.
pub fn law_exact(n: usize, max_moment: u32) -> Result<Vec<(u32, u32)>> {
    let re = xi_polynomial(&ModelMatrix::identity(2 * n))?;
    let im = xi_polynomial(&ModelMatrix::plane_rotation(n))?;
    let sphere = 2 * n as u64;
    let target_dim = n as u64 + 1;
    let mut failures = Vec::new();
    for p in 0..=max_moment {
        for q in 0..=max_moment - p {
            let (zr, zi) = complex_power(&re, &im, p, q);
            let got = (zr.sphere_average(sphere)?, zi.sphere_average(sphere)?);
            if got != disc_moment(p, q, target_dim)? {
                failures.push((p, q));
            }
        }
    }
    Ok(failures)
}

/// `E[xi(U)^p]` for `p = 1..=max_moment`.
pub fn xi_moments(u: &ModelMatrix, max_moment: u32) -> Result<Vec<Rational>> {
    (1..=max_moment).map(|p| exact_model_moment(std::slice::from_ref(u), &[p])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::one_row;

    #[test]
    fn exact_laws_hold() {
        for n in 1..=3 {
            assert_eq!(law_exact(n, 6).unwrap(), Vec::<(u32, u32)>::new(), "n={n}");
        }
    }

    #[test]
    fn real_part_and_rotation_jointly() {
        let n = 2;
        let us = [ModelMatrix::identity(2 * n), ModelMatrix::plane_rotation(n)];
        for p in 0..=4u32 {
            for q in 0..=4 - p {
                let got = exact_model_moment(&us, &[p, q]).unwrap();
                assert_eq!(got, one_row(&[p as u64, q as u64], n as u64 + 1), "p={p} q={q}");
            }
        }
    }

    #[test]
    fn law_invariant_under_generator_products() {
        let gens = [
            ModelMatrix::rho(2),
            ModelMatrix::tau(),
            ModelMatrix::rho_ij(1, 2).unwrap(),
            ModelMatrix::rho_ij(3, 1).unwrap(),
            ModelMatrix::permutation(&[1, 0, 3, 2]).unwrap(),
        ];
        let base = xi_moments(&ModelMatrix::identity(4), 6).unwrap();
        let mut checked = 0;
        for a in &gens {
            for b in &gens {
                let u = a.mul(b).unwrap();
                if let Ok(m) = xi_moments(&u, 6) {
                    assert_eq!(m, base);
                    checked += 1;
                }
            }
        }
        assert!(checked > 10);
    }
}
