//! Seeded Monte Carlo estimates.
//!
//! Samples are drawn in fixed-size chunks. Chunk `c` uses a ChaCha8 stream
//! seeded with `seed` on stream number `c`, and the per-chunk accumulators are
//! merged in chunk order, so results do not depend on the thread count.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::poly::sphere_moment;
use super::so3::{disc_moment, to_f64};
use crate::error::{Error, Result};
use crate::exactnum::{format_rational, Rational};
use crate::matrix::ExponentMatrix;
use crate::weingarten;

pub const CHUNK: usize = 4096;
pub const DEFAULT_SIGMAS: f64 = 4.0;
pub const DEFAULT_SEED: u64 = 42;

pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Running sums for one statistic.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Accumulator {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Accumulator {
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    pub fn merge(&mut self, other: &Accumulator) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn estimate(&self) -> Estimate {
        let n = self.count as f64;
        let mean = self.sum / n;
        let var = if self.count > 1 {
            ((self.sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            mean,
            stderr: (var / n).sqrt(),
            count: self.count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: u64,
}

impl Estimate {
    /// Distance to `target` in standard errors.
    pub fn z(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if self.stderr == 0.0 {
            if d < 1e-12 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / self.stderr
        }
    }

    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        self.z(target) <= sigmas
    }
}

/// Draws `count` samples and accumulates `stats` statistics per sample.
/// `sample` fills one value per statistic.
pub fn accumulate<F>(count: usize, seed: u64, stats: usize, sample: F) -> Vec<Accumulator>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let chunks = count.div_ceil(CHUNK);
    let per_chunk: Vec<Vec<Accumulator>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let mut accs = vec![Accumulator::default(); stats];
            let mut buf = vec![0.0; stats];
            let todo = CHUNK.min(count - c * CHUNK);
            for _ in 0..todo {
                sample(&mut rng, &mut buf);
                for (a, &v) in accs.iter_mut().zip(&buf) {
                    a.push(v);
                }
            }
            accs
        })
        .collect();
    let mut total = vec![Accumulator::default(); stats];
    for accs in &per_chunk {
        for (t, a) in total.iter_mut().zip(accs) {
            t.merge(a);
        }
    }
    total
}

/// A uniform point on `S^{dim-1}`.
pub fn sphere_point<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// A Haar-distributed element of `O_n` (or `SO_n` when `special`): QR of a
/// Gaussian matrix with the triangular factor made positive on the
/// diagonal; the special variant negates the first row when the
/// determinant is negative.
pub fn haar_matrix<R: Rng>(rng: &mut R, n: usize, special: bool) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if special && q.determinant() < 0.0 {
        q.row_mut(0).neg_mut();
    }
    q
}

/// Stored samples: `count` points of `dimension` coordinates each, flattened.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub count: usize,
    pub dimension: usize,
    pub seed: u64,
    pub points: Vec<f64>,
}

impl SampleBatch {
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dimension..(i + 1) * self.dimension]
    }

    /// Mean of `f` over the stored points.
    pub fn estimate<F: Fn(&[f64]) -> f64>(&self, f: F) -> Estimate {
        let mut acc = Accumulator::default();
        for i in 0..self.count {
            acc.push(f(self.point(i)));
        }
        acc.estimate()
    }
}

fn collect_batch<F>(count: usize, seed: u64, dimension: usize, draw: F) -> SampleBatch
where
    F: Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync,
{
    let chunks = count.div_ceil(CHUNK);
    let points: Vec<f64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let todo = CHUNK.min(count - c * CHUNK);
            (0..todo).flat_map(|_| draw(&mut rng)).collect::<Vec<_>>()
        })
        .collect();
    SampleBatch {
        count,
        dimension,
        seed,
        points,
    }
}

pub fn sphere_sample(dim: usize, count: usize, seed: u64) -> SampleBatch {
    collect_batch(count, seed, dim, |rng| sphere_point(rng, dim))
}

/// Haar samples of `O_n` (`SO_n` when `special`), each stored row-major.
pub fn haar_sample(n: usize, count: usize, seed: u64, special: bool) -> SampleBatch {
    collect_batch(count, seed, n * n, |rng| {
        let q = haar_matrix(rng, n, special);
        (0..n * n).map(|k| q[(k / n, k % n)]).collect()
    })
}

fn monomial_value(q: &DMatrix<f64>, a: &ExponentMatrix) -> f64 {
    let mut v = 1.0;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let e = a.get(i, j);
            if e > 0 {
                v *= q[(i, j)].powi(e as i32);
            }
        }
    }
    v
}

/// Streaming estimates of `E[prod u_ij^{a_ij}]` over `O_n` or `SO_n` for
/// several monomials from the same samples.
pub fn haar_moments(
    n: usize,
    monomials: &[ExponentMatrix],
    count: usize,
    seed: u64,
    special: bool,
) -> Result<Vec<Estimate>> {
    if monomials.iter().any(|a| a.rows() > n || a.cols() > n) {
        return Err(Error::SizeMismatch(format!("monomial larger than {n} x {n}")));
    }
    if count == 0 {
        return Err(Error::Invalid("sample count must be positive".into()));
    }
    let accs = accumulate(count, seed, monomials.len(), |rng, out| {
        let q = haar_matrix(rng, n, special);
        for (o, a) in out.iter_mut().zip(monomials) {
            *o = monomial_value(&q, a);
        }
    });
    Ok(accs.iter().map(Accumulator::estimate).collect())
}

/// One sampled moment against its exact value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub label: String,
    pub exact: String,
    pub target: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub z: f64,
    pub pass: bool,
}

impl MomentCheck {
    pub fn new(label: String, exact: &Rational, est: Estimate, sigmas: f64) -> Self {
        let target = to_f64(exact);
        MomentCheck {
            label,
            exact: format_rational(exact),
            target,
            estimate: est.mean,
            stderr: est.stderr,
            z: est.z(target),
            pass: est.within(target, sigmas),
        }
    }
}

/// The three degree-four moments `u11^4`, `u11^2 u12^2`, `u11^2 u22^2`.
pub fn trio_monomials() -> Vec<ExponentMatrix> {
    vec![
        ExponentMatrix::new(&[[4, 0], [0, 0]]),
        ExponentMatrix::new(&[[2, 2], [0, 0]]),
        ExponentMatrix::new(&[[2, 0], [0, 2]]),
    ]
}

/// Sampled trio moments on `O_n` against the exact Weingarten values.
pub fn haar_trio_check(n: usize, count: usize, seed: u64) -> Result<Vec<MomentCheck>> {
    let monos = trio_monomials();
    let est = haar_moments(n, &monos, count, seed, false)?;
    monos
        .iter()
        .zip(est)
        .map(|(a, e)| {
            let exact = weingarten::integral(a, n as u64)?;
            Ok(MomentCheck::new(format!("O_{n} {a}"), &exact, e, DEFAULT_SIGMAS))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawReport {
    pub n: usize,
    pub count: usize,
    pub seed: u64,
    /// `E[X^p]` for `X = sum x_i^2 - sum y_i^2` on `S^{2n-1}` against a
    /// single coordinate of `S^n`.
    pub real: Vec<MomentCheck>,
    /// Real and imaginary parts of `E[Z^p conj(Z)^q]` for `Z = sum z_i^2`
    /// against `z = x_1 + i x_2` on `S^n`.
    pub complex: Vec<MomentCheck>,
    pub pass: bool,
}

/// Samples `S^{2n-1}` and compares moments up to `max_moment`.
pub fn law_compare(n: usize, count: usize, seed: u64, max_moment: u32) -> Result<LawReport> {
    if n == 0 || count == 0 {
        return Err(Error::Invalid("law comparison needs n >= 1 and a positive count".into()));
    }
    let pairs: Vec<(u32, u32)> = (0..=max_moment)
        .flat_map(|p| (0..=max_moment - p).map(move |q| (p, q)))
        .filter(|&(p, q)| p + q >= 1)
        .collect();
    let stats = max_moment as usize + 2 * pairs.len();
    let pairs_ref = &pairs;
    let accs = accumulate(count, seed, stats, move |rng, out| {
        let v = sphere_point(rng, 2 * n);
        let (xs, ys) = v.split_at(n);
        let re: f64 = xs.iter().map(|x| x * x).sum::<f64>() - ys.iter().map(|y| y * y).sum::<f64>();
        let im: f64 = 2.0 * xs.iter().zip(ys).map(|(x, y)| x * y).sum::<f64>();
        let mut k = 0;
        for p in 1..=max_moment {
            out[k] = re.powi(p as i32);
            k += 1;
        }
        let (r, theta) = (re.hypot(im), im.atan2(re));
        for &(p, q) in pairs_ref {
            let mag = r.powi((p + q) as i32);
            let ang = theta * (p as f64 - q as f64);
            out[k] = mag * ang.cos();
            out[k + 1] = mag * ang.sin();
            k += 2;
        }
    });
    let dim = (n + 1) as u64;
    let mut real = Vec::new();
    for p in 1..=max_moment {
        let exact = sphere_moment(&[p as u64], dim)?;
        real.push(MomentCheck::new(
            format!("E[X^{p}]"),
            &exact,
            accs[p as usize - 1].estimate(),
            DEFAULT_SIGMAS,
        ));
    }
    let mut complex = Vec::new();
    for (i, &(p, q)) in pairs.iter().enumerate() {
        let (ex_re, ex_im) = disc_moment(p, q, dim)?;
        let base = max_moment as usize + 2 * i;
        complex.push(MomentCheck::new(
            format!("Re E[Z^{p} Zbar^{q}]"),
            &ex_re,
            accs[base].estimate(),
            DEFAULT_SIGMAS,
        ));
        complex.push(MomentCheck::new(
            format!("Im E[Z^{p} Zbar^{q}]"),
            &ex_im,
            accs[base + 1].estimate(),
            DEFAULT_SIGMAS,
        ));
    }
    let pass = real.iter().chain(&complex).all(|c| c.pass);
    Ok(LawReport {
        n,
        count,
        seed,
        real,
        complex,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_points_are_unit() {
        let b = sphere_sample(5, 1000, 7);
        for i in 0..b.count {
            let norm: f64 = b.point(i).iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn haar_samples_are_orthogonal() {
        for special in [false, true] {
            let b = haar_sample(4, 200, 3, special);
            for i in 0..b.count {
                let q = DMatrix::from_row_slice(4, 4, b.point(i));
                let err = (q.transpose() * &q - DMatrix::<f64>::identity(4, 4)).abs().max();
                assert!(err < 1e-12);
                if special {
                    assert!((q.determinant() - 1.0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let monos = trio_monomials();
        let a = haar_moments(3, &monos, 3 * CHUNK + 17, 11, false).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| haar_moments(3, &monos, 3 * CHUNK + 17, 11, false).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn small_haar_and_law_checks() {
        for c in haar_trio_check(3, 100_000, 42).unwrap() {
            assert!(c.pass, "{c:?}");
        }
        let r = law_compare(2, 100_000, 42, 4).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn first_moment_on_o_n() {
        let a = ExponentMatrix::new(&[[2]]);
        let e = haar_moments(5, &[a], 50_000, 1, false).unwrap()[0];
        assert!(e.within(0.2, 4.0));
    }
}
