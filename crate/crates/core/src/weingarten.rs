//! Gram matrices over Brauer diagrams, exact Weingarten values and the
//! direct evaluator for `I(a)`.
//!
//! `W_{kn}(pi, sigma)` only depends on the orbit of the pair `(pi, sigma)`
//! under relabelings of `{1..2k}`, and that orbit is recorded by the block
//! sizes of the join `pi v sigma`. Each table therefore solves one small
//! integer system over these classes with fraction-free (Bareiss)
//! elimination, after invertibility of the full Gram matrix has been
//! certified by a rank computation modulo a large prime. When that rank is
//! deficient the exact rank is computed by Bareiss elimination of the whole
//! Gram matrix over the integers.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use lru::LruCache;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{dfact, format_rational, parse_rational, rat, Rational};
use crate::matrix::ExponentMatrix;
use crate::pairings::{delta, enumerate_pairings, pairing_count, Pairing};

/// Largest Gram matrix (number of pairings) the evaluator will build.
pub const MAX_GRAM_SIZE: u128 = 1000;

/// Exact Bareiss rank is attempted up to this size; beyond it the rank of
/// a deficient Gram matrix is the maximum over several primes.
const EXACT_RANK_LIMIT: usize = 120;

const PRIMES: [u64; 3] = [
    2_305_843_009_213_693_951,
    4_611_686_018_427_387_847,
    9_223_372_036_854_775_783,
];

/// Canonical pairings of `{1..2k}` with the join block count and join class
/// of every ordered pair.
#[derive(Debug)]
pub struct JoinTable {
    pub k: usize,
    pub pairings: Vec<Pairing>,
    blocks: Vec<u8>,
    class: Vec<u8>,
    /// Class `c` is the partition of `k` given by the half block sizes.
    pub classes: Vec<Vec<u8>>,
}

fn join_shape(p1: &Pairing, p2: &Pairing) -> Vec<u8> {
    let size = 2 * p1.k();
    let mut uf = UnionFind::<usize>::new(size);
    for i in 0..size {
        uf.union(i, p1.partner(i));
        uf.union(i, p2.partner(i));
    }
    let mut counts: HashMap<usize, u8> = HashMap::new();
    for label in uf.into_labeling() {
        *counts.entry(label).or_insert(0) += 1;
    }
    let mut shape: Vec<u8> = counts.into_values().map(|c| c / 2).collect();
    shape.sort_unstable_by(|a, b| b.cmp(a));
    shape
}

impl JoinTable {
    fn build(k: usize) -> Result<Self> {
        let count = pairing_count(k);
        if count > MAX_GRAM_SIZE {
            return Err(Error::ResourceCap {
                requested: count,
                cap: MAX_GRAM_SIZE,
            });
        }
        let pairings = enumerate_pairings(k)?;
        let size = pairings.len();
        let shapes: Vec<Vec<u8>> = (0..size * size)
            .into_par_iter()
            .map(|idx| join_shape(&pairings[idx / size], &pairings[idx % size]))
            .collect();
        let mut classes: Vec<Vec<u8>> = Vec::new();
        let mut ids: HashMap<Vec<u8>, u8> = HashMap::new();
        let mut class = Vec::with_capacity(size * size);
        let mut blocks = Vec::with_capacity(size * size);
        for shape in shapes {
            blocks.push(shape.len() as u8);
            let id = *ids.entry(shape.clone()).or_insert_with(|| {
                classes.push(shape);
                (classes.len() - 1) as u8
            });
            class.push(id);
        }
        Ok(JoinTable {
            k,
            pairings,
            blocks,
            class,
            classes,
        })
    }

    pub fn size(&self) -> usize {
        self.pairings.len()
    }

    pub fn blocks(&self, i: usize, j: usize) -> u8 {
        self.blocks[i * self.size() + j]
    }

    pub fn class(&self, i: usize, j: usize) -> usize {
        self.class[i * self.size() + j] as usize
    }

    pub fn index_of(&self, p: &Pairing) -> Option<usize> {
        self.pairings.iter().position(|q| q == p)
    }
}

/// `G_{kn}(pi, sigma) = n^{|pi v sigma|}` over the canonical pairing order.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub k: usize,
    pub n: u64,
    joins: Arc<JoinTable>,
    powers: Vec<BigInt>,
}

impl GramMatrix {
    fn new(joins: Arc<JoinTable>, n: u64) -> Self {
        let mut powers = Vec::with_capacity(joins.k + 1);
        let mut p = BigInt::one();
        for _ in 0..=joins.k {
            powers.push(p.clone());
            p *= n;
        }
        GramMatrix {
            k: joins.k,
            n,
            joins,
            powers,
        }
    }

    pub fn size(&self) -> usize {
        self.joins.size()
    }

    pub fn pairings(&self) -> &[Pairing] {
        &self.joins.pairings
    }

    pub fn joins(&self) -> &JoinTable {
        &self.joins
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigInt {
        &self.powers[self.joins.blocks(i, j) as usize]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.size())
            .map(|i| {
                (0..self.size())
                    .map(|j| Rational::from_integer(self.entry(i, j).clone()))
                    .collect()
            })
            .collect()
    }

    fn integer_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.size())
            .map(|i| (0..self.size()).map(|j| self.entry(i, j).clone()).collect())
            .collect()
    }

    fn rank_mod(&self, p: u64) -> usize {
        let size = self.size();
        let pw: Vec<u64> = self
            .powers
            .iter()
            .map(|x| (x % p).to_u64().expect("reduced"))
            .collect();
        let mut a: Vec<Vec<u64>> = (0..size)
            .map(|i| (0..size).map(|j| pw[self.joins.blocks(i, j) as usize]).collect())
            .collect();
        rank_mod_p(&mut a, p)
    }
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    acc
}

fn rank_mod_p(a: &mut [Vec<u64>], p: u64) -> usize {
    let size = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut row = 0;
    for col in 0..cols {
        let Some(piv) = (row..size).find(|&i| a[i][col] != 0) else {
            continue;
        };
        a.swap(row, piv);
        let inv = pow_mod(a[row][col], p - 2, p);
        let (top, rest) = a.split_at_mut(row + 1);
        let pivot_row = &top[row];
        rest.par_iter_mut().for_each(|r| {
            let f = mul_mod(r[col], inv, p);
            if f != 0 {
                for j in col..cols {
                    let sub = mul_mod(f, pivot_row[j], p);
                    r[j] = if r[j] >= sub { r[j] - sub } else { r[j] + p - sub };
                }
            }
        });
        row += 1;
    }
    row
}

pub fn gram(k: usize, n: u64) -> Result<GramMatrix> {
    Ok(GramMatrix::new(join_table(k)?, n))
}

/// In-place fraction-free LU of an integer matrix with row pivoting.
/// Below the diagonal the multipliers of each step are kept; on and above
/// it sits the final fraction-free upper factor.
#[derive(Debug)]
pub(crate) struct Bareiss {
    lu: Vec<Vec<BigInt>>,
    perm: Vec<usize>,
}

impl Bareiss {
    /// Returns the rank on failure.
    pub(crate) fn factor(mut a: Vec<Vec<BigInt>>) -> std::result::Result<Self, usize> {
        let size = a.len();
        let mut perm: Vec<usize> = (0..size).collect();
        let mut prev = BigInt::one();
        let mut row = 0;
        let mut singular = false;
        for col in 0..size {
            let Some(p) = (row..size).find(|&i| !a[i][col].is_zero()) else {
                singular = true;
                continue;
            };
            a.swap(row, p);
            perm.swap(row, p);
            let (top, rest) = a.split_at_mut(row + 1);
            let pivot_row = &top[row];
            let pivot = &pivot_row[col];
            rest.par_iter_mut().for_each(|r| {
                let m = r[col].clone();
                for j in col + 1..size {
                    let v = (pivot * &r[j] - &m * &pivot_row[j]) / &prev;
                    r[j] = v;
                }
            });
            prev = a[row][col].clone();
            row += 1;
        }
        if singular {
            return Err(row);
        }
        Ok(Bareiss { lu: a, perm })
    }

    fn size(&self) -> usize {
        self.lu.len()
    }

    /// The last pivot; `solve_scaled` returns solutions multiplied by it.
    pub(crate) fn scale(&self) -> &BigInt {
        &self.lu[self.size() - 1][self.size() - 1]
    }

    /// Integer `X` with `A X = scale() * b`.
    pub(crate) fn solve_scaled(&self, b: &[BigInt]) -> Vec<BigInt> {
        let size = self.size();
        let mut y: Vec<BigInt> = self.perm.iter().map(|&i| b[i].clone()).collect();
        let mut prev = BigInt::one();
        for k in 0..size {
            let pivot = &self.lu[k][k];
            let yk = y[k].clone();
            for i in k + 1..size {
                y[i] = (pivot * &y[i] - &self.lu[i][k] * &yk) / &prev;
            }
            prev = pivot.clone();
        }
        let d = self.scale().clone();
        let mut x = vec![BigInt::zero(); size];
        for i in (0..size).rev() {
            let mut acc = &d * &y[i];
            for j in i + 1..size {
                acc -= &self.lu[i][j] * &x[j];
            }
            x[i] = acc / &self.lu[i][i];
        }
        x
    }

    /// `x` with `A x = b` over the rationals.
    pub(crate) fn solve(&self, b: &[BigInt]) -> Vec<Rational> {
        let d = self.scale().clone();
        self.solve_scaled(b)
            .into_iter()
            .map(|x| Rational::new(x, d.clone()))
            .collect()
    }
}

/// `W_{kn}` stored as one value per join class.
#[derive(Debug)]
pub struct WeingartenTable {
    gram: GramMatrix,
    rank: OnceLock<usize>,
    values: OnceLock<Result<Arc<Vec<Rational>>>>,
    seeded: Mutex<Option<Vec<Rational>>>,
}

impl WeingartenTable {
    fn new(gram: GramMatrix) -> Self {
        WeingartenTable {
            gram,
            rank: OnceLock::new(),
            values: OnceLock::new(),
            seeded: Mutex::new(None),
        }
    }

    pub fn k(&self) -> usize {
        self.gram.k
    }

    pub fn n(&self) -> u64 {
        self.gram.n
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    pub fn pairings(&self) -> &[Pairing] {
        self.gram.pairings()
    }

    /// Rank of `G_{kn}`. Full rank modulo a prime certifies invertibility.
    pub fn rank(&self) -> usize {
        *self.rank.get_or_init(|| {
            let size = self.gram.size();
            let mut best = 0;
            for &p in &PRIMES {
                best = best.max(self.gram.rank_mod(p));
                if best == size {
                    return size;
                }
            }
            if size <= EXACT_RANK_LIMIT {
                match Bareiss::factor(self.gram.integer_rows()) {
                    Ok(_) => size,
                    Err(r) => r,
                }
            } else {
                best
            }
        })
    }

    pub fn is_singular(&self) -> bool {
        self.rank() < self.gram.size()
    }

    fn check_invertible(&self) -> Result<()> {
        let rank = self.rank();
        if rank < self.gram.size() {
            return Err(Error::GramSingular {
                k: self.k(),
                n: self.n(),
                rank,
                size: self.gram.size(),
            });
        }
        Ok(())
    }

    /// One value of `W_{kn}` per join class, indexed like `JoinTable::classes`.
    pub fn class_values(&self) -> Result<Arc<Vec<Rational>>> {
        self.values.get_or_init(|| self.compute_values()).clone()
    }

    fn compute_values(&self) -> Result<Arc<Vec<Rational>>> {
        self.check_invertible()?;
        if let Some(seed) = self.seeded.lock().expect("poisoned").take() {
            if self.solves_first_column(&seed) {
                return Ok(Arc::new(seed));
            }
        }
        let joins = self.gram.joins();
        let size = joins.size();
        let m = joins.classes.len();
        // representative rho_c with class(rho_c, sigma_0) = c
        let mut rep = vec![usize::MAX; m];
        for pi in 0..size {
            let c = joins.class(pi, 0);
            if rep[c] == usize::MAX {
                rep[c] = pi;
            }
        }
        let mut a = vec![vec![BigInt::zero(); m]; m];
        for (c, row) in a.iter_mut().enumerate() {
            for pi in 0..size {
                row[joins.class(pi, 0)] += self.gram.entry(rep[c], pi);
            }
        }
        let identity = joins.class(0, 0);
        let b: Vec<BigInt> = (0..m)
            .map(|c| if c == identity { BigInt::one() } else { BigInt::zero() })
            .collect();
        let factor = Bareiss::factor(a).map_err(|rank| Error::GramSingular {
            k: self.k(),
            n: self.n(),
            rank,
            size: m,
        })?;
        let values = factor.solve(&b);
        if !self.solves_first_column(&values) {
            return Err(Error::Invalid(format!(
                "exact check G*W = I failed for k={}, n={}",
                self.k(),
                self.n()
            )));
        }
        Ok(Arc::new(values))
    }

    /// `G x = e_0` where `x[pi] = values[class(pi, sigma_0)]`.
    fn solves_first_column(&self, values: &[Rational]) -> bool {
        let joins = self.gram.joins();
        if values.len() != joins.classes.len() {
            return false;
        }
        let (scaled, denom) = common_denominator(values);
        let size = joins.size();
        (0..size).into_par_iter().all(|i| {
            let mut acc = BigInt::zero();
            for pi in 0..size {
                acc += self.gram.entry(i, pi) * &scaled[joins.class(pi, 0)];
            }
            acc == if i == 0 { denom.clone() } else { BigInt::zero() }
        })
    }

    pub fn entry(&self, pi: usize, sigma: usize) -> Result<Rational> {
        let values = self.class_values()?;
        Ok(values[self.gram.joins().class(pi, sigma)].clone())
    }

    /// Column `sigma` of `W_{kn}`.
    pub fn column(&self, sigma: usize) -> Result<Vec<Rational>> {
        let values = self.class_values()?;
        let joins = self.gram.joins();
        Ok((0..joins.size())
            .map(|pi| values[joins.class(pi, sigma)].clone())
            .collect())
    }

    /// `sum_{pi in left, sigma in right} W(pi, sigma)`.
    pub fn sum_over(&self, left: &[usize], right: &[usize]) -> Result<Rational> {
        let values = self.class_values()?;
        let joins = self.gram.joins();
        let mut counts = vec![0u64; values.len()];
        for &pi in left {
            for &sigma in right {
                counts[joins.class(pi, sigma)] += 1;
            }
        }
        Ok(counts
            .iter()
            .zip(values.iter())
            .filter(|(c, _)| **c > 0)
            .map(|(&c, v)| v * Rational::from_integer(BigInt::from(c)))
            .sum())
    }

    /// The full matrix `W_{kn}` (row `pi`, column `sigma`).
    pub fn full(&self) -> Result<Vec<Vec<Rational>>> {
        let values = self.class_values()?;
        let joins = self.gram.joins();
        let size = joins.size();
        Ok((0..size)
            .map(|i| (0..size).map(|j| values[joins.class(i, j)].clone()).collect())
            .collect())
    }

    /// Exact check of `G * W = I` over the whole matrix.
    pub fn verify_identity(&self) -> Result<bool> {
        let values = self.class_values()?;
        let (scaled, denom) = common_denominator(&values);
        let joins = self.gram.joins();
        let size = joins.size();
        let small: Option<(Vec<i128>, Vec<i128>, i128)> = (|| {
            let s: Vec<i128> = scaled.iter().map(|x| x.to_i128()).collect::<Option<_>>()?;
            let g: Vec<i128> = self.gram.powers.iter().map(|x| x.to_i128()).collect::<Option<_>>()?;
            Some((s, g, denom.to_i128()?))
        })();
        let ok = match small {
            Some((s, g, d)) => (0..size).into_par_iter().all(|i| {
                (0..size).all(|j| {
                    let mut acc: Option<i128> = Some(0);
                    for l in 0..size {
                        acc = acc.and_then(|a| {
                            g[joins.blocks(i, l) as usize]
                                .checked_mul(s[joins.class(l, j)])
                                .and_then(|t| a.checked_add(t))
                        });
                    }
                    match acc {
                        Some(v) => v == if i == j { d } else { 0 },
                        None => {
                            let mut big = BigInt::zero();
                            for l in 0..size {
                                big += self.gram.entry(i, l) * &scaled[joins.class(l, j)];
                            }
                            big == if i == j { denom.clone() } else { BigInt::zero() }
                        }
                    }
                })
            }),
            None => (0..size).into_par_iter().all(|i| {
                (0..size).all(|j| {
                    let mut big = BigInt::zero();
                    for l in 0..size {
                        big += self.gram.entry(i, l) * &scaled[joins.class(l, j)];
                    }
                    big == if i == j { denom.clone() } else { BigInt::zero() }
                })
            }),
        };
        Ok(ok)
    }

    fn persisted_path(dir: &Path, k: usize, n: u64) -> PathBuf {
        dir.join(format!("weingarten-k{k}-n{n}.json"))
    }

    /// Writes the class values as JSON.
    pub fn persist(&self, dir: &Path) -> Result<PathBuf> {
        let values = self.class_values()?;
        let file = PersistedTable {
            k: self.k(),
            n: self.n(),
            classes: self
                .gram
                .joins()
                .classes
                .iter()
                .zip(values.iter())
                .map(|(shape, v)| (shape.clone(), format_rational(v)))
                .collect(),
        };
        std::fs::create_dir_all(dir).map_err(|e| Error::Invalid(e.to_string()))?;
        let path = Self::persisted_path(dir, self.k(), self.n());
        let text = serde_json::to_string(&file).map_err(|e| Error::Invalid(e.to_string()))?;
        std::fs::write(&path, text).map_err(|e| Error::Invalid(e.to_string()))?;
        Ok(path)
    }

    /// Seeds the table from a persisted file. The seed is used only if it
    /// passes the exact check, otherwise it is recomputed.
    fn load(&self, dir: &Path) -> Result<bool> {
        let path = Self::persisted_path(dir, self.k(), self.n());
        let Ok(text) = std::fs::read_to_string(&path) else {
            return Ok(false);
        };
        let file: PersistedTable =
            serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.k != self.k() || file.n != self.n() {
            return Err(Error::Parse(format!("{} does not match", path.display())));
        }
        let by_shape: HashMap<Vec<u8>, String> = file.classes.into_iter().collect();
        let values = self
            .gram
            .joins()
            .classes
            .iter()
            .map(|shape| {
                by_shape
                    .get(shape)
                    .ok_or_else(|| Error::Parse(format!("{} lacks a class", path.display())))
                    .and_then(|s| parse_rational(s))
            })
            .collect::<Result<Vec<_>>>()?;
        if !self.solves_first_column(&values) {
            return Err(Error::Parse(format!("{} fails G*W = I", path.display())));
        }
        *self.seeded.lock().expect("poisoned") = Some(values);
        Ok(true)
    }
}

fn common_denominator(values: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let denom = values
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let scaled = values
        .iter()
        .map(|v| v.numer() * (&denom / v.denom()))
        .collect();
    (scaled, denom)
}

#[derive(Serialize, Deserialize)]
struct PersistedTable {
    k: usize,
    n: u64,
    classes: Vec<(Vec<u8>, String)>,
}

/// Process-wide table cache: LRU over `(k, n)`, join tables per `k`.
struct Cache {
    tables: Mutex<LruCache<(usize, u64), Arc<WeingartenTable>>>,
    joins: Mutex<HashMap<usize, Arc<JoinTable>>>,
    enabled: RwLock<bool>,
    persist_dir: RwLock<Option<PathBuf>>,
}

pub const DEFAULT_CACHE_CAPACITY: usize = 32;

/// Environment variable naming a directory for persisted tables.
pub const CACHE_DIR_ENV: &str = "ORTHOINT_CACHE_DIR";

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Cache {
        tables: Mutex::new(LruCache::new(
            NonZeroUsize::new(DEFAULT_CACHE_CAPACITY).expect("nonzero"),
        )),
        joins: Mutex::new(HashMap::new()),
        enabled: RwLock::new(true),
        persist_dir: RwLock::new(std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from)),
    })
}

pub fn set_cache_capacity(capacity: usize) {
    let cap = NonZeroUsize::new(capacity.max(1)).expect("nonzero");
    cache().tables.lock().expect("poisoned").resize(cap);
}

/// With the cache disabled every call builds (and then drops) a fresh table.
pub fn set_cache_enabled(enabled: bool) {
    *cache().enabled.write().expect("poisoned") = enabled;
    if !enabled {
        cache().tables.lock().expect("poisoned").clear();
    }
}

pub fn set_persist_dir(dir: Option<PathBuf>) {
    *cache().persist_dir.write().expect("poisoned") = dir;
}

pub fn persist_dir() -> Option<PathBuf> {
    cache().persist_dir.read().expect("poisoned").clone()
}

fn join_table(k: usize) -> Result<Arc<JoinTable>> {
    if let Some(hit) = cache().joins.lock().expect("poisoned").get(&k) {
        return Ok(hit.clone());
    }
    let built = Arc::new(JoinTable::build(k)?);
    Ok(cache()
        .joins
        .lock()
        .expect("poisoned")
        .entry(k)
        .or_insert(built)
        .clone())
}

/// Shared table for `(k, n)`; concurrent first calls may build it twice.
pub fn table(k: usize, n: u64) -> Result<Arc<WeingartenTable>> {
    if n == 0 {
        return Err(Error::Invalid("n must be at least 1".into()));
    }
    let enabled = *cache().enabled.read().expect("poisoned");
    if enabled {
        if let Some(hit) = cache().tables.lock().expect("poisoned").get(&(k, n)) {
            return Ok(hit.clone());
        }
    }
    let t = Arc::new(WeingartenTable::new(gram(k, n)?));
    if let Some(dir) = persist_dir() {
        t.load(&dir)?;
    }
    if enabled {
        let mut tables = cache().tables.lock().expect("poisoned");
        if let Some(hit) = tables.get(&(k, n)) {
            return Ok(hit.clone());
        }
        tables.put((k, n), t.clone());
    }
    Ok(t)
}

/// Entry `(pi, sigma)` of `W_{kn} = G_{kn}^{-1}`.
pub fn weingarten(k: usize, n: u64, pi: &Pairing, sigma: &Pairing) -> Result<Rational> {
    if pi.k() != k || sigma.k() != k {
        return Err(Error::SizeMismatch(format!(
            "pairings of {} and {} pairs for k={k}",
            pi.k(),
            sigma.k()
        )));
    }
    let t = table(k, n)?;
    let joins = t.gram().joins();
    let i = joins.index_of(pi).expect("every pairing is enumerated");
    let j = joins.index_of(sigma).expect("every pairing is enumerated");
    t.entry(i, j)
}

/// `sum_{pi,sigma} delta_pi(i) delta_sigma(j) W_{kn}(pi,sigma)`.
pub fn integral_monomial(i: &[usize], j: &[usize], n: u64) -> Result<Rational> {
    if i.len() != j.len() {
        return Err(Error::SizeMismatch(format!(
            "multi-indices of lengths {} and {}",
            i.len(),
            j.len()
        )));
    }
    if !i.len().is_multiple_of(2) {
        return Err(Error::OddLength(i.len()));
    }
    let k = i.len() / 2;
    if k == 0 {
        return Ok(rat(1));
    }
    let t = table(k, n)?;
    let support = |idx: &[usize]| -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for (s, p) in t.pairings().iter().enumerate() {
            if delta(p, idx)? == 1 {
                out.push(s);
            }
        }
        Ok(out)
    };
    let left = support(i)?;
    if left.is_empty() {
        return Ok(rat(0));
    }
    let right = support(j)?;
    if right.is_empty() {
        return Ok(rat(0));
    }
    t.sum_over(&left, &right)
}

/// `I(a)`, the Haar integral of `prod u_ij^{a_ij}` over `O_n`.
pub fn integral(a: &ExponentMatrix, n: u64) -> Result<Rational> {
    if !a.is_admissible() {
        return Ok(rat(0));
    }
    let (i, j) = a.multi_indices();
    integral_monomial(&i, &j, n)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub n: u64,
    #[serde(with = "crate::exactnum::rational_string")]
    pub deviation: Rational,
    pub bound: f64,
    pub within: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub matrix: ExponentMatrix,
    pub k: u64,
    pub epsilon: i8,
    pub constant: f64,
    pub rows: Vec<AsymptoticRow>,
    pub pass: bool,
}

/// Tabulates `n^k I(a) - eps * prod dfact(a_ij)` with `k = sum(a)/2` and
/// checks it against `C/n`, where `C` is twice the value fitted at the first
/// `n` of the list.
pub fn asymptotic_check(a: &ExponentMatrix, n_list: &[u64]) -> Result<AsymptoticReport> {
    if !a.is_admissible() {
        return Err(Error::Invalid(format!("{a} is not admissible")));
    }
    let k = a.total() / 2;
    let epsilon: i8 = if a.all_even() { 1 } else { 0 };
    let leading: Rational = if epsilon == 1 {
        Rational::from_integer(a.entries().iter().map(|&x| dfact(x)).product())
    } else {
        rat(0)
    };
    let deviations: Vec<(u64, Rational)> = n_list
        .par_iter()
        .map(|&n| {
            let scaled = integral(a, n)? * Rational::from_integer(BigInt::from(n).pow(k as u32));
            Ok((n, scaled - &leading))
        })
        .collect::<Result<_>>()?;
    let to_f64 = |r: &Rational| {
        r.numer().to_f64().unwrap_or(f64::INFINITY) / r.denom().to_f64().unwrap_or(f64::INFINITY)
    };
    let constant = deviations
        .first()
        .map_or(0.0, |(n, d)| 2.0 * *n as f64 * to_f64(&d.abs()));
    let rows: Vec<AsymptoticRow> = deviations
        .into_iter()
        .map(|(n, d)| {
            let bound = constant / n as f64;
            let within = to_f64(&d.abs()) <= bound * (1.0 + 1e-12);
            AsymptoticRow {
                n,
                deviation: d,
                bound,
                within,
            }
        })
        .collect();
    let pass = rows.iter().all(|r| r.within);
    Ok(AsymptoticReport {
        matrix: a.clone(),
        k,
        epsilon,
        constant,
        rows,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingularityEntry {
    pub k: usize,
    pub n: u64,
    pub rank: usize,
    pub size: usize,
    pub singular: bool,
}

/// Observed invertibility of `G_{kn}` over a grid.
pub fn singularity_report(ks: &[usize], ns: &[u64]) -> Result<Vec<SingularityEntry>> {
    let mut out = Vec::new();
    for &k in ks {
        for &n in ns {
            let t = table(k, n)?;
            let rank = t.rank();
            let size = t.gram().size();
            out.push(SingularityEntry {
                k,
                n,
                rank,
                size,
                singular: rank < size,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::ratio;

    fn r(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn gram_examples() {
        let g = gram(2, 3).unwrap();
        let rows: Vec<Vec<BigInt>> = g.integer_rows();
        assert_eq!(
            rows,
            vec![
                vec![r(9), r(3), r(3)],
                vec![r(3), r(9), r(3)],
                vec![r(3), r(3), r(9)]
            ]
        );
        assert_eq!(gram(1, 7).unwrap().integer_rows(), vec![vec![r(7)]]);
        assert_eq!(gram(2, 2).unwrap().integer_rows()[0], vec![r(4), r(2), r(2)]);
    }

    #[test]
    fn bareiss_small_system() {
        let a = vec![
            vec![r(0), r(2), r(1)],
            vec![r(1), r(1), r(1)],
            vec![r(2), r(1), r(0)],
        ];
        let f = Bareiss::factor(a.clone()).unwrap();
        let b = vec![r(3), r(3), r(3)];
        let x = f.solve_scaled(&b);
        for i in 0..3 {
            let lhs: BigInt = (0..3).map(|j| &a[i][j] * &x[j]).sum();
            assert_eq!(lhs, f.scale() * &b[i]);
        }
        let sing = vec![vec![r(1), r(2)], vec![r(2), r(4)]];
        assert_eq!(Bareiss::factor(sing).unwrap_err(), 1);
    }

    #[test]
    fn w2_closed_form() {
        for n in 2..=12u64 {
            let t = table(2, n).unwrap();
            let ni = n as i64;
            let den = ni * (ni - 1) * (ni + 2);
            for i in 0..3 {
                for j in 0..3 {
                    let want = if i == j { ratio(ni + 1, den) } else { ratio(-1, den) };
                    assert_eq!(t.entry(i, j).unwrap(), want, "n={n}");
                }
            }
        }
        assert_eq!(table(2, 3).unwrap().entry(0, 0).unwrap(), ratio(2, 15));
        assert_eq!(table(2, 3).unwrap().entry(0, 1).unwrap(), ratio(-1, 30));
        let p = Pairing::from_pairs(&[(1, 2)]).unwrap();
        assert_eq!(weingarten(1, 5, &p, &p).unwrap(), ratio(1, 5));
    }

    #[test]
    fn singular_cases_are_reported() {
        assert!(matches!(
            table(2, 1).unwrap().column(0),
            Err(Error::GramSingular { k: 2, n: 1, .. })
        ));
        assert!(table(3, 2).unwrap().is_singular());
        assert!(!table(3, 3).unwrap().is_singular());
        let rep = singularity_report(&[1, 2, 3], &[1, 2, 3]).unwrap();
        let singular: Vec<(usize, u64)> =
            rep.iter().filter(|e| e.singular).map(|e| (e.k, e.n)).collect();
        assert_eq!(singular, vec![(2, 1), (3, 1), (3, 2)]);
    }

    #[test]
    fn gw_identity() {
        for k in 1..=3 {
            for n in 2..=6 {
                let t = table(k, n).unwrap();
                if !t.is_singular() {
                    assert!(t.verify_identity().unwrap(), "k={k} n={n}");
                }
            }
        }
    }

    #[test]
    fn trio() {
        for n in 3..=10u64 {
            let ni = n as i64;
            assert_eq!(
                integral_monomial(&[1, 1, 1, 1], &[1, 1, 1, 1], n).unwrap(),
                ratio(3, ni * (ni + 2))
            );
            assert_eq!(
                integral_monomial(&[1, 1, 1, 1], &[1, 1, 2, 2], n).unwrap(),
                ratio(1, ni * (ni + 2))
            );
            assert_eq!(
                integral_monomial(&[1, 1, 2, 2], &[1, 1, 2, 2], n).unwrap(),
                ratio(ni + 1, ni * (ni - 1) * (ni + 2))
            );
        }
    }

    #[test]
    fn integral_examples() {
        assert_eq!(integral(&ExponentMatrix::new(&[[4, 0], [0, 0]]), 3).unwrap(), ratio(1, 5));
        assert_eq!(integral(&ExponentMatrix::new(&[[1, 1], [1, 0]]), 3).unwrap(), rat(0));
        assert_eq!(integral(&ExponentMatrix::new(&[[2, 0], [0, 2]]), 3).unwrap(), ratio(2, 15));
        assert!(matches!(
            integral_monomial(&[1, 1, 1], &[1, 1, 1], 3),
            Err(Error::OddLength(3))
        ));
    }

    #[test]
    fn relabeling_invariance() {
        let perm = [3usize, 0, 5, 1, 4, 2];
        let t = table(3, 4).unwrap();
        let ps = t.pairings().to_vec();
        for (i, p) in ps.iter().enumerate() {
            for (j, q) in ps.iter().enumerate() {
                let a = t.entry(i, j).unwrap();
                let b = weingarten(3, 4, &p.relabeled(&perm), &q.relabeled(&perm)).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn class_table_k4() {
        let t = table(4, 6).unwrap();
        assert_eq!(t.gram().joins().classes.len(), 5);
        assert!(t.verify_identity().unwrap());
        assert_eq!(t.rank(), 105);
        assert!(table(4, 3).unwrap().is_singular());
    }

    #[test]
    fn matches_direct_solve() {
        // full Bareiss solve of G x = e_sigma as an independent path
        let g = gram(3, 5).unwrap();
        let f = Bareiss::factor(g.integer_rows()).unwrap();
        let t = table(3, 5).unwrap();
        for sigma in [0usize, 4, 11] {
            let mut b = vec![BigInt::zero(); 15];
            b[sigma] = BigInt::one();
            assert_eq!(f.solve(&b), t.column(sigma).unwrap());
        }
    }

    #[test]
    fn asymptotics() {
        let ns: Vec<u64> = (10..=20).collect();
        let rep = asymptotic_check(&ExponentMatrix::new(&[[2]]), &ns).unwrap();
        assert!(rep.pass);
        assert!(rep.rows.iter().all(|r| r.deviation.is_zero()));
        let rep = asymptotic_check(&ExponentMatrix::new(&[[4]]), &ns).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.rows[0].deviation, ratio(-6, 12));
        let rep = asymptotic_check(&ExponentMatrix::new(&[[1, 1], [1, 1]]), &ns).unwrap();
        assert_eq!(rep.epsilon, 0);
        assert!(rep.pass);
    }

    #[test]
    fn persistence_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let t = table(2, 5).unwrap();
        let path = t.persist(dir.path()).unwrap();
        assert!(path.exists());
        let fresh = WeingartenTable::new(gram(2, 5).unwrap());
        assert!(fresh.load(dir.path()).unwrap());
        assert_eq!(fresh.entry(1, 1).unwrap(), t.entry(1, 1).unwrap());
        std::fs::write(&path, r#"{"k":2,"n":5,"classes":[[[1,1],"1"],[[2],"0"]]}"#).unwrap();
        let bad = WeingartenTable::new(gram(2, 5).unwrap());
        assert!(bad.load(dir.path()).is_err());
    }
}
