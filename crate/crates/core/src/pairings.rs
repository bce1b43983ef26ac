//! Brauer pair partitions of `{1,...,2k}`, their joins, and pairing types.

use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{dfact, factorial, Rational};
use crate::matrix::ExponentMatrix;

/// Default bound on the number of diagrams any enumeration may produce.
pub const DEFAULT_PAIRING_CAP: u128 = 2_000_000;

/// A perfect matching of `{0,...,2k-1}` stored as a partner table.
/// Displayed 1-based, pairs sorted by their smaller element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pairing {
    partner: Vec<u8>,
}

impl Pairing {
    /// Builds a pairing from 1-based pairs.
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Result<Self> {
        let size = 2 * pairs.len();
        if size > u8::MAX as usize {
            return Err(Error::Invalid(format!("pairing on {size} points is too large")));
        }
        let mut partner = vec![u8::MAX; size];
        for &(a, b) in pairs {
            if a == 0 || b == 0 || a > size || b > size || a == b {
                return Err(Error::Invalid(format!("bad pair ({a},{b}) for {size} points")));
            }
            let (a, b) = (a - 1, b - 1);
            if partner[a] != u8::MAX || partner[b] != u8::MAX {
                return Err(Error::Invalid(format!("point repeated in pair ({},{})", a + 1, b + 1)));
            }
            partner[a] = b as u8;
            partner[b] = a as u8;
        }
        Ok(Pairing { partner })
    }

    /// Number of pairs.
    pub fn k(&self) -> usize {
        self.partner.len() / 2
    }

    /// 0-based partner of point `i`.
    pub fn partner(&self, i: usize) -> usize {
        self.partner[i] as usize
    }

    /// Canonical 1-based pairs `(small, large)`, sorted.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.partner.len())
            .filter(|&i| i < self.partner(i))
            .map(|i| (i + 1, self.partner(i) + 1))
            .collect()
    }

    /// Image under the point relabeling `i -> relabel[i]` (0-based).
    pub fn relabeled(&self, relabel: &[usize]) -> Pairing {
        let mut partner = vec![0u8; self.partner.len()];
        for i in 0..self.partner.len() {
            partner[relabel[i]] = relabel[self.partner(i)] as u8;
        }
        Pairing { partner }
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self
            .pairs()
            .iter()
            .map(|(a, b)| format!("({a},{b})"))
            .collect();
        write!(f, "{{{}}}", body.join(","))
    }
}

impl std::str::FromStr for Pairing {
    type Err = Error;

    /// Parses `{(1,2),(3,4)}`.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| Error::Parse(format!("pairing must be braced: {s:?}")))?;
        let mut pairs = Vec::new();
        for chunk in inner.split(')') {
            let chunk = chunk.trim().trim_start_matches(',').trim();
            if chunk.is_empty() {
                continue;
            }
            let body = chunk
                .strip_prefix('(')
                .ok_or_else(|| Error::Parse(format!("bad pair {chunk:?}")))?;
            let (a, b) = body
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad pair {chunk:?}")))?;
            let parse = |t: &str| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad point {t:?}")))
            };
            pairs.push((parse(a)?, parse(b)?));
        }
        Pairing::from_pairs(&pairs)
    }
}

/// Standard double factorial `(2k-1)!!`, the number of pairings of `2k` points.
pub fn pairing_count(k: usize) -> u128 {
    (1..=k as u128).map(|i| 2 * i - 1).product()
}

/// All pairings of `{1..2k}`: the smallest unmatched point is matched with
/// each larger unmatched point in ascending order, recursively.
pub fn enumerate_pairings(k: usize) -> Result<Vec<Pairing>> {
    enumerate_pairings_capped(k, DEFAULT_PAIRING_CAP)
}

pub fn enumerate_pairings_capped(k: usize, cap: u128) -> Result<Vec<Pairing>> {
    let count = pairing_count(k);
    if count > cap {
        return Err(Error::ResourceCap {
            requested: count,
            cap,
        });
    }
    let size = 2 * k;
    if size > u8::MAX as usize {
        return Err(Error::ResourceCap {
            requested: count,
            cap,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut partner = vec![u8::MAX; size];
    fn rec(partner: &mut Vec<u8>, out: &mut Vec<Pairing>) {
        let Some(first) = partner.iter().position(|&p| p == u8::MAX) else {
            out.push(Pairing {
                partner: partner.clone(),
            });
            return;
        };
        for second in first + 1..partner.len() {
            if partner[second] != u8::MAX {
                continue;
            }
            partner[first] = second as u8;
            partner[second] = first as u8;
            rec(partner, out);
            partner[first] = u8::MAX;
            partner[second] = u8::MAX;
        }
    }
    rec(&mut partner, &mut out);
    Ok(out)
}

/// Number of blocks of the join of two pairings.
pub fn join_block_count(p1: &Pairing, p2: &Pairing) -> Result<usize> {
    if p1.partner.len() != p2.partner.len() {
        return Err(Error::SizeMismatch(format!(
            "pairings on {} and {} points",
            p1.partner.len(),
            p2.partner.len()
        )));
    }
    let size = p1.partner.len();
    let mut uf = UnionFind::<usize>::new(size);
    for i in 0..size {
        uf.union(i, p1.partner(i));
        uf.union(i, p2.partner(i));
    }
    let mut labels = uf.into_labeling();
    labels.sort_unstable();
    labels.dedup();
    Ok(labels.len())
}

/// 1 when `idx` is constant on every pair of `p`, else 0.
pub fn delta(p: &Pairing, idx: &[usize]) -> Result<u8> {
    if idx.len() != p.partner.len() {
        return Err(Error::SizeMismatch(format!(
            "multi-index of length {} for a pairing of {} points",
            idx.len(),
            p.partner.len()
        )));
    }
    Ok((0..idx.len()).all(|i| idx[i] == idx[p.partner(i)]) as u8)
}

/// Symmetric matrix with even diagonal counting pairs between blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypeMatrix {
    pub entries: Vec<Vec<u64>>,
}

impl TypeMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, k: usize, l: usize) -> u64 {
        self.entries[k][l]
    }

    /// Checks `self` belongs to `[a]`.
    pub fn validate(&self, a: &[u64]) -> Result<()> {
        let p = a.len();
        if self.entries.len() != p || self.entries.iter().any(|r| r.len() != p) {
            return Err(Error::TypeMismatch(format!("type matrix is not {p}x{p}")));
        }
        for k in 0..p {
            if !self.entries[k][k].is_multiple_of(2) {
                return Err(Error::TypeMismatch(format!("odd diagonal entry at {k}")));
            }
            for l in 0..p {
                if self.entries[k][l] != self.entries[l][k] {
                    return Err(Error::TypeMismatch("type matrix is not symmetric".into()));
                }
            }
            if self.entries[k].iter().sum::<u64>() != a[k] {
                return Err(Error::TypeMismatch(format!("row {k} does not sum to {}", a[k])));
            }
        }
        Ok(())
    }

    /// Two-row type from the scalar cross count `r` of `[a,b]`.
    pub fn from_two_row(a: u64, b: u64, r: u64) -> Result<Self> {
        if r > a.min(b) || !(a - r).is_multiple_of(2) || !(b - r).is_multiple_of(2) {
            return Err(Error::TypeMismatch(format!("{r} is not in [{a},{b}]")));
        }
        Ok(TypeMatrix {
            entries: vec![vec![a - r, r], vec![r, b - r]],
        })
    }
}

impl fmt::Display for TypeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flat: Vec<String> = self.entries.iter().flatten().map(|x| x.to_string()).collect();
        write!(f, "[{}]", flat.join(","))
    }
}

/// Type of `p` relative to the segmentation of `{1..2k}` by `a`.
pub fn pairing_type(p: &Pairing, a: &[u64]) -> Result<TypeMatrix> {
    let total: u64 = a.iter().sum();
    if total as usize != p.partner.len() {
        return Err(Error::SizeMismatch(format!(
            "segment sizes sum to {total}, pairing has {} points",
            p.partner.len()
        )));
    }
    let block: Vec<usize> = a
        .iter()
        .enumerate()
        .flat_map(|(b, &len)| std::iter::repeat_n(b, len as usize))
        .collect();
    let mut entries = vec![vec![0u64; a.len()]; a.len()];
    for (x, y) in p.pairs() {
        let (bx, by) = (block[x - 1], block[y - 1]);
        if bx == by {
            entries[bx][bx] += 2;
        } else {
            entries[bx][by] += 1;
            entries[by][bx] += 1;
        }
    }
    Ok(TypeMatrix { entries })
}

/// The set `[a]`: symmetric matrices with even diagonal and row sums `a`,
/// in lexicographic order of their row-major entries.
pub fn enumerate_types(a: &[u64]) -> Vec<TypeMatrix> {
    let p = a.len();
    let cells: Vec<(usize, usize)> = (0..p)
        .flat_map(|k| (k + 1..p).map(move |l| (k, l)))
        .collect();
    let mut out = Vec::new();
    let mut m = vec![vec![0u64; p]; p];
    let mut rem = a.to_vec();

    fn rec(
        i: usize,
        cells: &[(usize, usize)],
        m: &mut Vec<Vec<u64>>,
        rem: &mut Vec<u64>,
        out: &mut Vec<TypeMatrix>,
    ) {
        if i == cells.len() {
            if rem.iter().all(|r| r % 2 == 0) {
                let mut entries = m.clone();
                for (k, row) in entries.iter_mut().enumerate() {
                    row[k] = rem[k];
                }
                out.push(TypeMatrix { entries });
            }
            return;
        }
        let (k, l) = cells[i];
        // once the last cell of row k is placed, rem[k] must be even
        let closes_row = cells.get(i + 1).is_none_or(|&(k2, _)| k2 != k);
        for v in 0..=rem[k].min(rem[l]) {
            if closes_row && !(rem[k] - v).is_multiple_of(2) {
                continue;
            }
            m[k][l] = v;
            m[l][k] = v;
            rem[k] -= v;
            rem[l] -= v;
            rec(i + 1, cells, m, rem, out);
            rem[k] += v;
            rem[l] += v;
        }
        m[k][l] = 0;
        m[l][k] = 0;
    }

    if a.iter().sum::<u64>() % 2 != 0 {
        return out;
    }
    rec(0, &cells, &mut m, &mut rem, &mut out);
    out.sort();
    out
}

/// Number of pairings of type `r`:
/// `prod_k a_k! / prod_l r_kl!  *  prod_{k<l} r_kl!  *  prod_k dfact(r_kk)`.
pub fn count_of_type(r: &TypeMatrix, a: &[u64]) -> Result<BigInt> {
    r.validate(a)?;
    let p = a.len();
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for k in 0..p {
        num *= factorial(a[k]);
        for l in 0..p {
            den *= factorial(r.get(k, l));
        }
        num *= dfact(r.get(k, k));
        for l in k + 1..p {
            num *= factorial(r.get(k, l));
        }
    }
    Ok(num / den)
}

/// Per-column types `r^1..r^q` of an exponent matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypeAssignment {
    pub columns: Vec<TypeMatrix>,
}

impl TypeAssignment {
    /// Aggregate `R_kl = sum_j r^j_kl`.
    pub fn aggregate(&self) -> Vec<Vec<u64>> {
        let p = self.columns.first().map_or(0, |t| t.size());
        let mut out = vec![vec![0u64; p]; p];
        for t in &self.columns {
            for (k, row) in out.iter_mut().enumerate() {
                for (l, v) in row.iter_mut().enumerate() {
                    *v += t.get(k, l);
                }
            }
        }
        out
    }

    /// Product count `prod_j K_{r^j}(a_j)`.
    pub fn count(&self, a: &ExponentMatrix) -> Result<BigInt> {
        if self.columns.len() != a.cols() {
            return Err(Error::TypeMismatch(format!(
                "{} column types for {} columns",
                self.columns.len(),
                a.cols()
            )));
        }
        let mut acc = BigInt::one();
        for (j, t) in self.columns.iter().enumerate() {
            acc *= count_of_type(t, &a.column(j))?;
        }
        Ok(acc)
    }
}

/// All assignments in `[a] = [a_1] x ... x [a_q]`.
pub fn enumerate_type_assignments(a: &ExponentMatrix) -> Vec<TypeAssignment> {
    let per_col: Vec<Vec<TypeMatrix>> = (0..a.cols())
        .map(|j| enumerate_types(&a.column(j)))
        .collect();
    let mut out = vec![TypeAssignment { columns: vec![] }];
    for choices in per_col {
        let mut next = Vec::with_capacity(out.len() * choices.len());
        for prefix in &out {
            for t in &choices {
                let mut cols = prefix.columns.clone();
                cols.push(t.clone());
                next.push(TypeAssignment { columns: cols });
            }
        }
        out = next;
    }
    out
}

/// `K'_r(a) = prod_j K_{r^j}(a_j) / prod_ij dfact(a_ij)`.
pub fn kprime(r: &TypeAssignment, a: &ExponentMatrix) -> Result<Rational> {
    let num = r.count(a)?;
    let den: BigInt = a.entries().iter().map(|&x| dfact(x)).product();
    Ok(Rational::new(num, den))
}

/// The two-row coefficient in closed form:
/// `(a+1)!! (b+1)!! / (r! (a-r+1)!! (b-r+1)!!)` in the shifted convention.
pub fn kprime_two_row(a: u64, b: u64, r: u64) -> Result<Rational> {
    TypeMatrix::from_two_row(a, b, r)?;
    let num = dfact(a + 1) * dfact(b + 1);
    let den = factorial(r) * dfact(a - r + 1) * dfact(b - r + 1);
    Ok(Rational::new(num, den))
}

/// `[a,b] = {m, m-2, ...}` down to 0 or 1 with `m = min(a,b)`; empty on mixed parity.
pub fn two_row_types(a: u64, b: u64) -> Vec<u64> {
    if !(a + b).is_multiple_of(2) {
        return Vec::new();
    }
    let m = a.min(b);
    (0..=m).rev().step_by(2).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    fn pr(pairs: &[(usize, usize)]) -> Pairing {
        Pairing::from_pairs(pairs).unwrap()
    }

    #[test]
    fn enumerate_small() {
        let p1 = enumerate_pairings(1).unwrap();
        assert_eq!(p1, vec![pr(&[(1, 2)])]);
        let p2 = enumerate_pairings(2).unwrap();
        assert_eq!(
            p2.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            vec!["{(1,2),(3,4)}", "{(1,3),(2,4)}", "{(1,4),(2,3)}"]
        );
        assert_eq!(enumerate_pairings(3).unwrap().len(), 15);
        assert_eq!(enumerate_pairings(0).unwrap().len(), 1);
    }

    #[test]
    fn enumerate_counts_and_uniqueness() {
        for k in 0..=6 {
            let mut all = enumerate_pairings(k).unwrap();
            assert_eq!(all.len() as u128, pairing_count(k));
            all.sort();
            all.dedup();
            assert_eq!(all.len() as u128, pairing_count(k));
        }
    }

    #[test]
    fn enumerate_cap() {
        assert!(matches!(
            enumerate_pairings_capped(4, 100),
            Err(Error::ResourceCap { requested: 105, cap: 100 })
        ));
        assert!(matches!(enumerate_pairings(8), Err(Error::ResourceCap { .. })));
    }

    #[test]
    fn joins() {
        let a = pr(&[(1, 2), (3, 4)]);
        let b = pr(&[(1, 3), (2, 4)]);
        assert_eq!(join_block_count(&a, &a).unwrap(), 2);
        assert_eq!(join_block_count(&a, &b).unwrap(), 1);
        assert!(join_block_count(&a, &pr(&[(1, 2)])).is_err());
    }

    #[test]
    fn join_properties() {
        for k in 1..=4 {
            let all = enumerate_pairings(k).unwrap();
            for x in &all {
                for y in &all {
                    let j = join_block_count(x, y).unwrap();
                    assert_eq!(j, join_block_count(y, x).unwrap());
                    assert!(j <= k);
                    assert_eq!(j == k, x == y);
                }
            }
        }
    }

    #[test]
    fn gram_k2_shape() {
        // n^2 on the diagonal, n off it
        let all = enumerate_pairings(2).unwrap();
        for (i, x) in all.iter().enumerate() {
            for (j, y) in all.iter().enumerate() {
                let expect = if i == j { 2 } else { 1 };
                assert_eq!(join_block_count(x, y).unwrap(), expect);
            }
        }
    }

    #[test]
    fn deltas() {
        assert_eq!(delta(&pr(&[(1, 2), (3, 4)]), &[1, 1, 2, 2]).unwrap(), 1);
        assert_eq!(delta(&pr(&[(1, 3), (2, 4)]), &[1, 1, 2, 2]).unwrap(), 0);
        assert_eq!(delta(&pr(&[(1, 3), (2, 4)]), &[1, 2, 1, 2]).unwrap(), 1);
        assert!(delta(&pr(&[(1, 2)]), &[1, 1, 1]).is_err());
    }

    #[test]
    fn worked_type_example() {
        let s = pr(&[(1, 4), (2, 6), (3, 9), (5, 7), (8, 12), (10, 11)]);
        let t = pairing_type(&s, &[3, 5, 4]).unwrap();
        assert_eq!(t.entries, vec![vec![0, 2, 1], vec![2, 2, 1], vec![1, 1, 2]]);
        assert_eq!(
            pairing_type(&pr(&[(1, 3), (2, 4)]), &[4]).unwrap().entries,
            vec![vec![4]]
        );
        assert_eq!(
            pairing_type(&pr(&[(1, 2)]), &[1, 1]).unwrap().entries,
            vec![vec![0, 1], vec![1, 0]]
        );
        assert!(pairing_type(&pr(&[(1, 2)]), &[1, 2]).is_err());
    }

    #[test]
    fn type_sets() {
        let t = enumerate_types(&[2, 2]);
        assert_eq!(
            t.iter().map(|x| x.entries.clone()).collect::<Vec<_>>(),
            vec![vec![vec![0, 2], vec![2, 0]], vec![vec![2, 0], vec![0, 2]]]
        );
        assert_eq!(enumerate_types(&[2, 0])[0].entries, vec![vec![2, 0], vec![0, 0]]);
        assert_eq!(enumerate_types(&[1, 1])[0].entries, vec![vec![0, 1], vec![1, 0]]);
        assert!(enumerate_types(&[1, 2]).is_empty());
    }

    #[test]
    fn counts_examples() {
        let r = TypeMatrix { entries: vec![vec![2]] };
        assert_eq!(count_of_type(&r, &[2]).unwrap(), BigInt::from(1));
        let r = TypeMatrix::from_two_row(2, 2, 2).unwrap();
        assert_eq!(count_of_type(&r, &[2, 2]).unwrap(), BigInt::from(2));
        let bad = TypeMatrix { entries: vec![vec![1]] };
        assert!(count_of_type(&bad, &[1]).is_err());
    }

    /// Brute force: partition every pairing by its type.
    fn brute_type_counts(a: &[u64]) -> std::collections::BTreeMap<TypeMatrix, u64> {
        let total: u64 = a.iter().sum();
        let mut map = std::collections::BTreeMap::new();
        for p in enumerate_pairings(total as usize / 2).unwrap() {
            *map.entry(pairing_type(&p, a).unwrap()).or_insert(0) += 1;
        }
        map
    }

    #[test]
    fn counts_match_brute_force() {
        let vectors: Vec<Vec<u64>> = vec![
            vec![3, 5, 4],
            vec![2, 2],
            vec![1, 1, 2],
            vec![2, 2, 2, 2],
            vec![4, 0, 2],
            vec![1, 3, 3, 3],
            vec![5, 5],
            vec![3, 3, 2, 2],
        ];
        for a in vectors {
            let brute = brute_type_counts(&a);
            let types = enumerate_types(&a);
            assert_eq!(types.len(), brute.len(), "a={a:?}");
            let mut total = BigInt::from(0);
            for t in &types {
                let c = count_of_type(t, &a).unwrap();
                assert_eq!(c, BigInt::from(brute[t]), "a={a:?} r={t}");
                total += c;
            }
            let s: u64 = a.iter().sum();
            assert_eq!(total, BigInt::from(pairing_count(s as usize / 2)));
        }
    }

    #[test]
    fn two_row_coefficient_matches_counts() {
        assert_eq!(kprime_two_row(2, 2, 0).unwrap(), rat(1));
        assert_eq!(kprime_two_row(2, 2, 2).unwrap(), rat(2));
        assert_eq!(kprime_two_row(2, 0, 0).unwrap(), rat(1));
        for a in 0..=6u64 {
            for b in 0..=6u64 {
                for r in two_row_types(a, b) {
                    let col = ExponentMatrix::column_vector(&[a, b]);
                    let ta = TypeAssignment {
                        columns: vec![TypeMatrix::from_two_row(a, b, r).unwrap()],
                    };
                    assert_eq!(kprime(&ta, &col).unwrap(), kprime_two_row(a, b, r).unwrap());
                }
            }
        }
    }

    #[test]
    fn two_row_type_sets() {
        assert_eq!(two_row_types(2, 2), vec![2, 0]);
        assert_eq!(two_row_types(5, 3), vec![3, 1]);
        assert!(two_row_types(2, 3).is_empty());
        assert_eq!(two_row_types(4, 0), vec![0]);
    }

    #[test]
    fn display_and_parse() {
        let p = pr(&[(2, 3), (1, 4)]);
        assert_eq!(p.to_string(), "{(1,4),(2,3)}");
        assert_eq!("{(1,4),(2,3)}".parse::<Pairing>().unwrap(), p);
        assert!("(1,2)".parse::<Pairing>().is_err());
        assert!(Pairing::from_pairs(&[(1, 2), (2, 3)]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn every_type_is_enumerated(a in proptest::collection::vec(0u64..4, 1..4)) {
            let s: u64 = a.iter().sum();
            proptest::prop_assume!(s.is_multiple_of(2) && s <= 10);
            let types = enumerate_types(&a);
            for p in enumerate_pairings(s as usize / 2).unwrap() {
                let t = pairing_type(&p, &a).unwrap();
                proptest::prop_assert!(types.contains(&t));
            }
        }
    }
}
