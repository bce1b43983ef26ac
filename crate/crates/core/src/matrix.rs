use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A p x q matrix of natural-number exponents, the argument of I(a) and J(a).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u64>>", into = "Vec<Vec<u64>>")]
pub struct ExponentMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl ExponentMatrix {
    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Self> {
        let p = rows.len();
        let q = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != q) {
            return Err(Error::Invalid("exponent matrix rows differ in length".into()));
        }
        Ok(ExponentMatrix {
            rows: p,
            cols: q,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Panicking constructor for literals in code and tests.
    pub fn new<const Q: usize>(rows: &[[u64; Q]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.to_vec()).collect()).expect("rectangular")
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExponentMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn row_vector(v: &[u64]) -> Self {
        ExponentMatrix {
            rows: 1,
            cols: v.len(),
            data: v.to_vec(),
        }
    }

    pub fn column_vector(v: &[u64]) -> Self {
        ExponentMatrix {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    /// Two-row matrix from its top and bottom rows.
    pub fn two_row(top: &[u64], bottom: &[u64]) -> Result<Self> {
        Self::from_rows(vec![top.to_vec(), bottom.to_vec()])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[u64] {
        &self.data
    }

    pub fn total(&self) -> u64 {
        self.data.iter().sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j)).sum())
            .collect()
    }

    /// Every row sum and every column sum is even.
    pub fn is_admissible(&self) -> bool {
        self.row_sums().iter().all(|s| s % 2 == 0) && self.col_sums().iter().all(|s| s % 2 == 0)
    }

    pub fn all_even(&self) -> bool {
        self.data.iter().all(|x| x % 2 == 0)
    }

    pub fn all_odd(&self) -> bool {
        self.data.iter().all(|x| x % 2 == 1)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut out = ExponentMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        let rows = perm.iter().map(|&i| self.row(i).to_vec()).collect();
        Self::from_rows(rows).expect("rectangular")
    }

    /// Column `j` of the result is column `perm[j]` of `self`.
    pub fn permute_cols(&self, perm: &[usize]) -> Self {
        let mut out = ExponentMatrix::zeros(self.rows, perm.len());
        for i in 0..self.rows {
            for (j, &src) in perm.iter().enumerate() {
                out.set(i, j, self.get(i, src));
            }
        }
        out
    }

    /// Drops all-zero rows and columns; the monomial is unchanged.
    pub fn strip_zeros(&self) -> Self {
        let keep_rows: Vec<usize> = (0..self.rows)
            .filter(|&i| self.row(i).iter().any(|&x| x > 0))
            .collect();
        let keep_cols: Vec<usize> = (0..self.cols)
            .filter(|&j| (0..self.rows).any(|i| self.get(i, j) > 0))
            .collect();
        let mut out = ExponentMatrix::zeros(keep_rows.len(), keep_cols.len());
        for (oi, &i) in keep_rows.iter().enumerate() {
            for (oj, &j) in keep_cols.iter().enumerate() {
                out.set(oi, oj, self.get(i, j));
            }
        }
        out
    }

    /// Appends columns given as full column vectors.
    pub fn hcat(&self, other: &ExponentMatrix) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::SizeMismatch(format!(
                "hcat of {} and {} rows",
                self.rows, other.rows
            )));
        }
        let rows = (0..self.rows)
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.extend_from_slice(other.row(i));
                r
            })
            .collect();
        Self::from_rows(rows)
    }

    pub fn vcat(&self, other: &ExponentMatrix) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::SizeMismatch(format!(
                "vcat of {} and {} columns",
                self.cols, other.cols
            )));
        }
        let mut rows = self.to_rows();
        rows.extend(other.to_rows());
        Self::from_rows(rows)
    }

    /// Row and column multi-indices (1-based) of the flattened monomial,
    /// entries taken in row-major order with multiplicity.
    pub fn multi_indices(&self) -> (Vec<usize>, Vec<usize>) {
        let mut is = Vec::new();
        let mut js = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                for _ in 0..self.get(i, j) {
                    is.push(i + 1);
                    js.push(j + 1);
                }
            }
        }
        (is, js)
    }
}

impl TryFrom<Vec<Vec<u64>>> for ExponentMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<u64>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<ExponentMatrix> for Vec<Vec<u64>> {
    fn from(m: ExponentMatrix) -> Self {
        m.to_rows()
    }
}

/// Row-colon syntax: `"4,0:0,0"`.
impl fmt::Display for ExponentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        write!(f, "{}", rows.join(":"))
    }
}

impl std::str::FromStr for ExponentMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let rows = s
            .trim()
            .split(':')
            .map(|row| {
                row.split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<u64>()
                            .map_err(|_| Error::Parse(format!("bad matrix entry {x:?} in {s:?}")))
                    })
                    .collect::<Result<Vec<u64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let m: ExponentMatrix = "4,0:0,0".parse().unwrap();
        assert_eq!(m, ExponentMatrix::new(&[[4, 0], [0, 0]]));
        assert_eq!(m.to_string(), "4,0:0,0");
        assert!("1,2:3".parse::<ExponentMatrix>().is_err());
        assert!("1,x".parse::<ExponentMatrix>().is_err());
    }

    #[test]
    fn admissibility() {
        assert!(ExponentMatrix::new(&[[2, 0], [0, 2]]).is_admissible());
        assert!(ExponentMatrix::new(&[[1, 1], [1, 1]]).is_admissible());
        assert!(!ExponentMatrix::new(&[[1, 1], [1, 0]]).is_admissible());
    }

    #[test]
    fn strip_and_indices() {
        let m = ExponentMatrix::new(&[[0, 2, 0], [0, 0, 0], [0, 1, 1]]);
        assert_eq!(m.strip_zeros(), ExponentMatrix::new(&[[2, 0], [1, 1]]));
        let (i, j) = ExponentMatrix::new(&[[2, 0], [0, 2]]).multi_indices();
        assert_eq!(i, vec![1, 1, 2, 2]);
        assert_eq!(j, vec![1, 1, 2, 2]);
    }

    #[test]
    fn json_roundtrip() {
        let m = ExponentMatrix::new(&[[1, 2], [3, 4]]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[1,2],[3,4]]");
        assert_eq!(serde_json::from_str::<ExponentMatrix>(&s).unwrap(), m);
        assert!(serde_json::from_str::<ExponentMatrix>("[[1],[2,3]]").is_err());
    }
}
