use std::fmt::Write as _;

use crate::error::{LatticeError, Result};
use crate::lattice::LatticeElement;
use crate::scalar::Scalar;

/// A truncated element of `l^inf(N x N)`.
///
/// Holds rows `1..=rows` and columns `1..=cols` plus, for every row, the
/// value of the row as `n -> inf`. Lattice operations act on the limit column
/// like on any other coordinate, so the limit of an expression in generators is
/// obtained by evaluating the expression on the generators' limits.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleArray<S = f64> {
    rows: usize,
    cols: usize,
    entries: Vec<S>,
    limit: Vec<S>,
}

impl<S: Scalar> DoubleArray<S> {
    pub fn new(rows: usize, cols: usize, entries: Vec<S>, limit: Vec<S>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(LatticeError::Dimension {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        if limit.len() != rows {
            return Err(LatticeError::Dimension {
                expected: rows,
                found: limit.len(),
            });
        }
        Ok(DoubleArray {
            rows,
            cols,
            entries,
            limit,
        })
    }

    /// Builds from 1-based closures `entry(m, n)` and `limit(m)`.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        entry: impl Fn(usize, usize) -> S,
        limit: impl Fn(usize) -> S,
    ) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for m in 1..=rows {
            for n in 1..=cols {
                entries.push(entry(m, n));
            }
        }
        DoubleArray {
            rows,
            cols,
            entries,
            limit: (1..=rows).map(limit).collect(),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| S::zero(), |_| S::zero())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry `(m, n)`, 1-based.
    pub fn entry(&self, m: usize, n: usize) -> &S {
        assert!((1..=self.rows).contains(&m) && (1..=self.cols).contains(&n), "({m}, {n}) out of range");
        &self.entries[(m - 1) * self.cols + (n - 1)]
    }

    /// Limit of row `m` as `n -> inf`, 1-based.
    pub fn limit(&self, m: usize) -> &S {
        &self.limit[m - 1]
    }

    pub fn limit_column(&self) -> &[S] {
        &self.limit
    }

    pub fn row(&self, m: usize) -> &[S] {
        &self.entries[(m - 1) * self.cols..m * self.cols]
    }

    /// The first `cols` columns together with the limit column.
    pub fn leading_columns(&self, cols: usize) -> Self {
        let cols = cols.min(self.cols);
        Self::from_fn(self.rows, cols, |m, n| self.entry(m, n).clone(), |m| self.limit(m).clone())
    }

    pub fn to_f64(&self) -> DoubleArray<f64> {
        DoubleArray {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|v| v.to_f64_lossy()).collect(),
            limit: self.limit.iter().map(|v| v.to_f64_lossy()).collect(),
        }
    }

    /// CSV with header `m,n1,...,nN,limit`; one line per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m");
        for n in 1..=self.cols {
            let _ = write!(out, ",n{n}");
        }
        out.push_str(",limit\n");
        for m in 1..=self.rows {
            let _ = write!(out, "{m}");
            for v in self.row(m) {
                let _ = write!(out, ",{v}");
            }
            let _ = writeln!(out, ",{}", self.limit(m));
        }
        out
    }
}

impl<S: Scalar> LatticeElement<S> for DoubleArray<S> {
    fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LatticeError::Dimension {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(DoubleArray {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| f(a, b)).collect(),
            limit: self.limit.iter().zip(&other.limit).map(|(a, b)| f(a, b)).collect(),
        })
    }

    fn map(&self, f: impl Fn(&S) -> S) -> Self {
        DoubleArray {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(&f).collect(),
            limit: self.limit.iter().map(&f).collect(),
        }
    }

    fn coordinates(&self) -> &[S] {
        &self.entries
    }

    fn stored_values(&self) -> Box<dyn Iterator<Item = &S> + '_> {
        Box::new(self.entries.iter().chain(&self.limit))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_and_csv() {
        let a = DoubleArray::<f64>::from_fn(2, 3, |m, n| (10 * m + n) as f64, |m| -(m as f64));
        assert_eq!(*a.entry(2, 3), 23.0);
        assert_eq!(*a.limit(1), -1.0);
        assert_eq!(a.sup_norm(), 23.0);
        assert_eq!(a.to_csv(), "m,n1,n2,n3,limit\n1,11,12,13,-1\n2,21,22,23,-2\n");
        let b = a.leading_columns(1);
        assert_eq!(b.cols(), 1);
        assert_eq!(*b.limit(2), -2.0);
    }

    #[test]
    fn shape_mismatch() {
        let a = DoubleArray::<f64>::zeros(2, 3);
        let b = DoubleArray::<f64>::zeros(3, 2);
        assert!(a.plus(&b).is_err());
        assert!(DoubleArray::<f64>::new(2, 2, vec![0.0; 3], vec![0.0; 2]).is_err());
    }
}
