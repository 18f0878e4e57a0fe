//! Binary observation matrices.

use std::collections::HashSet;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// An `n x p` matrix of `{0,1}` observations with one name per column.
///
/// Values are stored row-major. All logistic machinery works on this `{0,1}`
/// view; [`BinaryDataset::spin_matrix`] gives the `{-1,1}` view used by the
/// Gaussian surrogates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryDataset {
    n: usize,
    p: usize,
    values: Vec<u8>,
    names: Vec<String>,
}

impl BinaryDataset {
    /// Builds a dataset from row-major values.
    pub fn new(n: usize, p: usize, values: Vec<u8>, names: Vec<String>) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument("a dataset needs at least one variable".into()));
        }
        if values.len() != n * p {
            return Err(Error::DimensionMismatch { expected: n * p, found: values.len() });
        }
        if names.len() != p {
            return Err(Error::DimensionMismatch { expected: p, found: names.len() });
        }
        if let Some(pos) = values.iter().position(|&v| v > 1) {
            return Err(Error::NonBinaryValue {
                line: pos / p + 1,
                column: pos % p + 1,
                value: values[pos].to_string(),
            });
        }
        let mut seen = HashSet::with_capacity(p);
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateName(name.clone()));
            }
        }
        Ok(Self { n, p, values, names })
    }

    /// Builds a dataset from rows, naming the columns `V1..Vp`.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let p = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(bad) = rows.iter().find(|r| r.len() != p) {
            return Err(Error::DimensionMismatch { expected: p, found: bad.len() });
        }
        let values = rows.iter().flatten().copied().collect();
        Self::new(rows.len(), p, values, default_names(p))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> u8 {
        self.values[i * self.p + k]
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.values.chunks_exact(self.p)
    }

    /// Column `k` as `0.0/1.0` values.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows().map(|r| f64::from(r[k])).collect()
    }

    /// Row indices where column `k` equals one.
    pub fn ones(&self, k: usize) -> Vec<u32> {
        self.rows()
            .enumerate()
            .filter(|(_, r)| r[k] == 1)
            .map(|(i, _)| i as u32)
            .collect()
    }

    /// Number of ones in each column.
    pub fn column_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.p];
        for r in self.rows() {
            for (c, &v) in counts.iter_mut().zip(r) {
                *c += v as usize;
            }
        }
        counts
    }

    pub fn column_means(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.column_counts().into_iter().map(|c| c as f64 / n).collect()
    }

    /// The co-occurrence matrix `X^T X` (diagonal = column counts).
    pub fn gram(&self) -> DMatrix<f64> {
        let p = self.p;
        let mut g = DMatrix::<f64>::zeros(p, p);
        let mut active = Vec::with_capacity(p);
        for r in self.rows() {
            active.clear();
            active.extend(r.iter().enumerate().filter(|(_, &v)| v == 1).map(|(k, _)| k));
            for (a, &k) in active.iter().enumerate() {
                for &l in &active[a..] {
                    g[(k, l)] += 1.0;
                }
            }
        }
        g.fill_lower_triangle_with_upper_triangle();
        g
    }

    /// The `n x p` spin version `z = 2x - 1`.
    pub fn spin_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.p, |i, k| 2.0 * f64::from(self.get(i, k)) - 1.0)
    }

    /// Indices of columns that are all zeros or all ones.
    pub fn constant_columns(&self) -> Vec<usize> {
        self.column_counts()
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c == 0 || c == self.n)
            .map(|(k, _)| k)
            .collect()
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> Result<Self> {
        if let Some(&bad) = keep.iter().find(|&&k| k >= self.p) {
            return Err(Error::IndexOutOfRange { k: bad, l: bad, p: self.p });
        }
        let mut values = Vec::with_capacity(self.n * keep.len());
        for r in self.rows() {
            values.extend(keep.iter().map(|&k| r[k]));
        }
        let names = keep.iter().map(|&k| self.names[k].clone()).collect();
        Self::new(self.n, keep.len(), values, names)
    }

    /// Keeps the listed rows, in the given order.
    pub fn select_rows(&self, keep: &[usize]) -> Self {
        let mut values = Vec::with_capacity(keep.len() * self.p);
        for &i in keep {
            values.extend_from_slice(self.row(i));
        }
        Self { n: keep.len(), p: self.p, values, names: self.names.clone() }
    }

    /// Drops constant columns, returning the reduced dataset and the dropped indices.
    pub fn drop_constant_columns(&self) -> Result<(Self, Vec<usize>)> {
        let dropped = self.constant_columns();
        let keep: Vec<usize> = (0..self.p).filter(|k| !dropped.contains(k)).collect();
        Ok((self.select_columns(&keep)?, dropped))
    }
}

pub fn default_names(p: usize) -> Vec<String> {
    (1..=p).map(|k| format!("V{k}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> BinaryDataset {
        BinaryDataset::from_rows(&[vec![1, 0, 1], vec![1, 1, 0], vec![0, 0, 1], vec![1, 1, 1]]).unwrap()
    }

    #[test]
    fn gram_counts_cooccurrences() {
        let g = toy().gram();
        assert_eq!(g[(0, 0)], 3.0);
        assert_eq!(g[(0, 1)], 2.0);
        assert_eq!(g[(1, 0)], 2.0);
        assert_eq!(g[(0, 2)], 2.0);
        assert_eq!(g[(1, 2)], 1.0);
        assert_eq!(g[(2, 2)], 3.0);
    }

    #[test]
    fn rejects_non_binary_and_duplicates() {
        let err = BinaryDataset::new(1, 2, vec![0, 2], default_names(2)).unwrap_err();
        assert!(matches!(err, Error::NonBinaryValue { line: 1, column: 2, .. }));
        let err = BinaryDataset::new(1, 2, vec![0, 1], vec!["a".into(), "a".into()]).unwrap_err();
        assert!(matches!(err, Error::DuplicateName(_)));
    }

    #[test]
    fn constant_columns_detected_and_dropped() {
        let d = BinaryDataset::from_rows(&[vec![1, 0, 1], vec![1, 1, 0]]).unwrap();
        assert_eq!(d.constant_columns(), vec![0]);
        let (reduced, dropped) = d.drop_constant_columns().unwrap();
        assert_eq!(dropped, vec![0]);
        assert_eq!(reduced.p(), 2);
        assert_eq!(reduced.names(), &["V2".to_string(), "V3".to_string()]);
    }

    #[test]
    fn spin_view() {
        let z = toy().spin_matrix();
        assert_eq!(z[(0, 0)], 1.0);
        assert_eq!(z[(0, 1)], -1.0);
    }
}
