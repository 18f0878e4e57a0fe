//! Undirected edge sets over `p` labelled vertices.

use std::collections::BTreeSet;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A set of unordered pairs `(k, l)` with `k < l < p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeSet {
    p: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl EdgeSet {
    pub fn empty(p: usize) -> Self {
        Self { p, edges: BTreeSet::new() }
    }

    /// All `p(p-1)/2` pairs.
    pub fn complete(p: usize) -> Self {
        let edges = (0..p).flat_map(|k| (k + 1..p).map(move |l| (k, l))).collect();
        Self { p, edges }
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(p: usize, pairs: I) -> Result<Self> {
        let mut set = Self::empty(p);
        for (k, l) in pairs {
            set.insert(k, l)?;
        }
        Ok(set)
    }

    /// Edges where `|m[k,l]| > threshold` (upper triangle is read).
    pub fn from_matrix(m: &DMatrix<f64>, threshold: f64) -> Self {
        let p = m.nrows();
        let edges = (0..p)
            .flat_map(|k| (k + 1..p).map(move |l| (k, l)))
            .filter(|&(k, l)| m[(k, l)].abs() > threshold)
            .collect();
        Self { p, edges }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Number of candidate pairs, `p(p-1)/2`.
    pub fn pair_count(&self) -> usize {
        self.p * self.p.saturating_sub(1) / 2
    }

    pub fn insert(&mut self, k: usize, l: usize) -> Result<bool> {
        if k == l || k >= self.p || l >= self.p {
            return Err(Error::IndexOutOfRange { k, l, p: self.p });
        }
        Ok(self.edges.insert((k.min(l), k.max(l))))
    }

    pub fn contains(&self, k: usize, l: usize) -> bool {
        self.edges.contains(&(k.min(l), k.max(l)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn as_set(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    fn check_same_p(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::DimensionMismatch { expected: self.p, found: other.p });
        }
        Ok(())
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.check_same_p(other)?;
        Ok(Self { p: self.p, edges: self.edges.intersection(&other.edges).copied().collect() })
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.check_same_p(other)?;
        Ok(Self { p: self.p, edges: self.edges.union(&other.edges).copied().collect() })
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.p == other.p && self.edges.is_subset(&other.edges)
    }

    /// `p x p` 0/1 adjacency matrix.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.p, self.p);
        for (k, l) in self.iter() {
            a[(k, l)] = 1.0;
            a[(l, k)] = 1.0;
        }
        a
    }

    /// Neighbours of vertex `k`, ascending.
    pub fn neighbors(&self, k: usize) -> Vec<usize> {
        (0..self.p).filter(|&l| l != k && self.contains(k, l)).collect()
    }

    /// Vertex sets of the connected components, each ascending.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut label = vec![usize::MAX; self.p];
        let mut out = Vec::new();
        for start in 0..self.p {
            if label[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut stack = vec![start];
            let mut members = Vec::new();
            label[start] = id;
            while let Some(v) = stack.pop() {
                members.push(v);
                for w in self.neighbors(v) {
                    if label[w] == usize::MAX {
                        label[w] = id;
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }
}
