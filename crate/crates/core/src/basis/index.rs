use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A d-tuple of non-negative integers labelling the tensor Hermite function
/// `h_k(x) = h_{k_1}(x_1) ... h_{k_d}(x_d)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::ZeroDimension);
        }
        Ok(Self(entries))
    }

    pub fn zero(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    /// Unit index `e_axis` scaled by `n`.
    pub fn axis(dim: usize, axis: usize, n: usize) -> Self {
        let mut entries = vec![0; dim];
        entries[axis] = n;
        Self(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|k| = k_1 + ... + k_d`.
    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }
}

impl From<&[usize]> for MultiIndex {
    fn from(entries: &[usize]) -> Self {
        Self(entries.to_vec())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// All multi-indices with `|k| <= N` in graded lexicographic order, together
/// with the neighbour tables used by the ladder operators.
///
/// Within one degree shell the tuples appear in increasing lexicographic
/// order, so `(0,1)` precedes `(1,0)`. The order for `N` is a prefix of the
/// order for `N + 1`.
#[derive(Debug, PartialEq, Eq)]
pub struct IndexSet {
    dim: usize,
    degree: usize,
    indices: Vec<MultiIndex>,
    degrees: Vec<usize>,
    lookup: HashMap<MultiIndex, usize>,
    // raise[axis][pos] = position of k + e_axis, None on the outer shell
    raise: Vec<Vec<Option<usize>>>,
    lower: Vec<Vec<Option<usize>>>,
}

impl IndexSet {
    pub fn new(dim: usize, degree: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut indices = Vec::with_capacity(binomial(degree + dim, dim));
        let mut scratch = vec![0; dim];
        for m in 0..=degree {
            compositions(m, 0, &mut scratch, &mut indices);
        }
        let degrees: Vec<usize> = indices.iter().map(MultiIndex::degree).collect();
        let lookup: HashMap<MultiIndex, usize> =
            indices.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();

        let mut raise = vec![vec![None; indices.len()]; dim];
        let mut lower = vec![vec![None; indices.len()]; dim];
        for (pos, k) in indices.iter().enumerate() {
            for axis in 0..dim {
                if degrees[pos] < degree {
                    let mut up = k.clone();
                    up.0[axis] += 1;
                    let target = lookup[&up];
                    raise[axis][pos] = Some(target);
                    lower[axis][target] = Some(pos);
                }
            }
        }

        Ok(Self { dim, degree, indices, degrees, lookup, raise, lower })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Truncation degree `N`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn get(&self, pos: usize) -> &MultiIndex {
        &self.indices[pos]
    }

    /// `|k|` of the index stored at `pos`.
    pub fn degree_at(&self, pos: usize) -> usize {
        self.degrees[pos]
    }

    pub fn position(&self, k: &MultiIndex) -> Option<usize> {
        self.lookup.get(k).copied()
    }

    pub(crate) fn raised(&self, axis: usize, pos: usize) -> Option<usize> {
        self.raise[axis][pos]
    }

    pub(crate) fn lowered(&self, axis: usize, pos: usize) -> Option<usize> {
        self.lower[axis][pos]
    }

    /// Eigenvalue `2|k| + d` of the harmonic oscillator at `pos`.
    pub fn eigenvalue(&self, pos: usize) -> f64 {
        (2 * self.degrees[pos] + self.dim) as f64
    }

    /// Row-major offsets of every index inside the dense box `[0, side)^d`.
    pub(crate) fn box_offsets(&self, side: usize) -> Vec<usize> {
        self.indices
            .iter()
            .map(|k| k.0.iter().fold(0, |acc, &e| acc * side + e))
            .collect()
    }
}

fn compositions(remaining: usize, slot: usize, scratch: &mut [usize], out: &mut Vec<MultiIndex>) {
    let last = scratch.len() - 1;
    if slot == last {
        scratch[slot] = remaining;
        out.push(MultiIndex(scratch.to_vec()));
        return;
    }
    for first in 0..=remaining {
        scratch[slot] = first;
        compositions(remaining - first, slot + 1, scratch, out);
    }
}

/// Binomial coefficient `C(n, k)` in exact integer arithmetic.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// The graded ordered list of all `k` with `|k| <= degree`.
pub fn enumerate_indices(dim: usize, degree: usize) -> Result<Vec<MultiIndex>> {
    Ok(IndexSet::new(dim, degree)?.indices)
}
