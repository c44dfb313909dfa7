use std::sync::Arc;

use crate::error::{Error, Result};
use crate::topology::{Map, Set};

/// A CSR non-zero pattern. Column indices are strictly increasing within
/// each row.
#[derive(Debug, Clone, PartialEq)]
pub struct Sparsity {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    row_set: Option<(Set, usize)>,
    col_set: Option<(Set, usize)>,
}

impl Sparsity {
    /// Builds a pattern from raw CSR arrays, validating the invariants.
    pub fn from_csr(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 || row_offsets[0] != 0 {
            return Err(Error::DimensionMismatch {
                expected: nrows + 1,
                got: row_offsets.len(),
            });
        }
        if *row_offsets.last().unwrap() != col_indices.len() {
            return Err(Error::DimensionMismatch {
                expected: col_indices.len(),
                got: *row_offsets.last().unwrap(),
            });
        }
        for r in 0..nrows {
            let (lo, hi) = (row_offsets[r], row_offsets[r + 1]);
            if lo > hi {
                return Err(Error::ShapeMismatch(format!("row offsets decrease at row {r}")));
            }
            let row = &col_indices[lo..hi];
            if row.windows(2).any(|w| w[0] >= w[1]) || row.iter().any(|&c| c >= ncols) {
                return Err(Error::ShapeMismatch(format!(
                    "row {r} columns not strictly increasing or out of range"
                )));
            }
        }
        Ok(Sparsity {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            row_set: None,
            col_set: None,
        })
    }

    /// Pattern with every entry of an `nrows x ncols` matrix present.
    pub fn dense(nrows: usize, ncols: usize) -> Self {
        let row_offsets = (0..=nrows).map(|r| r * ncols).collect();
        let col_indices = (0..nrows).flat_map(|_| 0..ncols).collect();
        Sparsity::from_csr(nrows, ncols, row_offsets, col_indices).expect("dense pattern is valid")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[r]..self.row_offsets[r + 1]]
    }

    /// The (set, dim) pair the rows were built from, when built from maps.
    pub fn row_space(&self) -> Option<&(Set, usize)> {
        self.row_set.as_ref()
    }

    pub fn col_space(&self) -> Option<&(Set, usize)> {
        self.col_set.as_ref()
    }

    /// Index into the value array of entry `(row, col)`, if present.
    #[inline]
    pub fn position(&self, row: usize, col: usize) -> Option<usize> {
        if row >= self.nrows {
            return None;
        }
        let lo = self.row_offsets[row];
        self.row(row).binary_search(&col).ok().map(|k| lo + k)
    }

    /// Max |row - col| over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.nrows)
            .flat_map(|r| self.row(r).iter().map(move |&c| r.abs_diff(c)))
            .max()
            .unwrap_or(0)
    }
}

/// Builds the pattern produced by assembling a local `(arity*row_dim) x
/// (arity*col_dim)` block for every entity of the maps' common source set.
pub fn build_sparsity(
    row_map: &Map,
    col_map: &Map,
    row_dim: usize,
    col_dim: usize,
) -> Result<Arc<Sparsity>> {
    if row_map.source() != col_map.source() {
        return Err(Error::SourceMismatch {
            map: col_map.name().to_string(),
            expected: row_map.source().name().to_string(),
            found: col_map.source().name().to_string(),
        });
    }
    let n_row_nodes = row_map.target().size();
    let n_col_nodes = col_map.target().size();
    let inverse = row_map.inverse();

    // pass 1: unique column nodes per row node
    let mut stamp = vec![usize::MAX; n_col_nodes];
    let mut counts = vec![0usize; n_row_nodes];
    for (rn, cells) in inverse.iter().enumerate() {
        for &e in cells {
            for &cn in col_map.row(e) {
                if stamp[cn] != rn {
                    stamp[cn] = rn;
                    counts[rn] += 1;
                }
            }
        }
    }

    let nrows = n_row_nodes * row_dim;
    let ncols = n_col_nodes * col_dim;
    let mut row_offsets = Vec::with_capacity(nrows + 1);
    row_offsets.push(0);
    for &c in &counts {
        for _ in 0..row_dim {
            let last = *row_offsets.last().unwrap();
            row_offsets.push(last + c * col_dim);
        }
    }

    // pass 2: fill
    let mut col_indices = vec![0usize; *row_offsets.last().unwrap()];
    stamp.fill(usize::MAX);
    let mut nodes = Vec::new();
    for (rn, cells) in inverse.iter().enumerate() {
        nodes.clear();
        for &e in cells {
            for &cn in col_map.row(e) {
                if stamp[cn] != rn {
                    stamp[cn] = rn;
                    nodes.push(cn);
                }
            }
        }
        nodes.sort_unstable();
        for a in 0..row_dim {
            let r = rn * row_dim + a;
            let mut k = row_offsets[r];
            for &cn in &nodes {
                for b in 0..col_dim {
                    col_indices[k] = cn * col_dim + b;
                    k += 1;
                }
            }
        }
    }

    Ok(Arc::new(Sparsity {
        nrows,
        ncols,
        row_offsets,
        col_indices,
        row_set: Some((row_map.target().clone(), row_dim)),
        col_set: Some((col_map.target().clone(), col_dim)),
    }))
}
