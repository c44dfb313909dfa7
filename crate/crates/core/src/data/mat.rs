use std::sync::Arc;

use crate::data::{Access, Sparsity};
use crate::error::{Error, Result};

/// A sparse matrix with a fixed CSR pattern.
///
/// Kernels never see a Mat directly: the engine hands them a dense local
/// block and inserts it with [`Mat::addto`] afterwards. Reads happen only
/// outside kernels (spmv, boundary conditions, solvers).
#[derive(Debug, Clone)]
pub struct Mat {
    sparsity: Arc<Sparsity>,
    values: Vec<f64>,
}

impl Mat {
    pub fn new(sparsity: Arc<Sparsity>) -> Self {
        let values = vec![0.0; sparsity.nnz()];
        Mat { sparsity, values }
    }

    /// Dense matrix stored in a dense pattern. Mostly useful for tests.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut m = Mat::new(Arc::new(Sparsity::dense(nrows, ncols)));
        m.values = rows.iter().flatten().copied().collect();
        m
    }

    pub fn sparsity(&self) -> &Arc<Sparsity> {
        &self.sparsity
    }

    pub fn nrows(&self) -> usize {
        self.sparsity.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.sparsity.ncols()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Stored value at `(row, col)`; zero when outside the pattern.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.sparsity
            .position(row, col)
            .map_or(0.0, |k| self.values[k])
    }

    /// Inserts a dense `rows.len() x cols.len()` block (row-major).
    ///
    /// `Inc` adds to the stored values, `Write` overwrites them. Every target
    /// entry is checked before anything is modified.
    pub fn addto(&mut self, rows: &[usize], cols: &[usize], block: &[f64], mode: Access) -> Result<()> {
        if block.len() != rows.len() * cols.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len() * cols.len(),
                got: block.len(),
            });
        }
        if !matches!(mode, Access::Inc | Access::Write) {
            return Err(Error::IllegalAccess(format!(
                "Mats accept only WRITE and INC, got {mode}"
            )));
        }
        for &r in rows {
            for &c in cols {
                if self.sparsity.position(r, c).is_none() {
                    return Err(Error::OutsideSparsity { row: r, col: c });
                }
            }
        }
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                let k = self.sparsity.position(r, c).unwrap();
                let v = block[i * cols.len() + j];
                if mode == Access::Inc {
                    self.values[k] += v;
                } else {
                    self.values[k] = v;
                }
            }
        }
        Ok(())
    }

    pub fn zero(&mut self) {
        self.values.fill(0.0);
    }

    /// y = A x, rows in ascending order, each row accumulated left to right.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.nrows()];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.ncols(),
                got: x.len(),
            });
        }
        if y.len() != self.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.nrows(),
                got: y.len(),
            });
        }
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            self.accumulate_row(r, x, &mut acc);
            *yr = acc;
        }
        Ok(())
    }

    /// Adds row `r` of `A x` onto `acc`, in stored column order.
    #[inline]
    pub(crate) fn accumulate_row(&self, r: usize, x: &[f64], acc: &mut f64) {
        let offs = self.sparsity.row_offsets();
        let cols = self.sparsity.col_indices();
        for k in offs[r]..offs[r + 1] {
            *acc += self.values[k] * x[cols[k]];
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows().min(self.ncols()))
            .map(|r| self.get(r, r))
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols()]; self.nrows()];
        for (r, row) in d.iter_mut().enumerate() {
            for (k, &c) in self.sparsity.row(r).iter().enumerate() {
                row[c] = self.values[self.sparsity.row_offsets()[r] + k];
            }
        }
        d
    }

    /// Sum of each row's stored values.
    pub fn row_sums(&self) -> Vec<f64> {
        let offs = self.sparsity.row_offsets();
        (0..self.nrows())
            .map(|r| self.values[offs[r]..offs[r + 1]].iter().sum())
            .collect()
    }
}

/// y = A x.
pub fn mat_spmv(mat: &Mat, x: &[f64]) -> Result<Vec<f64>> {
    mat.spmv(x)
}
