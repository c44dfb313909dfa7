use super::LinearOperator;
use crate::data::Mat;
use crate::error::{Error, Result};

/// A 2x2 nested matrix; `None` blocks are zero.
#[derive(Debug, Clone)]
pub struct BlockMat {
    blocks: [[Option<Mat>; 2]; 2],
    row_sizes: [usize; 2],
    col_sizes: [usize; 2],
}

impl BlockMat {
    /// Block sizes must be given because a zero block carries no shape.
    pub fn new(blocks: [[Option<Mat>; 2]; 2], row_sizes: [usize; 2], col_sizes: [usize; 2]) -> Result<BlockMat> {
        for (i, row) in blocks.iter().enumerate() {
            for (j, b) in row.iter().enumerate() {
                if let Some(m) = b {
                    check(row_sizes[i], m.nrows())?;
                    check(col_sizes[j], m.ncols())?;
                }
            }
        }
        Ok(BlockMat {
            blocks,
            row_sizes,
            col_sizes,
        })
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&Mat> {
        self.blocks[i][j].as_ref()
    }

    pub fn block_mut(&mut self, i: usize, j: usize) -> Option<&mut Mat> {
        self.blocks[i][j].as_mut()
    }

    pub fn row_sizes(&self) -> [usize; 2] {
        self.row_sizes
    }

    pub fn col_sizes(&self) -> [usize; 2] {
        self.col_sizes
    }

    pub fn nrows(&self) -> usize {
        self.row_sizes[0] + self.row_sizes[1]
    }

    pub fn ncols(&self) -> usize {
        self.col_sizes[0] + self.col_sizes[1]
    }

    /// Dense copy in the concatenated numbering.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols()]; self.nrows()];
        for i in 0..2 {
            for j in 0..2 {
                let Some(m) = &self.blocks[i][j] else { continue };
                let (r0, c0) = (i * self.row_sizes[0], j * self.col_sizes[0]);
                for (r, row) in m.to_dense().into_iter().enumerate() {
                    out[r0 + r][c0..c0 + row.len()].copy_from_slice(&row);
                }
            }
        }
        out
    }
}

fn check(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// `y_i = sum_j A_ij x_j`, skipping zero blocks.
///
/// Each output row sums block 0 then block 1, entries in CSR order, so a
/// monolithic matrix with the same per-row ordering gives identical bits.
pub fn block_spmv(a: &BlockMat, x: (&[f64], &[f64])) -> Result<(Vec<f64>, Vec<f64>)> {
    check(a.col_sizes[0], x.0.len())?;
    check(a.col_sizes[1], x.1.len())?;
    let xs = [x.0, x.1];
    let mut ys = [vec![0.0; a.row_sizes[0]], vec![0.0; a.row_sizes[1]]];
    for (i, y) in ys.iter_mut().enumerate() {
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..2 {
                if let Some(m) = &a.blocks[i][j] {
                    m.accumulate_row(r, xs[j], &mut acc);
                }
            }
            *yr = acc;
        }
    }
    let [y0, y1] = ys;
    Ok((y0, y1))
}

impl LinearOperator for BlockMat {
    fn size(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check(self.nrows(), self.ncols())?;
        check(self.ncols(), x.len())?;
        check(self.nrows(), y.len())?;
        let (x0, x1) = x.split_at(self.col_sizes[0]);
        let (y0, y1) = block_spmv(self, (x0, x1))?;
        y[..y0.len()].copy_from_slice(&y0);
        y[y0.len()..].copy_from_slice(&y1);
        Ok(())
    }

    fn diagonal(&self) -> Vec<f64> {
        let mut d = Vec::with_capacity(self.nrows());
        for i in 0..2 {
            match &self.blocks[i][i] {
                Some(m) => d.extend(m.diagonal()),
                None => d.extend(std::iter::repeat(0.0).take(self.row_sizes[i])),
            }
        }
        d
    }
}
