use nalgebra::DMatrix;

use crate::error::{dim_err, Result};

/// Ordered list `X_0 .. X_L` of equally shaped real blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSequence {
    rows: usize,
    cols: usize,
    blocks: Vec<DMatrix<f64>>,
}

impl BlockSequence {
    pub fn new(blocks: Vec<DMatrix<f64>>) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return dim_err("block sequence must contain at least one block");
        };
        let (rows, cols) = first.shape();
        if let Some((k, b)) = blocks.iter().enumerate().find(|(_, b)| b.shape() != (rows, cols)) {
            return dim_err(format!(
                "block {k} has shape {:?}, expected {:?}",
                b.shape(),
                (rows, cols)
            ));
        }
        Ok(Self { rows, cols, blocks })
    }

    pub fn zeros(rows: usize, cols: usize, len: usize) -> Self {
        Self {
            rows,
            cols,
            blocks: vec![DMatrix::zeros(rows, cols); len.max(1)],
        }
    }

    /// Splits a wide matrix `[X_0 X_1 ... X_L]` into blocks of `cols` columns.
    pub fn from_wide(m: &DMatrix<f64>, cols: usize) -> Result<Self> {
        if cols == 0 || m.ncols() % cols != 0 || m.ncols() == 0 {
            return dim_err(format!(
                "wide matrix with {} columns cannot be split into blocks of {cols}",
                m.ncols()
            ));
        }
        let blocks = (0..m.ncols() / cols)
            .map(|k| m.columns(k * cols, cols).into_owned())
            .collect();
        Ok(Self {
            rows: m.nrows(),
            cols,
            blocks,
        })
    }

    pub fn to_wide(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.rows, self.cols * self.blocks.len());
        for (k, b) in self.blocks.iter().enumerate() {
            out.columns_mut(k * self.cols, self.cols).copy_from(b);
        }
        out
    }

    pub fn block_shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Number of blocks, `L + 1`.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Index of the final block, `L`.
    pub fn last_index(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn blocks(&self) -> &[DMatrix<f64>] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &DMatrix<f64> {
        &self.blocks[k]
    }

    pub fn block_mut(&mut self, k: usize) -> &mut DMatrix<f64> {
        &mut self.blocks[k]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.dot(b))
            .sum()
    }
}
