//! Dense row-major matrices. Network weights are small and dense by
//! construction, so no sparse or blocked storage is offered.

use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Scalar> Matrix<F> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::from_vec(rows, cols, vec![F::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    /// `λ·I_n`.
    pub fn scaled_identity(n: usize, lambda: F) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = lambda;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix<F> {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn matvec(&self, x: &[F]) -> Vec<F> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        let mut y = vec![F::zero(); self.rows];
        for (i, yi) in y.iter_mut().enumerate() {
            let row = self.row(i);
            let mut acc = F::zero();
            for (a, b) in row.iter().zip(x.iter()) {
                acc = acc + *a * *b;
            }
            *yi = acc;
        }
        y
    }

    pub fn matmul(&self, other: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == F::zero() {
                    continue;
                }
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                let src = other.row(k);
                for (d, s) in dst.iter_mut().zip(src.iter()) {
                    *d = *d + a * *s;
                }
            }
        }
        out
    }

    /// Block-diagonal stack of `blocks` in order.
    pub fn block_diag(blocks: &[&Matrix<F>]) -> Matrix<F> {
        assert!(!blocks.is_empty(), "block_diag needs at least one block");
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out[(r0 + i, c0 + j)] = (*b)[(i, j)];
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Horizontal concatenation `[A B …]`; all blocks share a row count.
    pub fn hconcat(blocks: &[&Matrix<F>]) -> Matrix<F> {
        assert!(!blocks.is_empty(), "hconcat needs at least one block");
        let rows = blocks[0].rows;
        assert!(blocks.iter().all(|b| b.rows == rows), "hconcat row mismatch");
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(rows, cols);
        let mut c0 = 0;
        for b in blocks {
            for i in 0..rows {
                for j in 0..b.cols {
                    out[(i, c0 + j)] = (*b)[(i, j)];
                }
            }
            c0 += b.cols;
        }
        out
    }

    /// Vertical concatenation; all blocks share a column count.
    pub fn vconcat(blocks: &[&Matrix<F>]) -> Matrix<F> {
        assert!(!blocks.is_empty(), "vconcat needs at least one block");
        let cols = blocks[0].cols;
        assert!(blocks.iter().all(|b| b.cols == cols), "vconcat column mismatch");
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut out = Matrix::zeros(rows, cols);
        let mut r0 = 0;
        for b in blocks {
            for i in 0..b.rows {
                out.data[(r0 + i) * cols..(r0 + i + 1) * cols].copy_from_slice(b.row(i));
            }
            r0 += b.rows;
        }
        out
    }

    pub fn scale(&self, lambda: F) -> Matrix<F> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| *v * lambda).collect(),
        }
    }
}

impl<F> std::ops::Index<(usize, usize)> for Matrix<F> {
    type Output = F;
    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.cols + j]
    }
}

impl<F> std::ops::IndexMut<(usize, usize)> for Matrix<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.cols + j]
    }
}
