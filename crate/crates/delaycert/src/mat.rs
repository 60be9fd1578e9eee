//! Small dense real matrices.
//!
//! Everything in this crate works with systems whose dimension is tiny
//! (n rarely exceeds 10), so a plain row-major `Vec<f64>` container beats
//! pulling in a full linear-algebra stack.

use crate::cmat::CMat;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Row-major real matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl RMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RMat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                data.len()
            )));
        }
        Ok(RMat { rows, cols, data })
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// `(A + A^T)/2`; used to make quadratic-form blocks exactly symmetric.
    pub fn symmetrized(&self) -> RMat {
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = 0.5 * (self[(i, j)] + self[(j, i)]);
            }
        }
        out
    }

    pub fn transpose(&self) -> RMat {
        let mut out = RMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> RMat {
        RMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &RMat) -> Result<RMat> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("matrix addition".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(RMat {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "mul_vec dimension");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn to_complex(&self) -> CMat {
        let mut c = CMat::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                c[(i, j)] = self[(i, j)].into();
            }
        }
        c
    }

    /// Spectral norm (largest singular value) via the Hermitian eigensolver
    /// applied to `A^T A`.
    pub fn spectral_norm(&self) -> f64 {
        self.to_complex().spectral_norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Index<(usize, usize)> for RMat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrize_and_transpose() {
        let m = RMat::from_rows(2, 2, vec![1.0, 2.0, 0.0, 3.0]).unwrap();
        let s = m.symmetrized();
        assert_eq!(s[(0, 1)], 1.0);
        assert_eq!(s[(1, 0)], 1.0);
        let t = m.transpose();
        assert_eq!(t[(1, 0)], 2.0);
    }

    #[test]
    fn spectral_norm_rank_one() {
        // [[3,0],[4,0]] has singular values {5, 0}
        let m = RMat::from_rows(2, 2, vec![3.0, 0.0, 4.0, 0.0]).unwrap();
        assert!((m.spectral_norm() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn mul_vec_small() {
        let m = RMat::from_rows(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let v = m.mul_vec(&[1.0, 1.0, 1.0]);
        assert_eq!(v, vec![6.0, 15.0]);
    }
}
