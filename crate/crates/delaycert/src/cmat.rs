//! Complex dense matrices with the two numerical kernels the checks rely on:
//! LU factorization with partial pivoting (resolvent solves, determinants)
//! and a Jacobi eigensolver for Hermitian matrices (spectral norms, lambda_max).
//!
//! Dimensions stay small here (systems rarely exceed n = 10, quadratic forms
//! m <= a handful), so accuracy and predictability win over asymptotics.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                data.len()
            )));
        }
        Ok(CMat { rows, cols, data })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn conj_entrywise(&self) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn add(&self, other: &CMat) -> Result<CMat> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("matrix addition".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(CMat {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, other: &CMat) -> Result<CMat> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("matrix subtraction".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(CMat {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, s: Complex64) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn mul(&self, other: &CMat) -> Result<CMat> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "matrix product {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut best = 0.0f64;
        for j in 0..self.cols {
            let mut s = 0.0;
            for i in 0..self.rows {
                s += self[(i, j)].norm();
            }
            best = best.max(s);
        }
        best
    }

    /// Largest singular value, computed as sqrt(lambda_max(M^H M)) with the
    /// Jacobi eigensolver. The Gram matrix is taken on the smaller side.
    pub fn spectral_norm(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        let gram = if self.rows >= self.cols {
            self.adjoint().mul(self).expect("gram")
        } else {
            self.mul(&self.adjoint()).expect("gram")
        };
        let lmax = hermitian_eigenvalues(&gram)
            .into_iter()
            .fold(0.0f64, f64::max);
        lmax.max(0.0).sqrt()
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting of a square complex matrix.
pub struct Lu {
    lu: CMat,
    piv: Vec<usize>,
    swaps: usize,
    exact_singular: bool,
}

impl Lu {
    pub fn factor(a: &CMat) -> Result<Lu> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch("LU of a non-square matrix".into()));
        }
        let n = a.rows;
        let mut lu = a.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        let mut exact_singular = false;
        for k in 0..n {
            // pivot on the largest modulus in column k
            let mut pk = k;
            let mut best = lu[(k, k)].norm();
            for i in (k + 1)..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    pk = i;
                }
            }
            if pk != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, pk * n + j);
                }
                piv.swap(k, pk);
                swaps += 1;
            }
            let pivot = lu[(k, k)];
            if pivot == ZERO {
                exact_singular = true;
                continue;
            }
            for i in (k + 1)..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f == ZERO {
                    continue;
                }
                for j in (k + 1)..n {
                    let t = lu[(k, j)];
                    lu[(i, j)] -= f * t;
                }
            }
        }
        Ok(Lu {
            lu,
            piv,
            swaps,
            exact_singular,
        })
    }

    pub fn is_exactly_singular(&self) -> bool {
        self.exact_singular
    }

    pub fn det(&self) -> Complex64 {
        let n = self.lu.rows;
        let mut d = Complex64::new(if self.swaps % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
        for i in 0..n {
            d *= self.lu[(i, i)];
        }
        d
    }

    /// Solve in place for a single right-hand side.
    pub fn solve_vec(&self, b: &mut [Complex64]) -> Result<()> {
        if self.exact_singular {
            return Err(Error::SingularAtP {
                p: ZERO,
                rcond: 0.0,
            });
        }
        let n = self.lu.rows;
        assert_eq!(b.len(), n, "solve_vec dimension");
        // apply the row permutation
        let mut x: Vec<Complex64> = (0..n).map(|i| b[self.piv[i]]).collect();
        // forward substitution (unit lower triangle)
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc;
        }
        // back substitution
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc / self.lu[(i, i)];
        }
        b.copy_from_slice(&x);
        Ok(())
    }

    /// Solve for every column of `b`.
    pub fn solve_mat(&self, b: &CMat) -> Result<CMat> {
        let n = self.lu.rows;
        if b.rows != n {
            return Err(Error::DimensionMismatch("solve_mat right-hand side".into()));
        }
        let mut out = CMat::zeros(n, b.cols);
        let mut col = vec![ZERO; n];
        for j in 0..b.cols {
            for i in 0..n {
                col[i] = b[(i, j)];
            }
            self.solve_vec(&mut col)?;
            for i in 0..n {
                out[(i, j)] = col[i];
            }
        }
        Ok(out)
    }

    /// 1-norm of the inverse, computed exactly by solving for each unit vector.
    pub fn inverse_norm_one(&self) -> Result<f64> {
        let n = self.lu.rows;
        let mut best = 0.0f64;
        let mut e = vec![ZERO; n];
        for j in 0..n {
            for v in e.iter_mut() {
                *v = ZERO;
            }
            e[j] = Complex64::new(1.0, 0.0);
            self.solve_vec(&mut e)?;
            let s: f64 = e.iter().map(|z| z.norm()).sum();
            best = best.max(s);
        }
        Ok(best)
    }

    /// Reciprocal 1-norm condition number estimate given `||A||_1`.
    pub fn rcond(&self, a_norm_one: f64) -> f64 {
        if self.exact_singular {
            return 0.0;
        }
        match self.inverse_norm_one() {
            Ok(inv) if inv > 0.0 && a_norm_one > 0.0 => 1.0 / (a_norm_one * inv),
            _ => 0.0,
        }
    }
}

impl CMat {
    fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Entries above roundoff in the skew part are symmetrized away first, so a
/// matrix that is Hermitian only up to floating noise is still handled.
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    assert!(h.is_square(), "hermitian_eigenvalues expects a square matrix");
    let n = h.rows;
    if n == 0 {
        return Vec::new();
    }
    // enforce exact Hermitian symmetry
    let mut a = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = 0.5 * (h[(i, j)] + h[(j, i)].conj());
        }
    }
    if n == 1 {
        return vec![a[(0, 0)].re];
    }
    let scale = a.max_abs();
    if scale == 0.0 {
        return vec![0.0; n];
    }
    let tol = 1e-15 * scale;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let abs_apq = apq.norm();
                if abs_apq <= tol * 1e-2 {
                    continue;
                }
                let phase = apq / abs_apq;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * abs_apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // column rotation: A <- A * J
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * phase.conj() * akq;
                    a[(k, q)] = s * phase * akp + c * akq;
                }
                // row rotation: A <- J^H * A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * phase * aqk;
                    a[(q, k)] = s * phase.conj() * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[(i, i)].re).collect()
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn lambda_max_hermitian(h: &CMat) -> f64 {
    hermitian_eigenvalues(h)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}
