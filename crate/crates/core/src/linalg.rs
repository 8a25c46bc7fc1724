//! Small dense linear algebra.
//!
//! Everything here works on row-major `f64` matrices of modest size (tens to a
//! few hundred rows). Determinants and inverses of covariance matrices all go
//! through [`Cholesky`], so the information routines never depend on the
//! closed forms in [`crate::tree`].

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::math::{abs, hypot, ln, sqrt};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from row-major data.
    ///
    /// Panics if `data.len() != rows * cols`.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data has the wrong length");
        Matrix {
            rows,
            cols,
            data: data.to_vec(),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(self.cols, rhs.rows));
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(self.cols, v.len()));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `vᵀ M v`.
    pub fn quad_form(&self, v: &[f64]) -> Result<f64> {
        let mv = self.mul_vec(v)?;
        Ok(mv.iter().zip(v).map(|(a, b)| a * b).sum())
    }

    /// `A M Aᵀ`: the covariance of `A x` when `M` is the covariance of `x`.
    pub fn congruence(&self, a: &Matrix) -> Result<Matrix> {
        a.matmul(self)?.matmul(&a.transpose())
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    fn zip_with(&self, rhs: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch(
                self.rows * self.cols,
                rhs.rows * rhs.cols,
            ));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise absolute difference; infinite on shape mismatch.
    pub fn max_abs_diff(&self, rhs: &Matrix) -> f64 {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&rhs.data)
            .fold(0.0, |m, (a, b)| f64::max(m, abs(a - b)))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| abs(self[(i, j)] - self[(j, i)]) <= tol))
    }

    /// Principal submatrix keeping the listed indices, in the given order.
    pub fn select(&self, keep: &[usize]) -> Matrix {
        Matrix::from_fn(keep.len(), keep.len(), |i, j| self[(keep[i], keep[j])])
    }

    /// Drops row and column `k`.
    pub fn remove_index(&self, k: usize) -> Matrix {
        let keep: Vec<usize> = (0..self.rows).filter(|&i| i != k).collect();
        self.select(&keep)
    }

    /// Row-major CSV, one matrix row per line.
    pub fn to_csv(&self) -> alloc::string::String {
        use core::fmt::Write;
        let mut s = alloc::string::String::new();
        for i in 0..self.rows {
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{x}");
            }
            s.push('\n');
        }
        s
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv())
    }
}

/// Lower-triangular factor `L` with `M = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Factors a symmetric positive definite matrix. Only the lower triangle
    /// of `m` is read.
    pub fn new(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let n = m.rows();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = m[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::NotPositiveDefinite);
            }
            let djj = sqrt(d);
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut s = m[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn lower(&self) -> &Matrix {
        &self.l
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim()).map(|i| ln(self.l[(i, i)])).sum::<f64>()
    }

    pub fn det(&self) -> f64 {
        let p = (0..self.dim()).map(|i| self.l[(i, i)]).product::<f64>();
        p * p
    }

    /// Solves `L y = b`.
    #[allow(clippy::needless_range_loop)]
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    /// Solves `Lᵀ x = y`.
    #[allow(clippy::needless_range_loop)]
    pub fn solve_upper(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    pub fn inverse(&self) -> Matrix {
        let n = self.dim();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        // exact symmetry
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (inv[(i, j)] + inv[(j, i)]);
                inv[(i, j)] = v;
                inv[(j, i)] = v;
            }
        }
        inv
    }

    /// `L⁻¹ M L⁻ᵀ`, the whitened form of `m` with respect to the factored matrix.
    pub fn whiten(&self, m: &Matrix) -> Result<Matrix> {
        let n = self.dim();
        if m.rows() != n || m.cols() != n {
            return Err(Error::DimensionMismatch(n, m.rows()));
        }
        // X = L⁻¹ M, column by column, then (L⁻¹ Xᵀ)ᵀ
        let mut x = Matrix::zeros(n, n);
        for j in 0..n {
            let col = self.solve_lower(&m.column(j));
            for i in 0..n {
                x[(i, j)] = col[i];
            }
        }
        let xt = x.transpose();
        let mut out = Matrix::zeros(n, n);
        for j in 0..n {
            let col = self.solve_lower(&xt.column(j));
            for i in 0..n {
                out[(i, j)] = col[i];
            }
        }
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (out[(i, j)] + out[(j, i)]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        Ok(out)
    }
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending.
/// Column `k` of `vectors` belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymmetricEigen {
    /// Cyclic Jacobi rotations until the off-diagonal mass is negligible.
    pub fn new(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let n = m.rows();
        let mut a = m.clone();
        let mut v = Matrix::identity(n);
        let scale = a.as_slice().iter().fold(0.0f64, |s, x| s.max(abs(*x))).max(f64::MIN_POSITIVE);

        for _sweep in 0..100 {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[(p, q)] * a[(p, q)];
                }
            }
            if sqrt(off) <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if abs(apq) <= f64::MIN_POSITIVE {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    let t = sign / (abs(theta) + hypot(theta, 1.0));
                    let c = 1.0 / sqrt(t * t + 1.0);
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
        let values = order.iter().map(|&i| a[(i, i)]).collect();
        let vectors = Matrix::from_fn(n, n, |i, k| v[(i, order[k])]);
        Ok(SymmetricEigen { values, vectors })
    }
}

/// Generalized symmetric eigenproblem `Σ₁ v = μ Σ₂ v` by congruence with the
/// Cholesky factor of `Σ₂`. Eigenvalues ascending; eigenvectors are returned
/// in the original coordinates (columns of `vectors`).
pub fn generalized_eigen(sigma1: &Matrix, sigma2: &Matrix) -> Result<SymmetricEigen> {
    if sigma1.rows() != sigma2.rows() || sigma1.cols() != sigma2.cols() {
        return Err(Error::DimensionMismatch(sigma1.rows(), sigma2.rows()));
    }
    Cholesky::new(sigma1)?;
    let chol = Cholesky::new(sigma2)?;
    let white = chol.whiten(sigma1)?;
    let eig = SymmetricEigen::new(&white)?;
    let n = white.rows();
    let mut vectors = Matrix::zeros(n, n);
    for k in 0..n {
        let x = chol.solve_upper(&eig.vectors.column(k));
        for i in 0..n {
            vectors[(i, k)] = x[i];
        }
    }
    Ok(SymmetricEigen {
        values: eig.values,
        vectors,
    })
}

/// All generalized eigenvalues of `(Σ₁, Σ₂)`, i.e. the spectrum of
/// `Σ₂^{-1/2} Σ₁ Σ₂^{-1/2}`, ascending.
pub fn generalized_eigenvalues(sigma1: &Matrix, sigma2: &Matrix) -> Result<Vec<f64>> {
    Ok(generalized_eigen(sigma1, sigma2)?.values)
}
