//! Oracles that share no code with the library's factorization or closed forms.
#![allow(dead_code)]

use graftci::Matrix;
use nalgebra::DMatrix;

pub fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

pub fn from_na(m: &DMatrix<f64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Determinant by LU with partial pivoting.
pub fn lu_det(m: &Matrix) -> f64 {
    to_na(m).lu().determinant()
}

pub fn lu_inverse(m: &Matrix) -> Matrix {
    from_na(&to_na(m).lu().try_inverse().expect("invertible"))
}

fn inv_sqrt_spd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let e = m.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(|x| 1.0 / x.sqrt()));
    &e.eigenvectors * d * e.eigenvectors.transpose()
}

/// Spectrum of `Σ₂^{-1/2} Σ₁ Σ₂^{-1/2}`, ascending.
pub fn generalized_eigs(s1: &Matrix, s2: &Matrix) -> Vec<f64> {
    let w = inv_sqrt_spd(&to_na(s2));
    let m = &w * to_na(s1) * &w;
    let m = (&m + m.transpose()) * 0.5;
    let mut v: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `½ [λ ln|Σ₁| + (1 − λ) ln|Σ₂| − ln|Σ_λ|]`, i.e. `−ln ∫ p₁^λ p₂^{1−λ}`.
pub fn chernoff_function(s1: &Matrix, s2: &Matrix, lambda: f64) -> f64 {
    let a = to_na(s1);
    let b = to_na(s2);
    let ai = a.clone().lu().try_inverse().unwrap();
    let bi = b.clone().lu().try_inverse().unwrap();
    let prec = ai * lambda + bi * (1.0 - lambda);
    let ld_lambda = -prec.lu().determinant().ln();
    0.5 * (lambda * a.lu().determinant().ln() + (1.0 - lambda) * b.lu().determinant().ln() - ld_lambda)
}

/// Maximizes a unimodal function on `[0, 1]` by golden section.
pub fn golden_max(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-11 {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Chernoff information by direct maximization of the Chernoff function.
pub fn chernoff_oracle(s1: &Matrix, s2: &Matrix) -> (f64, f64) {
    golden_max(|l| chernoff_function(s1, s2, l))
}

/// Scalar Chernoff information by Simpson quadrature of `∫ p₁^λ p₂^{1−λ}`.
pub fn scalar_quadrature_oracle(v1: f64, v2: f64) -> f64 {
    let sd = v1.max(v2).sqrt();
    let l = 40.0 * sd;
    let n = 20_000;
    let h = 2.0 * l / n as f64;
    let pdf = |x: f64, v: f64| (-(x * x) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt();
    let integral = |lambda: f64| {
        let f = |x: f64| pdf(x, v1).powf(lambda) * pdf(x, v2).powf(1.0 - lambda);
        let mut s = f(-l) + f(l);
        for k in 1..n {
            let x = -l + k as f64 * h;
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    };
    golden_max(|lambda| -integral(lambda).ln()).1
}

/// Random symmetric positive definite matrix with eigenvalues in a modest range.
pub fn random_spd(n: usize, rng: &mut impl rand::Rng) -> Matrix {
    let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let mut m = a.matmul(&a.transpose()).unwrap();
    for i in 0..n {
        m[(i, i)] += 0.5;
    }
    m
}
