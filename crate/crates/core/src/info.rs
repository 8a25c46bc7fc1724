//! KL divergence and Chernoff information for zero-mean Gaussians, the scalar
//! Chernoff function `g`, and Chernoff information for discrete PMFs.
//!
//! For two Gaussians the Chernoff point lies on the curve
//! `Σ_λ⁻¹ = λ Σ₁⁻¹ + (1 − λ) Σ₂⁻¹`, at the `λ*` where the divergences from
//! `Σ_λ` to both endpoints coincide. The gap
//! `h(λ) = D(Σ_λ‖Σ₁) − D(Σ_λ‖Σ₂)` is minus the derivative of the convex log
//! partition function `ln ∫ p₁^λ p₂^{1−λ}`, so it is non-increasing and a
//! plain bisection finds the crossing.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::math::{abs, exp, ln, ln_1p};

const BISECTION_WIDTH: f64 = 1e-12;
const BISECTION_MAX_ITER: usize = 200;

/// Outcome of a Chernoff-point search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChernoffResult {
    pub lambda_star: f64,
    /// The Chernoff information, `D(Σ_λ*‖Σ₂)`.
    pub value: f64,
    pub kl_to_1: f64,
    pub kl_to_2: f64,
}

fn check_pair(sigma1: &Matrix, sigma2: &Matrix) -> Result<()> {
    for m in [sigma1, sigma2] {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
    }
    if sigma1.rows() != sigma2.rows() {
        return Err(Error::DimensionMismatch(sigma1.rows(), sigma2.rows()));
    }
    Ok(())
}

/// `D(N(0, Σ₁) ‖ N(0, Σ₂)) = ½ ln(|Σ₂|/|Σ₁|) + ½ tr(Σ₂⁻¹Σ₁) − N/2`.
pub fn kl(sigma1: &Matrix, sigma2: &Matrix) -> Result<f64> {
    check_pair(sigma1, sigma2)?;
    let c1 = Cholesky::new(sigma1)?;
    let c2 = Cholesky::new(sigma2)?;
    Ok(kl_factored(sigma1, &c1, &c2).max(0.0))
}

fn kl_factored(sigma1: &Matrix, c1: &Cholesky, c2: &Cholesky) -> f64 {
    // tr(Σ₂⁻¹Σ₁) = ‖L₂⁻¹ L₁‖²_F
    let n = sigma1.rows();
    let l1 = c1.lower();
    let mut trace = 0.0;
    for j in 0..n {
        let col = c2.solve_lower(&l1.column(j));
        trace += col.iter().map(|x| x * x).sum::<f64>();
    }
    0.5 * (c2.log_det() - c1.log_det() + trace - n as f64)
}

/// Precomputed precisions for repeated evaluation along the exponential family.
struct Family {
    prec1: Matrix,
    prec2: Matrix,
    chol1: Cholesky,
    chol2: Cholesky,
}

impl Family {
    fn new(sigma1: &Matrix, sigma2: &Matrix) -> Result<Self> {
        check_pair(sigma1, sigma2)?;
        let chol1 = Cholesky::new(sigma1)?;
        let chol2 = Cholesky::new(sigma2)?;
        Ok(Family {
            prec1: chol1.inverse(),
            prec2: chol2.inverse(),
            chol1,
            chol2,
        })
    }

    fn sigma(&self, lambda: f64) -> Result<(Matrix, Cholesky)> {
        let prec = self
            .prec1
            .scale(lambda)
            .add(&self.prec2.scale(1.0 - lambda))?;
        let inv = Cholesky::new(&prec)?.inverse();
        let chol = Cholesky::new(&inv)?;
        Ok((inv, chol))
    }

    /// `(D(Σ_λ‖Σ₁), D(Σ_λ‖Σ₂))`.
    fn divergences(&self, lambda: f64) -> Result<(f64, f64)> {
        let (s, c) = self.sigma(lambda)?;
        Ok((
            kl_factored(&s, &c, &self.chol1),
            kl_factored(&s, &c, &self.chol2),
        ))
    }
}

/// `Σ_λ = (λ Σ₁⁻¹ + (1 − λ) Σ₂⁻¹)⁻¹`.
pub fn sigma_lambda(sigma1: &Matrix, sigma2: &Matrix, lambda: f64) -> Result<Matrix> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::LambdaRange(lambda));
    }
    Ok(Family::new(sigma1, sigma2)?.sigma(lambda)?.0)
}

/// Chernoff information between `N(0, Σ₁)` and `N(0, Σ₂)`.
///
/// Equal inputs give `value = 0` at `λ* = ½`.
pub fn chernoff(sigma1: &Matrix, sigma2: &Matrix) -> Result<ChernoffResult> {
    let fam = Family::new(sigma1, sigma2)?;
    let gap = |lambda: f64| -> Result<(f64, f64, f64)> {
        let (d1, d2) = fam.divergences(lambda)?;
        Ok((d1 - d2, d1, d2))
    };

    let result_at = |lambda: f64| -> Result<ChernoffResult> {
        let (_, d1, d2) = gap(lambda)?;
        let (d1, d2) = (d1.max(0.0), d2.max(0.0));
        Ok(ChernoffResult {
            lambda_star: lambda,
            value: d2,
            kl_to_1: d1,
            kl_to_2: d2,
        })
    };

    // h(0) = D(Σ₂‖Σ₁) ≥ 0 and h(1) = −D(Σ₁‖Σ₂) ≤ 0; both vanish only for equal inputs.
    let (h0, _, _) = gap(0.0)?;
    let (h1, _, _) = gap(1.0)?;
    if !(h0 > 0.0 && h1 < 0.0) {
        return result_at(0.5);
    }

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let (h, _, _) = gap(mid)?;
        if h == 0.0 {
            return result_at(mid);
        }
        if h > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= BISECTION_WIDTH {
            break;
        }
    }
    result_at(0.5 * (lo + hi))
}

/// The pair of models with the smallest Chernoff information, which sets the
/// error exponent of an m-ary test with equal priors.
pub fn min_pairwise_chernoff(models: &[Matrix]) -> Result<(usize, usize, ChernoffResult)> {
    let mut best: Option<(usize, usize, ChernoffResult)> = None;
    for a in 0..models.len() {
        for b in (a + 1)..models.len() {
            let r = chernoff(&models[a], &models[b])?;
            if best.is_none_or(|(_, _, x)| r.value < x.value) {
                best = Some((a, b, r));
            }
        }
    }
    best.ok_or(Error::DimensionMismatch(models.len(), 2))
}

/// Chernoff information between two zero-mean scalar Gaussians whose variance
/// ratio is `x`:
///
/// `g(x) = ½ [ ln((x − 1)/(e ln x)) + ln x/(x − 1) ]`, with `g(1) = 0` and
/// `g(x) = g(1/x)`.
pub fn scalar_g(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::NonPositive(x));
    }
    let t = x - 1.0;
    if abs(t) < 1e-6 {
        return Ok(t * t / 16.0);
    }
    // u = ln x / (x − 1); g = ½ (u − 1 − ln u)
    let u = ln_1p(t) / t;
    let d = u - 1.0;
    Ok((0.5 * (d - ln_1p(d))).max(0.0))
}

/// Chernoff information between `N(0, var1)` and `N(0, var2)`.
pub fn scalar_chernoff(var1: f64, var2: f64) -> Result<f64> {
    for v in [var1, var2] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::NonPositive(v));
        }
    }
    scalar_g(var2 / var1)
}

/// A probability mass function over a finite set of states.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePmf {
    probs: Vec<f64>,
}

impl DiscretePmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidPmf("no states"));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidPmf("negative or non-finite entry"));
        }
        let total: f64 = probs.iter().sum();
        if abs(total - 1.0) > 1e-12 {
            return Err(Error::InvalidPmf("entries do not sum to 1"));
        }
        Ok(DiscretePmf { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Merges states `i` and `j` (0-based) into one state at position
/// `min(i, j)`; the other state is removed.
pub fn merge_states(p: &DiscretePmf, i: usize, j: usize) -> Result<DiscretePmf> {
    let len = p.len();
    for index in [i, j] {
        if index >= len {
            return Err(Error::StateIndex { index, len });
        }
    }
    if i == j {
        return Err(Error::StateIndex { index: j, len });
    }
    let (keep, drop) = (i.min(j), i.max(j));
    let mut probs = p.probs.clone();
    probs[keep] += probs[drop];
    probs.remove(drop);
    Ok(DiscretePmf { probs })
}

/// `ln Σ pᵢ^λ qᵢ^{1−λ}` on the open interval, and its one-sided limits at the ends.
fn log_partition(p: &[f64], q: &[f64], lambda: f64) -> f64 {
    let s: f64 = if lambda <= 0.0 {
        p.iter().zip(q).filter(|(a, _)| **a > 0.0).map(|(_, b)| *b).sum()
    } else if lambda >= 1.0 {
        p.iter().zip(q).filter(|(_, b)| **b > 0.0).map(|(a, _)| *a).sum()
    } else {
        p.iter()
            .zip(q)
            .filter(|(a, b)| **a > 0.0 && **b > 0.0)
            .map(|(a, b)| exp(lambda * ln(*a) + (1.0 - lambda) * ln(*b)))
            .sum()
    };
    ln(s)
}

/// `−min_{λ∈[0,1]} ln Σ pᵢ^λ qᵢ^{1−λ}` by golden-section search.
///
/// States where exactly one PMF is zero contribute nothing inside `(0, 1)`;
/// disjoint supports give `+∞`.
pub fn discrete_chernoff(p: &DiscretePmf, q: &DiscretePmf) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(p.len(), q.len()));
    }
    let (p, q) = (p.probs(), q.probs());
    if p == q {
        return Ok(0.0);
    }
    if !p.iter().zip(q).any(|(a, b)| *a > 0.0 && *b > 0.0) {
        return Ok(f64::INFINITY);
    }
    let f = |l: f64| log_partition(p, q, l);

    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-12 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let interior = f(0.5 * (a + b)).min(f1).min(f2);
    let min = interior.min(f(0.0)).min(f(1.0));
    Ok((-min).max(0.0))
}
