//! One-dimensional linear observation `y = αᵀx`.
//!
//! Under either hypothesis `y` is a zero-mean scalar Gaussian, so the Chernoff
//! information of the projection is `g(αᵀΣ₁α / αᵀΣ₂α)`. Since `g` is symmetric
//! under `x ↔ 1/x` and increasing above 1, the best `α` pushes the variance
//! ratio as far from 1 as possible: its extremes are the largest and smallest
//! generalized eigenvalues of `(Σ₁, Σ₂)`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::info::{chernoff, scalar_g};
use crate::linalg::{generalized_eigen, Matrix};
use crate::math::{abs, sqrt};
use crate::reduction::{CanonicalPair, TreePair};

/// An observation vector with the variance ratio it achieves.
#[derive(Debug, Clone, PartialEq)]
pub struct LtSolution {
    /// Any non-zero multiple describes the same observation.
    pub alpha: Vec<f64>,
    /// `max(r, 1/r)` for `r = αᵀΣ₁α / αᵀΣ₂α`.
    pub ratio: f64,
    pub ci: f64,
}

impl LtSolution {
    /// `alpha` scaled so its largest-magnitude coordinate is exactly 1.
    pub fn normalized_alpha(&self) -> Vec<f64> {
        let pivot = self
            .alpha
            .iter()
            .copied()
            .fold(0.0f64, |m, x| if abs(x) > abs(m) { x } else { m });
        if pivot == 0.0 {
            return self.alpha.clone();
        }
        self.alpha.iter().map(|x| x / pivot).collect()
    }

    /// False when the two models induce the same variance in every direction.
    pub fn is_informative(&self) -> bool {
        self.ci > 0.0
    }
}

/// Variance ratio `αᵀΣ₁α / αᵀΣ₂α`.
pub fn variance_ratio(sigma1: &Matrix, sigma2: &Matrix, alpha: &[f64]) -> Result<f64> {
    Ok(sigma1.quad_form(alpha)? / sigma2.quad_form(alpha)?)
}

/// Closed-form optimum for the 3-node skeleton: `α = [s₁, s₂, 1]` with
/// `s₁,₂ = −½ (w2 ± √β)`. With the node order of
/// [`canonical_covariances`](crate::reduction::canonical_covariances) it gives
/// `αᵀΣ₂α / αᵀΣ₁α = λ_max`.
pub fn optimal_alpha_canonical(cp: &CanonicalPair) -> LtSolution {
    let (s1, s2) = canonical_roots(cp);
    let lambda = cp.lambda_max();
    LtSolution {
        alpha: vec![s1, s2, 1.0],
        ratio: lambda,
        ci: scalar_g(lambda).unwrap_or(0.0),
    }
}

/// The two roots of `s² + w2 s + (1 − w2²)/(2 w1 − 2) = 0`.
pub fn canonical_roots(cp: &CanonicalPair) -> (f64, f64) {
    let sb = sqrt(cp.beta());
    (-0.5 * (cp.w2() + sb), -0.5 * (cp.w2() - sb))
}

/// Best single projection for an arbitrary positive definite pair, from the
/// extreme generalized eigenpairs.
pub fn optimize_alpha_numeric(sigma1: &Matrix, sigma2: &Matrix) -> Result<LtSolution> {
    let eig = generalized_eigen(sigma1, sigma2)?;
    let n = eig.values.len();
    let (lo, hi) = (eig.values[0], eig.values[n - 1]);
    let k = if hi >= 1.0 / lo { n - 1 } else { 0 };
    let alpha = eig.vectors.column(k);
    let r = variance_ratio(sigma1, sigma2, &alpha)?;
    let ratio = if r >= 1.0 { r } else { 1.0 / r };
    Ok(LtSolution {
        alpha,
        ratio,
        ci: scalar_g(ratio)?,
    })
}

/// Best projection with coordinate `node` (1-based) forced to zero. Returned
/// `alpha` has full length with a 0 in that slot.
pub fn optimize_alpha_excluding(sigma1: &Matrix, sigma2: &Matrix, node: usize) -> Result<LtSolution> {
    let n = sigma1.rows();
    if node == 0 || node > n {
        return Err(Error::NodeOutOfRange { node, n });
    }
    if n < 2 {
        return Err(Error::ObservationDims { p: 1, q: 1, n });
    }
    let sub = optimize_alpha_numeric(&sigma1.remove_index(node - 1), &sigma2.remove_index(node - 1))?;
    let mut alpha = sub.alpha.clone();
    alpha.insert(node - 1, 0.0);
    Ok(LtSolution { alpha, ..sub })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroCoordinateReport {
    pub node: usize,
    pub unconstrained_ci: f64,
    pub constrained_ci: f64,
}

impl ZeroCoordinateReport {
    /// Loss from forcing the coordinate to zero (never negative up to rounding).
    pub fn gap(&self) -> f64 {
        self.unconstrained_ci - self.constrained_ci
    }
}

/// Compares the best projection with and without coordinate `node`, for a
/// node whose neighbourhood is identical in both trees (a common leaf or a
/// common degree-2 node). For such nodes the two optima coincide.
pub fn verify_zero_coordinate(pair: &TreePair, node: usize) -> Result<ZeroCoordinateReport> {
    if !pair.is_common_leaf(node) && !pair.is_common_degree2(node) {
        return Err(Error::NodeDiffers(node));
    }
    let s1 = pair.tree1().covariance();
    let s2 = pair.tree2().covariance();
    lt_zero_coordinate_gap(&s1, &s2, node)
}

/// The same comparison without the structural precondition.
pub fn lt_zero_coordinate_gap(sigma1: &Matrix, sigma2: &Matrix, node: usize) -> Result<ZeroCoordinateReport> {
    let full = optimize_alpha_numeric(sigma1, sigma2)?;
    let constrained = optimize_alpha_excluding(sigma1, sigma2, node)?;
    Ok(ZeroCoordinateReport {
        node,
        unconstrained_ci: full.ci,
        constrained_ci: constrained.ci,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityReport {
    pub p: usize,
    pub q: usize,
    pub trials: usize,
    /// Best Chernoff information found with `q` observation rows.
    pub best_q: f64,
    /// Best found with `p` rows; includes the full-observation value when `p = N`.
    pub best_p: f64,
    /// Trials where extending a `q`-row map lost information.
    pub violations: usize,
    /// Largest `ci_q − ci_p` seen over all trials (≤ 0 when nothing is lost).
    pub worst_gap: f64,
}

impl MonotonicityReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.violations == 0 && self.best_q <= self.best_p + slack
    }
}

fn projected_ci(sigma1: &Matrix, sigma2: &Matrix, map: &Matrix) -> Result<f64> {
    Ok(chernoff(&sigma1.congruence(map)?, &sigma2.congruence(map)?)?.value)
}

fn random_rows<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// Empirical check that observing `p` linear combinations is never worse than
/// observing `q < p` of them. Each trial takes a `q`-row map (the exact
/// optimum when `q = 1`, random otherwise), appends `p − q` random rows, and
/// compares the two Chernoff informations.
pub fn dimension_monotonicity_check<R: Rng + ?Sized>(
    sigma1: &Matrix,
    sigma2: &Matrix,
    p: usize,
    q: usize,
    trials: usize,
    rng: &mut R,
) -> Result<MonotonicityReport> {
    let n = sigma1.rows();
    if q == 0 || q > p || p > n || sigma2.rows() != n {
        return Err(Error::ObservationDims { p, q, n });
    }
    let best_single = if q == 1 {
        Some(optimize_alpha_numeric(sigma1, sigma2)?)
    } else {
        None
    };

    let mut best_q = 0.0f64;
    let mut best_p = if p == n {
        chernoff(sigma1, sigma2)?.value
    } else {
        0.0
    };
    let mut violations = 0;
    let mut worst_gap = f64::NEG_INFINITY;

    for _ in 0..trials.max(1) {
        let base = match &best_single {
            Some(sol) => Matrix::from_row_slice(1, n, &sol.alpha),
            None => random_rows(rng, q, n),
        };
        let ci_q = match &best_single {
            Some(sol) => sol.ci,
            None => projected_ci(sigma1, sigma2, &base)?,
        };
        let extra = random_rows(rng, p - q, n);
        let mut rows = base.as_slice().to_vec();
        rows.extend_from_slice(extra.as_slice());
        let extended = Matrix::from_row_slice(p, n, &rows);
        let ci_p = projected_ci(sigma1, sigma2, &extended)?;

        best_q = best_q.max(ci_q);
        best_p = best_p.max(ci_p);
        worst_gap = worst_gap.max(ci_q - ci_p);
        if ci_p < ci_q - 1e-10 {
            violations += 1;
        }
    }

    Ok(MonotonicityReport {
        p,
        q,
        trials: trials.max(1),
        best_q,
        best_p,
        violations,
        worst_gap,
    })
}
