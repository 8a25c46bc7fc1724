//! Full observation against the best single projection.
//!
//! For a canonical pair both exponents depend on `λ_max` alone:
//! `CI₂ = ln((λ + 1)/(2√λ))` for the full vector and `CI₁ = g(λ)` for the
//! best projection. Their ratio stays in `[1, 2]` and tends to 2 as `λ → 1`.
//! Counting measurements instead of time slots divides `CI₂` by 3.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::info::scalar_g;
use crate::math::{ln, ln_1p, sqrt};
use crate::reduction::CanonicalPair;

/// Exponents per time slot and per scalar measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedCi {
    pub ci1: f64,
    pub ci2: f64,
    pub ci1_hat: f64,
    pub ci2_hat: f64,
    /// `ci2 / ci1`, in `[1, 2]`.
    pub ratio: f64,
    /// `ci2_hat / ci1_hat`, in `[1/3, 2/3]`.
    pub normalized_ratio: f64,
}

impl NormalizedCi {
    /// From the largest generalized eigenvalue of a canonical pair (`λ > 1`).
    pub fn from_lambda_max(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 1.0) {
            return Err(Error::GridDomain(lambda));
        }
        let ci1 = scalar_g(lambda)?;
        let ci2 = full_ci_from_lambda(lambda);
        Ok(Self::from_parts(ci1, ci2))
    }

    fn from_parts(ci1: f64, ci2: f64) -> Self {
        let ratio = ci2 / ci1;
        NormalizedCi {
            ci1,
            ci2,
            ci1_hat: ci1,
            ci2_hat: ci2 / 3.0,
            ratio,
            normalized_ratio: ratio / 3.0,
        }
    }
}

/// `ln((λ + 1)/(2√λ))`, evaluated without cancellation near `λ = 1`.
pub fn full_ci_from_lambda(lambda: f64) -> f64 {
    let r = sqrt(lambda);
    ln_1p((r - 1.0) * (r - 1.0) / (2.0 * r))
}

pub fn normalized_ci(cp: &CanonicalPair) -> NormalizedCi {
    NormalizedCi::from_parts(cp.ci_lt(), cp.ci_full())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub w1: f64,
    pub w2: f64,
    pub ci1: f64,
    pub ci2: f64,
    pub ratio: f64,
    pub lambda_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceRow {
    Point(SurfacePoint),
    /// Grid point outside the canonical domain.
    Skipped { w1: f64, w2: f64, reason: &'static str },
}

/// `ci2/ci1` over a `(w1, w2)` grid, `w1` varying slowest.
pub fn ratio_surface(w1_grid: &[f64], w2_grid: &[f64]) -> Vec<SurfaceRow> {
    let mut rows = Vec::with_capacity(w1_grid.len() * w2_grid.len());
    for &w1 in w1_grid {
        for &w2 in w2_grid {
            let row = match CanonicalPair::new(w1, w2) {
                Ok(cp) => {
                    let nc = normalized_ci(&cp);
                    SurfaceRow::Point(SurfacePoint {
                        w1,
                        w2,
                        ci1: nc.ci1,
                        ci2: nc.ci2,
                        ratio: nc.ratio,
                        lambda_max: cp.lambda_max(),
                    })
                }
                Err(_) => SurfaceRow::Skipped {
                    w1,
                    w2,
                    reason: "outside |w1| < 1, 0 < |w2| < 1",
                },
            };
            rows.push(row);
        }
    }
    rows
}

/// `steps` cell midpoints of `[lo, hi]`; with an even count over a range
/// symmetric about 0 the grid never hits 0.
pub fn midpoint_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|k| lo + (hi - lo) * (k as f64 + 0.5) / steps as f64)
        .collect()
}

/// `steps` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let (a, b) = (ln(lo), ln(hi));
    (0..steps)
        .map(|k| {
            let t = if steps > 1 { k as f64 / (steps - 1) as f64 } else { 1.0 };
            crate::math::exp(a + (b - a) * t)
        })
        .collect()
}

/// `G₂(x) = ln((x + 1)/(2√x))`, the full-observation exponent at `λ = x`.
pub fn full_exponent(x: f64) -> f64 {
    full_ci_from_lambda(x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GInequalityReport {
    pub points: usize,
    pub violations: usize,
    /// Smallest `2 g(x) − G₂(x)` on the grid and where it occurs.
    pub min_gap: f64,
    pub min_gap_at: f64,
}

/// Checks `2 g(x) ≥ ln((x + 1)/(2√x))` (so `CI₂ ≤ 2 CI₁`) on every grid point.
pub fn g_inequality_check(x_grid: &[f64]) -> Result<GInequalityReport> {
    let mut report = GInequalityReport {
        points: x_grid.len(),
        violations: 0,
        min_gap: f64::INFINITY,
        min_gap_at: f64::NAN,
    };
    for &x in x_grid {
        if !(x.is_finite() && x > 1.0) {
            return Err(Error::GridDomain(x));
        }
        let gap = 2.0 * scalar_g(x)? - full_exponent(x);
        if gap < -1e-12 {
            report.violations += 1;
        }
        if gap < report.min_gap {
            report.min_gap = gap;
            report.min_gap_at = x;
        }
    }
    Ok(report)
}
