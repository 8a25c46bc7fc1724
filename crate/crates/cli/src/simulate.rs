//! Monte Carlo estimates of binary-test error exponents.
//!
//! For each sample length `T` the simulator draws `trials` independent
//! length-`T` sample paths under each hypothesis, applies the maximum
//! likelihood rule with equal priors, and records the error frequency
//! `P_e = (errors under H1 + errors under H2) / (2 · trials)`. The exponent is
//! the least-squares slope of `−ln P_e` against `T`.
//!
//! Every sample path has its own ChaCha8 stream seeded from
//! `(seed, T, hypothesis, trial)`, so results do not depend on thread count
//! or scheduling.

use std::fmt::Write as _;

use graftci::linalg::Cholesky;
use graftci::Matrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::numfmt::g12;

/// Smallest trial budget accepted for a reported estimate.
pub const MIN_TRIALS: u64 = 10_000;

/// Points with fewer errors than this are left out of the slope fit.
pub const MIN_FIT_ERRORS: u64 = 10;

pub const CSV_HEADER: &str = "T,errors,trials,pe,minus_ln_pe";

#[derive(Debug, Error)]
pub enum SimError {
    #[error("at least {MIN_TRIALS} trials are required, got {0}")]
    TooFewTrials(u64),
    #[error("sample lengths must be positive and strictly increasing")]
    BadGrid,
    #[error("observation vector has length {got}, models have {expected} nodes")]
    AlphaLength { expected: usize, got: usize },
    #[error("observation vector gives zero variance")]
    DegenerateAlpha,
    #[error(transparent)]
    Model(#[from] graftci::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    /// Observe the whole vector.
    Full,
    /// Observe only `αᵀx`.
    Lt(Vec<f64>),
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Lt(_) => "lt",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentEstimate {
    pub mode: &'static str,
    pub sample_lengths: Vec<u64>,
    /// Total errors over both hypotheses at each `T`.
    pub errors: Vec<u64>,
    pub error_rates: Vec<f64>,
    /// Fitted exponent, clamped at 0.
    pub slope: f64,
    /// Ordinary least-squares standard error of the slope; NaN with fewer
    /// than three fitted points.
    pub slope_std_err: f64,
    pub intercept: f64,
    /// Number of `T` values used in the fit.
    pub fit_points: usize,
    pub ci_reference: f64,
    /// Sample paths per hypothesis.
    pub trials: u64,
    pub seed: u64,
    /// No errors at the largest `T`: the trial budget cannot resolve the
    /// tail, so the slope only bounds the exponent from below.
    pub lower_bound_only: bool,
}

impl ExponentEstimate {
    pub fn relative_error(&self) -> f64 {
        (self.slope - self.ci_reference).abs() / self.ci_reference
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for k in 0..self.sample_lengths.len() {
            let pe = self.error_rates[k];
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                self.sample_lengths[k],
                self.errors[k],
                2 * self.trials,
                g12(pe),
                g12(-pe.ln())
            );
        }
        out
    }
}

/// Per-sample log-likelihood ratio `ln p₁(x) − ln p₂(x)` for one observation model.
enum Detector {
    Full {
        chol: [Cholesky; 2],
        /// `Σ₁⁻¹ − Σ₂⁻¹`
        prec_diff: Matrix,
        offset: f64,
    },
    Lt {
        chol: [Cholesky; 2],
        alpha: Vec<f64>,
        inv_var_diff: f64,
        offset: f64,
    },
}

impl Detector {
    fn new(sigma1: &Matrix, sigma2: &Matrix, mode: &Mode) -> Result<Self, SimError> {
        let c1 = Cholesky::new(sigma1)?;
        let c2 = Cholesky::new(sigma2)?;
        if sigma1.rows() != sigma2.rows() {
            return Err(graftci::Error::DimensionMismatch(sigma1.rows(), sigma2.rows()).into());
        }
        match mode {
            Mode::Full => {
                let prec_diff = c1.inverse().sub(&c2.inverse())?;
                let offset = 0.5 * (c2.log_det() - c1.log_det());
                Ok(Detector::Full {
                    chol: [c1, c2],
                    prec_diff,
                    offset,
                })
            }
            Mode::Lt(alpha) => {
                if alpha.len() != sigma1.rows() {
                    return Err(SimError::AlphaLength {
                        expected: sigma1.rows(),
                        got: alpha.len(),
                    });
                }
                let v1 = sigma1.quad_form(alpha)?;
                let v2 = sigma2.quad_form(alpha)?;
                if !(v1 > 0.0 && v2 > 0.0) {
                    return Err(SimError::DegenerateAlpha);
                }
                Ok(Detector::Lt {
                    chol: [c1, c2],
                    alpha: alpha.clone(),
                    inv_var_diff: 1.0 / v1 - 1.0 / v2,
                    offset: 0.5 * (v2.ln() - v1.ln()),
                })
            }
        }
    }

    fn dim(&self) -> usize {
        match self {
            Detector::Full { chol, .. } | Detector::Lt { chol, .. } => chol[0].dim(),
        }
    }

    /// Draws a length-`t` path under `hypothesis` (0 or 1) and returns the
    /// summed log-likelihood ratio.
    fn path_llr(&self, hypothesis: usize, t: u64, rng: &mut ChaCha8Rng, z: &mut [f64], x: &mut [f64]) -> f64 {
        match self {
            Detector::Full {
                chol,
                prec_diff,
                offset,
            } => sum_over_path(chol[hypothesis].lower(), t, rng, z, x, |x| {
                offset - 0.5 * quad(prec_diff, x)
            }),
            Detector::Lt {
                chol,
                alpha,
                inv_var_diff,
                offset,
            } => sum_over_path(chol[hypothesis].lower(), t, rng, z, x, |x| {
                let y: f64 = alpha.iter().zip(x).map(|(a, v)| a * v).sum();
                offset - 0.5 * y * y * inv_var_diff
            }),
        }
    }

    /// Errors over `trials` paths drawn under `hypothesis`.
    fn count_errors(&self, hypothesis: usize, t: u64, trials: u64, seed: u64) -> u64 {
        let n = self.dim();
        (0..trials)
            .into_par_iter()
            .map_init(
                || (vec![0.0; n], vec![0.0; n]),
                |(z, x), trial| {
                    let mut rng = ChaCha8Rng::seed_from_u64(path_seed(seed, t, hypothesis as u64, trial));
                    let llr = self.path_llr(hypothesis, t, &mut rng, z, x);
                    // ties go to the second hypothesis
                    let decided_first = llr > 0.0;
                    u64::from(decided_first != (hypothesis == 0))
                },
            )
            .sum()
    }
}

/// `Σ f(L zₜ)` over `t` standard normal draws `zₜ`.
fn sum_over_path(
    l: &Matrix,
    t: u64,
    rng: &mut ChaCha8Rng,
    z: &mut [f64],
    x: &mut [f64],
    f: impl Fn(&[f64]) -> f64,
) -> f64 {
    let n = z.len();
    let mut total = 0.0;
    for _ in 0..t {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(rng);
        }
        for i in 0..n {
            x[i] = (0..=i).map(|j| l[(i, j)] * z[j]).sum();
        }
        total += f(x);
    }
    total
}

fn quad(m: &Matrix, x: &[f64]) -> f64 {
    let n = x.len();
    let mut q = 0.0;
    for i in 0..n {
        let row: f64 = (0..n).map(|j| m[(i, j)] * x[j]).sum();
        q += x[i] * row;
    }
    q
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn path_seed(seed: u64, t: u64, hypothesis: u64, trial: u64) -> u64 {
    [t, hypothesis, trial].iter().fold(splitmix64(seed), |h, v| splitmix64(h ^ v))
}

/// Least-squares fit of `y` on `x`: `(slope, intercept, slope standard error)`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let se = if x.len() > 2 {
        let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    (slope, intercept, se)
}

/// Inclusive arithmetic grid `start, start + step, …, ≤ end`.
pub fn t_grid(start: u64, end: u64, step: u64) -> Vec<u64> {
    if step == 0 {
        return Vec::new();
    }
    (start..=end).step_by(step as usize).collect()
}

/// Simulates the ML test between `N(0, Σ₁)` and `N(0, Σ₂)` and fits the
/// error exponent. `ci_reference` is stored alongside for comparison.
pub fn simulate_exponent(
    sigma1: &Matrix,
    sigma2: &Matrix,
    mode: &Mode,
    t_values: &[u64],
    trials: u64,
    seed: u64,
    ci_reference: f64,
) -> Result<ExponentEstimate, SimError> {
    if trials < MIN_TRIALS {
        return Err(SimError::TooFewTrials(trials));
    }
    if t_values.is_empty() || t_values[0] == 0 || t_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SimError::BadGrid);
    }
    let detector = Detector::new(sigma1, sigma2, mode)?;

    let mut errors = Vec::with_capacity(t_values.len());
    let mut error_rates = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let e = detector.count_errors(0, t, trials, seed) + detector.count_errors(1, t, trials, seed);
        errors.push(e);
        error_rates.push(e as f64 / (2 * trials) as f64);
    }

    let (xs, ys): (Vec<f64>, Vec<f64>) = t_values
        .iter()
        .zip(&errors)
        .zip(&error_rates)
        .filter(|((_, &e), _)| e >= MIN_FIT_ERRORS)
        .map(|((&t, _), &pe)| (t as f64, -pe.ln()))
        .unzip();
    let (slope, intercept, slope_std_err) = if xs.len() >= 2 {
        ols(&xs, &ys)
    } else {
        (0.0, f64::NAN, f64::NAN)
    };

    Ok(ExponentEstimate {
        mode: mode.name(),
        sample_lengths: t_values.to_vec(),
        lower_bound_only: errors.last() == Some(&0),
        errors,
        error_rates,
        slope: slope.max(0.0),
        slope_std_err,
        intercept,
        fit_points: xs.len(),
        ci_reference,
        trials,
        seed,
    })
}
