//! Acceptance checks, one PASS/FAIL line each. Exits non-zero on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use graftci::compare::{g_inequality_check, midpoint_grid, normalized_ci, ratio_surface, SurfaceRow};
use graftci::info::{chernoff, discrete_chernoff, merge_states, scalar_g, DiscretePmf};
use graftci::linalg::generalized_eigenvalues;
use graftci::lt::{optimal_alpha_canonical, optimize_alpha_numeric, variance_ratio, verify_zero_coordinate};
use graftci::reduction::{canonical_eigs, reduce_pair, CanonicalPair, TreePair};
use graftci::tree::{random_graft, random_tree, GaussianTree, GraftedPair};
use graftci::Matrix;
use graftci_cli::simulate::{simulate_exponent, t_grid, Mode};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn lu_det(m: &Matrix) -> f64 {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)]).lu().determinant()
}

/// Even-count midpoint grid over (−0.95, 0.95); never hits 0.
fn weight_grid() -> Vec<f64> {
    midpoint_grid(-0.95, 0.95, 20)
}

fn grafted_pairs(seed: u64, count: usize, n_min: usize, n_max: usize) -> Vec<GraftedPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = rng.random_range(n_min..=n_max);
        let t = random_tree(n, &mut rng).expect("n ≥ 2");
        if let Some(g) = random_graft(&t, &mut rng) {
            out.push(g);
        }
    }
    out
}

fn closed_forms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut worst_inv, mut worst_det) = (0.0f64, 0.0f64);
    for _ in 0..500 {
        let n = rng.random_range(2..=12);
        let t = random_tree(n, &mut rng).expect("n ≥ 2");
        let cov = t.covariance();
        let prod = t.precision().matmul(&cov).expect("square");
        worst_inv = worst_inv.max(prod.max_abs_diff(&Matrix::identity(n)));
        let lu = lu_det(&cov);
        worst_det = worst_det.max((t.determinant() - lu).abs() / lu.abs());
    }
    outcome(
        worst_inv <= 1e-10 && worst_det <= 1e-10,
        format!("max |P·Σ − I| = {worst_inv:.2e}, max rel det error = {worst_det:.2e}"),
    )
}

fn closed_form_ci2() -> Outcome {
    let (mut worst_ci, mut worst_lambda) = (0.0f64, 0.0f64);
    for &w1 in &weight_grid() {
        for &w2 in &weight_grid() {
            let cp = CanonicalPair::new(w1, w2).expect("grid inside domain");
            let (s1, s2) = cp.covariances();
            let r = chernoff(&s1, &s2).expect("positive definite");
            let lam = cp.lambda_max();
            let closed = ((lam + 1.0) / (2.0 * lam.sqrt())).ln();
            worst_ci = worst_ci.max((r.value - closed).abs());
            worst_lambda = worst_lambda.max((r.lambda_star - 0.5).abs());
        }
    }
    outcome(
        worst_ci <= 1e-9 && worst_lambda <= 1e-6,
        format!("max |CI − closed form| = {worst_ci:.2e}, max |λ* − ½| = {worst_lambda:.2e}"),
    )
}

fn lambda_max_spectrum() -> Outcome {
    let mut worst = 0.0f64;
    for &w1 in &weight_grid() {
        for &w2 in &weight_grid() {
            let cp = CanonicalPair::new(w1, w2).expect("grid inside domain");
            let (s1, s2) = cp.covariances();
            let b = cp.beta().sqrt();
            let lam = (b + w2.abs()) / (b - w2.abs());
            let expected = [1.0 / lam, 1.0, lam];
            let generic = generalized_eigenvalues(&s1, &s2).expect("positive definite");
            let special = canonical_eigs(&s1, &s2).expect("canonical pair");
            for k in 0..3 {
                worst = worst
                    .max((generic[k] - expected[k]).abs())
                    .max((special[k] - expected[k]).abs());
            }
        }
    }
    outcome(worst <= 1e-9, format!("max eigenvalue error = {worst:.2e}"))
}

fn lt_closed_form() -> Outcome {
    let (mut worst_ci, mut worst_grad) = (0.0f64, 0.0f64);
    for &w1 in &weight_grid() {
        for &w2 in &weight_grid() {
            let cp = CanonicalPair::new(w1, w2).expect("grid inside domain");
            let (s1, s2) = cp.covariances();
            let numeric = optimize_alpha_numeric(&s1, &s2).expect("positive definite");
            let closed = scalar_g(cp.lambda_max()).expect("λ > 1");
            worst_ci = worst_ci.max((numeric.ci - closed).abs());

            let alpha = optimal_alpha_canonical(&cp).alpha;
            let f = |a: &[f64]| {
                let r = variance_ratio(&s1, &s2, a).expect("length 3");
                scalar_g(r.max(1.0 / r)).expect("finite ratio")
            };
            let h = 1e-6;
            let mut norm2 = 0.0;
            for k in 0..3 {
                let (mut up, mut dn) = (alpha.clone(), alpha.clone());
                up[k] += h;
                dn[k] -= h;
                let d = (f(&up) - f(&dn)) / (2.0 * h);
                norm2 += d * d;
            }
            worst_grad = worst_grad.max(norm2.sqrt());
        }
    }
    outcome(
        worst_ci <= 1e-6 && worst_grad <= 1e-4,
        format!("max |numeric − g(λ_max)| = {worst_ci:.2e}, max gradient norm = {worst_grad:.2e}"),
    )
}

fn reduction_soundness() -> Outcome {
    let mut worst = 0.0f64;
    for g in grafted_pairs(SEED + 4, 50, 3, 10) {
        let full = chernoff(&g.tree1().covariance(), &g.tree2().covariance()).expect("positive definite");
        let cp = reduce_pair(&g).expect("non-trivial graft");
        let (r1, r2) = cp.covariances();
        let reduced = chernoff(&r1, &r2).expect("positive definite");
        worst = worst.max((full.value - reduced.value).abs());
    }
    outcome(worst <= 1e-8, format!("max |CI(full) − CI(reduced)| = {worst:.2e}"))
}

fn ratio_bounds() -> Outcome {
    let grid = midpoint_grid(-0.9, 0.9, 50);
    let (mut lo, mut hi, mut nlo, mut nhi, mut points) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN, 0);
    for row in ratio_surface(&grid, &grid) {
        if let SurfaceRow::Point(p) = row {
            let nc = normalized_ci(&CanonicalPair::new(p.w1, p.w2).expect("inside domain"));
            lo = lo.min(p.ratio);
            hi = hi.max(p.ratio);
            nlo = nlo.min(nc.normalized_ratio);
            nhi = nhi.max(nc.normalized_ratio);
            points += 1;
        }
    }
    let mut near_zero = f64::MAX;
    for &w1 in &grid {
        for w2 in [-0.01, 0.01] {
            let nc = normalized_ci(&CanonicalPair::new(w1, w2).expect("inside domain"));
            near_zero = near_zero.min(nc.ratio);
        }
    }
    let slack = 1e-9;
    let pass = points == 2500
        && lo >= 1.0 - slack
        && hi <= 2.0 + slack
        && nlo >= 1.0 / 3.0 - slack
        && nhi <= 2.0 / 3.0 + slack
        && near_zero >= 1.99;
    outcome(
        pass,
        format!(
            "{points} points, ratio in [{lo:.6}, {hi:.6}], normalized in [{nlo:.6}, {nhi:.6}], min ratio at |w2| = 0.01: {near_zero:.6}"
        ),
    )
}

fn g_inequality() -> Outcome {
    let n = 10_000;
    let top = 1e6f64.ln();
    let grid: Vec<f64> = (1..=n).map(|k| (top * k as f64 / n as f64).exp()).collect();
    match g_inequality_check(&grid) {
        Ok(r) => outcome(
            r.violations == 0 && r.points == n,
            format!(
                "{} points, {} violations, min gap {:.3e} at x = {:.6}",
                r.points, r.violations, r.min_gap, r.min_gap_at
            ),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn random_pmf(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

fn pmf(v: Vec<f64>) -> DiscretePmf {
    DiscretePmf::new(v).expect("normalized")
}

fn merging() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 8);
    let (mut worst_increase, mut merges) = (f64::MIN, 0);
    for _ in 0..200 {
        let n = rng.random_range(2..=8);
        let (p, q) = (pmf(random_pmf(&mut rng, n)), pmf(random_pmf(&mut rng, n)));
        let base = discrete_chernoff(&p, &q).expect("valid pmfs");
        for i in 0..n {
            for j in (i + 1)..n {
                let merged = discrete_chernoff(
                    &merge_states(&p, i, j).expect("in range"),
                    &merge_states(&q, i, j).expect("in range"),
                )
                .expect("valid pmfs");
                worst_increase = worst_increase.max(merged - base);
                merges += 1;
            }
        }
    }
    // proportional states: p_i/q_i = p_j/q_j, so merging them loses nothing
    let mut worst_equal = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(3..=8);
        let q = random_pmf(&mut rng, n);
        let mut p = random_pmf(&mut rng, n);
        let (i, j) = (0, rng.random_range(1..n));
        p[j] = p[i] * q[j] / q[i];
        let s: f64 = p.iter().sum();
        let p: Vec<f64> = p.iter().map(|x| x / s).collect();
        let (p, q) = (pmf(p), pmf(q));
        let base = discrete_chernoff(&p, &q).expect("valid pmfs");
        let merged = discrete_chernoff(
            &merge_states(&p, i, j).expect("in range"),
            &merge_states(&q, i, j).expect("in range"),
        )
        .expect("valid pmfs");
        worst_equal = worst_equal.max((merged - base).abs());
    }
    outcome(
        worst_increase <= 1e-12 && worst_equal <= 1e-10,
        format!("{merges} merges, max increase {worst_increase:.2e}, max equality gap {worst_equal:.2e}"),
    )
}

fn monte_carlo() -> Outcome {
    let cp = CanonicalPair::new(0.5, 0.6).expect("inside domain");
    let (s1, s2) = cp.covariances();
    let trials = 100_000;
    let full = simulate_exponent(&s1, &s2, &Mode::Full, &t_grid(60, 120, 5), trials, SEED, cp.ci_full());
    let lt_sol = optimal_alpha_canonical(&cp);
    let lt = simulate_exponent(&s1, &s2, &Mode::Lt(lt_sol.alpha), &t_grid(60, 200, 10), trials, SEED, lt_sol.ci);
    match (full, lt) {
        (Ok(full), Ok(lt)) => {
            let pass = full.relative_error() <= 0.15
                && lt.relative_error() <= 0.15
                && full.slope >= lt.slope
                && !full.lower_bound_only
                && !lt.lower_bound_only;
            outcome(
                pass,
                format!(
                    "full slope {:.5} ± {:.5} vs {:.5} ({:.1}%), lt slope {:.5} ± {:.5} vs {:.5} ({:.1}%)",
                    full.slope,
                    full.slope_std_err,
                    full.ci_reference,
                    100.0 * full.relative_error(),
                    lt.slope,
                    lt.slope_std_err,
                    lt.ci_reference,
                    100.0 * lt.relative_error()
                ),
            )
        }
        (Err(e), _) | (_, Err(e)) => outcome(false, e.to_string()),
    }
}

fn prune_contract_marginalize() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 10);
    let (mut worst_step, mut worst_marginal, mut steps) = (0.0f64, f64::MIN, 0);
    for g in grafted_pairs(SEED + 9, 100, 3, 10) {
        let pair = TreePair::new(g.tree1().clone(), g.tree2().clone()).expect("same size");
        let (s1, s2) = (pair.tree1().covariance(), pair.tree2().covariance());
        let base = chernoff(&s1, &s2).expect("positive definite").value;
        for v in 1..=pair.n() {
            let step = if pair.is_common_leaf(v) {
                pair.prune_common_leaf(v)
            } else if pair.is_common_degree2(v) {
                pair.contract_common_degree2(v)
            } else {
                continue;
            };
            if let Ok(r) = step {
                let ci = chernoff(&r.tree1().covariance(), &r.tree2().covariance()).expect("positive definite");
                worst_step = worst_step.max((ci.value - base).abs());
                steps += 1;
            }
        }
        // marginals on random node subsets
        let n = pair.n();
        for _ in 0..5 {
            let keep: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.6)).collect();
            if keep.is_empty() || keep.len() == n {
                continue;
            }
            let ci = chernoff(&s1.select(&keep), &s2.select(&keep)).expect("positive definite");
            worst_marginal = worst_marginal.max(ci.value - base);
        }
    }
    outcome(
        worst_step <= 1e-8 && worst_marginal <= 1e-10 && steps > 0,
        format!("{steps} steps, max step change {worst_step:.2e}, max marginal increase {worst_marginal:.2e}"),
    )
}

/// A 3-node skeleton padded with shared leaves and shared degree-2 chains,
/// then grafted by moving node 3 from node 1 to node 2.
fn padded_pair(rng: &mut impl Rng) -> GraftedPair {
    let w = |rng: &mut dyn rand::RngCore| {
        let m = rng.random_range(0.1..0.9);
        if rng.random_bool(0.5) {
            m
        } else {
            -m
        }
    };
    let mut edges = vec![(1, 2, w(rng)), (1, 3, w(rng))];
    let mut n = 3;
    for _ in 0..rng.random_range(1..=3) {
        // chain u – v – x: v has degree 2, x is a leaf
        let u = rng.random_range(1..=n);
        edges.push((u, n + 1, w(rng)));
        edges.push((n + 1, n + 2, w(rng)));
        n += 2;
    }
    for _ in 0..rng.random_range(0..=2) {
        let u = rng.random_range(1..=n);
        edges.push((u, n + 1, w(rng)));
        n += 1;
    }
    let t = GaussianTree::new(n, &edges).expect("valid tree");
    t.graft((1, 3), 2).expect("node 2 is outside node 3's subtree")
}

fn zero_coordinate() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 11);
    let (mut worst, mut checked) = (0.0f64, 0);
    for _ in 0..30 {
        let g = padded_pair(&mut rng);
        let pair = TreePair::new(g.tree1().clone(), g.tree2().clone()).expect("same size");
        for v in 1..=pair.n() {
            if let Ok(r) = verify_zero_coordinate(&pair, v) {
                worst = worst.max(r.gap().abs());
                checked += 1;
            }
        }
    }
    outcome(
        worst <= 1e-8 && checked >= 60,
        format!("{checked} shared nodes over 30 pairs, max |constrained − unconstrained| = {worst:.2e}"),
    )
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let checks: [(&str, Check, Option<Duration>); 11] = [
        ("tree closed forms, 500 trees", closed_forms, Some(Duration::from_secs(5))),
        ("closed-form CI2 and λ* = ½ on 20×20 grid", closed_form_ci2, Some(Duration::from_secs(10))),
        ("spectrum {1, λ, 1/λ} on 20×20 grid", lambda_max_spectrum, None),
        ("LT closed form and stationarity", lt_closed_form, None),
        ("reduction soundness, 50 pairs", reduction_soundness, Some(Duration::from_secs(30))),
        ("ratio bounds on 50×50 surface", ratio_bounds, None),
        ("2g(x) ≥ ln((x+1)/(2√x)) at 10⁴ points", g_inequality, None),
        ("state merging, 200 PMF pairs", merging, None),
        ("Monte Carlo exponents, 10⁵ trials", monte_carlo, Some(Duration::from_secs(180))),
        ("prune, contract, marginalize, 100 pairs", prune_contract_marginalize, None),
        ("zero coordinate at shared nodes, 30 pairs", zero_coordinate, None),
    ];
    let mut failures = 0;
    for (k, (name, check, limit)) in checks.iter().enumerate() {
        let start = Instant::now();
        let mut result = check();
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            if elapsed > *limit {
                result.pass = false;
                result.detail.push_str(&format!("; exceeded {limit:?}"));
            }
        }
        if !result.pass {
            failures += 1;
        }
        println!(
            "{} {:>2} {name}: {} [{:.2} s]",
            if result.pass { "PASS" } else { "FAIL" },
            k + 1,
            result.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", checks.len() - failures, checks.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
