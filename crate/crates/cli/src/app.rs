//! Subcommands of the `graftci` binary.
//!
//! Human-readable reports go to standard output. `--out` writes the
//! machine-readable form (JSON for reports, CSV for tables); tables without
//! `--out` are written to standard output and their summary to standard error.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use graftci::compare::{midpoint_grid, normalized_ci, ratio_surface, SurfaceRow};
use graftci::info::{chernoff, kl};
use graftci::lt::{optimal_alpha_canonical, optimize_alpha_numeric};
use graftci::reduction::reduce_pair;
use graftci::{GaussianTree, GraftedPair};
use serde::Serialize;
use thiserror::Error;

use crate::format::{parse_tree_file, serialize_with_labels, ParseError, TreeFile};
use crate::numfmt::g12;
use crate::simulate::{simulate_exponent, t_grid, Mode, SimError};

#[derive(Debug, Error)]
pub enum AppError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error(transparent)]
    Model(#[from] graftci::Error),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error("{0}")]
    Invalid(String),
}

impl AppError {
    /// 1 for an invalid model, pair or argument value; 2 for I/O and syntax errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Read { .. } | AppError::Write { .. } => 2,
            AppError::Parse { source, .. } if source.is_syntax() => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, AppError>;

#[derive(Debug, Parser)]
#[command(name = "graftci", version, about = "Chernoff information between grafted Gaussian trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Chernoff information, Chernoff point and divergences of two trees.
    Ci(PairArgs),
    /// Reduce a grafted pair to its 3-node form and report closed-form exponents.
    Reduce(PairArgs),
    /// Move one subtree: cut edge I–J and attach J to K with the same weight.
    Graft(GraftArgs),
    /// Best single linear observation αᵀx.
    Lt(PairArgs),
    /// Monte Carlo error probabilities and fitted error exponent.
    ///
    /// CSV columns: T, errors (over both hypotheses), trials (2 × per-hypothesis
    /// trials), pe, minus_ln_pe.
    Simulate(SimulateArgs),
    /// CI₂/CI₁ over a grid of 3-node pairs.
    ///
    /// CSV columns: w1, w2, ci1, ci2, ratio, lambda_max, status.
    Surface(SurfaceArgs),
}

#[derive(Debug, Args)]
pub struct PairArgs {
    pub tree1: PathBuf,
    pub tree2: PathBuf,
    /// Write the report as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GraftArgs {
    pub tree: PathBuf,
    /// Edge to cut, as two node labels; the second names the moved subtree.
    #[arg(long, num_args = 2, value_names = ["I", "J"])]
    pub cut: Vec<String>,
    /// Node the subtree is reattached to.
    #[arg(long, value_name = "K")]
    pub attach: String,
    /// Grafted tree file.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the input tree in canonical form.
    #[arg(long)]
    pub out_original: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimMode {
    Full,
    Lt,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub tree1: PathBuf,
    pub tree2: PathBuf,
    #[arg(long, value_enum, default_value = "full")]
    pub mode: SimMode,
    /// Sample paths per hypothesis at each T.
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 20)]
    pub tmin: u64,
    #[arg(long, default_value_t = 200)]
    pub tmax: u64,
    #[arg(long, default_value_t = 20)]
    pub tstep: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// CSV output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    #[arg(long, default_value_t = 50)]
    pub w1_steps: usize,
    #[arg(long, default_value_t = 50)]
    pub w2_steps: usize,
    /// Lower end of both weight ranges; grid points are cell midpoints.
    #[arg(long, default_value_t = -0.9, allow_negative_numbers = true)]
    pub min: f64,
    #[arg(long, default_value_t = 0.9, allow_negative_numbers = true)]
    pub max: f64,
    /// CSV output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let mut report = String::new();
    let table = match cli.command {
        Command::Ci(a) => {
            cmd_ci(&a, &mut report)?;
            None
        }
        Command::Reduce(a) => {
            cmd_reduce(&a, &mut report)?;
            None
        }
        Command::Graft(a) => {
            cmd_graft(&a, &mut report)?;
            None
        }
        Command::Lt(a) => {
            cmd_lt(&a, &mut report)?;
            None
        }
        Command::Simulate(a) => Some((cmd_simulate(&a, &mut report)?, a.out)),
        Command::Surface(a) => Some((cmd_surface(&a, &mut report)?, a.out)),
    };
    let console = |w: &mut dyn Write, s: &str| w.write_all(s.as_bytes()).map_err(console_error);
    match table {
        Some((csv, None)) => {
            console(stdout, &csv)?;
            console(stderr, &report)
        }
        Some((csv, Some(path))) => {
            write_file(&path, &csv)?;
            console(stdout, &report)
        }
        None => console(stdout, &report),
    }
}

fn console_error(source: io::Error) -> AppError {
    AppError::Write {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

fn read_tree(path: &Path) -> Result<TreeFile> {
    let text = std::fs::read_to_string(path).map_err(|source| AppError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_tree_file(&text).map_err(|source| AppError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| AppError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    write_file(path, &s)
}

/// Reads both files and expresses the second tree in the first file's node ids.
fn read_pair(a: &PairArgs) -> Result<(TreeFile, GaussianTree)> {
    let f1 = read_tree(&a.tree1)?;
    let f2 = read_tree(&a.tree2)?;
    if f1.tree.n() != f2.tree.n() {
        return Err(graftci::Error::DimensionMismatch(f1.tree.n(), f2.tree.n()).into());
    }
    let mut edges = Vec::with_capacity(f2.tree.edges().len());
    for e in f2.tree.edges() {
        let map = |v: usize| {
            f1.id_of(f2.label(v))
                .ok_or_else(|| AppError::Invalid(format!("node `{}` does not appear in {}", f2.label(v), a.tree1.display())))
        };
        edges.push((map(e.a)?, map(e.b)?, e.weight));
    }
    let t2 = GaussianTree::new(f1.tree.n(), &edges)?;
    Ok((f1, t2))
}

fn line(out: &mut String, key: &str, value: f64) {
    let _ = writeln!(out, "{key}: {}", g12(value));
}

#[derive(Debug, Serialize)]
struct CiReport {
    ci: f64,
    lambda_star: f64,
    /// `D(Σ_λ*‖Σ₁)` and `D(Σ_λ*‖Σ₂)`
    kl_lambda_to_1: f64,
    kl_lambda_to_2: f64,
    kl_1_to_2: f64,
    kl_2_to_1: f64,
    det1: f64,
    det2: f64,
}

fn cmd_ci(a: &PairArgs, out: &mut String) -> Result<()> {
    let (f1, t2) = read_pair(a)?;
    let (s1, s2) = (f1.tree.covariance(), t2.covariance());
    let r = chernoff(&s1, &s2)?;
    let rep = CiReport {
        ci: r.value,
        lambda_star: r.lambda_star,
        kl_lambda_to_1: r.kl_to_1,
        kl_lambda_to_2: r.kl_to_2,
        kl_1_to_2: kl(&s1, &s2)?,
        kl_2_to_1: kl(&s2, &s1)?,
        det1: f1.tree.determinant(),
        det2: t2.determinant(),
    };
    line(out, "chernoff_information", rep.ci);
    line(out, "lambda_star", rep.lambda_star);
    line(out, "kl_lambda_to_1", rep.kl_lambda_to_1);
    line(out, "kl_lambda_to_2", rep.kl_lambda_to_2);
    line(out, "kl_1_to_2", rep.kl_1_to_2);
    line(out, "kl_2_to_1", rep.kl_2_to_1);
    line(out, "det1", rep.det1);
    line(out, "det2", rep.det2);
    if let Some(path) = &a.out {
        write_json(path, &rep)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ReduceReport {
    cut: [String; 2],
    attach: String,
    w1: f64,
    w2: f64,
    beta: f64,
    lambda_max: f64,
    ci1: f64,
    ci2: f64,
    ratio: f64,
    normalized_ratio: f64,
}

fn detect(f1: &TreeFile, t2: &GaussianTree) -> Result<GraftedPair> {
    Ok(GraftedPair::detect(&f1.tree, t2)?)
}

fn cmd_reduce(a: &PairArgs, out: &mut String) -> Result<()> {
    let (f1, t2) = read_pair(a)?;
    let pair = detect(&f1, &t2)?;
    let cp = reduce_pair(&pair)?;
    let nc = normalized_ci(&cp);
    let (i, j) = pair.cut_edge();
    let rep = ReduceReport {
        cut: [f1.label(i).to_string(), f1.label(j).to_string()],
        attach: f1.label(pair.attach_node()).to_string(),
        w1: cp.w1(),
        w2: cp.w2(),
        beta: cp.beta(),
        lambda_max: cp.lambda_max(),
        ci1: nc.ci1,
        ci2: nc.ci2,
        ratio: nc.ratio,
        normalized_ratio: nc.normalized_ratio,
    };
    let _ = writeln!(
        out,
        "graft: cut {}-{}, attach {} to {}",
        rep.cut[0], rep.cut[1], rep.cut[1], rep.attach
    );
    line(out, "w1", rep.w1);
    line(out, "w2", rep.w2);
    line(out, "beta", rep.beta);
    line(out, "lambda_max", rep.lambda_max);
    line(out, "ci1", rep.ci1);
    line(out, "ci2", rep.ci2);
    line(out, "ratio", rep.ratio);
    line(out, "normalized_ratio", rep.normalized_ratio);
    if let Some(path) = &a.out {
        write_json(path, &rep)?;
    }
    Ok(())
}

fn cmd_graft(a: &GraftArgs, out: &mut String) -> Result<()> {
    let f = read_tree(&a.tree)?;
    let id = |label: &str| {
        f.id_of(label)
            .ok_or_else(|| AppError::Invalid(format!("no node `{label}` in {}", a.tree.display())))
    };
    let (i, j, k) = (id(&a.cut[0])?, id(&a.cut[1])?, id(&a.attach)?);
    let pair = f.tree.graft((i, j), k)?;
    write_file(&a.out, &serialize_with_labels(pair.tree2(), &f.labels))?;
    if let Some(path) = &a.out_original {
        write_file(path, &serialize_with_labels(pair.tree1(), &f.labels))?;
    }
    let _ = writeln!(out, "wrote {}", a.out.display());
    line(out, "w1", pair.w1());
    line(out, "w2", pair.w2());
    if pair.is_trivial() {
        let _ = writeln!(out, "note: attaching to the old parent leaves the tree unchanged");
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct LtReport {
    informative: bool,
    /// Scaled so the largest-magnitude coordinate is 1; absent when no
    /// projection separates the models.
    alpha: Option<Vec<f64>>,
    labels: Vec<String>,
    ratio: f64,
    ci1: f64,
    closed_form: Option<ClosedFormLt>,
}

#[derive(Debug, Serialize)]
struct ClosedFormLt {
    /// Skeleton nodes `(a, b, c)`: old parent, new parent, moved node.
    nodes: [String; 3],
    alpha: [f64; 3],
    lambda_max: f64,
    ci1: f64,
    abs_diff: f64,
}

fn cmd_lt(a: &PairArgs, out: &mut String) -> Result<()> {
    let (f1, t2) = read_pair(a)?;
    let sol = optimize_alpha_numeric(&f1.tree.covariance(), &t2.covariance())?;
    let closed_form = match GraftedPair::detect(&f1.tree, &t2) {
        Ok(pair) if !pair.is_trivial() => {
            let cp = reduce_pair(&pair)?;
            let cf = optimal_alpha_canonical(&cp);
            let (i, j) = pair.cut_edge();
            Some(ClosedFormLt {
                nodes: [i, pair.attach_node(), j].map(|v| f1.label(v).to_string()),
                alpha: [cf.alpha[0], cf.alpha[1], cf.alpha[2]],
                lambda_max: cp.lambda_max(),
                ci1: cf.ci,
                abs_diff: (cf.ci - sol.ci).abs(),
            })
        }
        _ => None,
    };
    let informative = sol.is_informative();
    let rep = LtReport {
        informative,
        alpha: informative.then(|| sol.normalized_alpha()),
        labels: f1.labels.clone(),
        ratio: sol.ratio,
        ci1: sol.ci,
        closed_form,
    };
    match &rep.alpha {
        Some(alpha) => {
            let coords: Vec<String> = rep.labels.iter().zip(alpha).map(|(l, x)| format!("{l}={}", g12(*x))).collect();
            let _ = writeln!(out, "alpha: {}", coords.join(" "));
        }
        None => {
            let _ = writeln!(out, "alpha: undefined (every projection has the same variance under both models)");
        }
    }
    line(out, "ratio", rep.ratio);
    line(out, "ci1", rep.ci1);
    if let Some(cf) = &rep.closed_form {
        let _ = writeln!(
            out,
            "closed_form_alpha: {}={} {}={} {}={}",
            cf.nodes[0],
            g12(cf.alpha[0]),
            cf.nodes[1],
            g12(cf.alpha[1]),
            cf.nodes[2],
            g12(cf.alpha[2])
        );
        line(out, "closed_form_lambda_max", cf.lambda_max);
        line(out, "closed_form_ci1", cf.ci1);
        line(out, "closed_form_abs_diff", cf.abs_diff);
    }
    if let Some(path) = &a.out {
        write_json(path, &rep)?;
    }
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs, out: &mut String) -> Result<String> {
    let pair = PairArgs {
        tree1: a.tree1.clone(),
        tree2: a.tree2.clone(),
        out: None,
    };
    let (f1, t2) = read_pair(&pair)?;
    let (s1, s2) = (f1.tree.covariance(), t2.covariance());
    let (mode, reference) = match a.mode {
        SimMode::Full => (Mode::Full, chernoff(&s1, &s2)?.value),
        SimMode::Lt => {
            let sol = optimize_alpha_numeric(&s1, &s2)?;
            (Mode::Lt(sol.alpha), sol.ci)
        }
    };
    let grid = t_grid(a.tmin, a.tmax, a.tstep);
    let est = simulate_exponent(&s1, &s2, &mode, &grid, a.trials, a.seed, reference)?;

    let _ = writeln!(out, "mode: {}", est.mode);
    let _ = writeln!(out, "trials_per_hypothesis: {}", est.trials);
    let _ = writeln!(out, "seed: {}", est.seed);
    line(out, "slope", est.slope);
    line(out, "slope_std_err", est.slope_std_err);
    let _ = writeln!(out, "fit_points: {}", est.fit_points);
    line(out, "ci_reference", est.ci_reference);
    if est.ci_reference > 0.0 {
        line(out, "relative_error", est.relative_error());
    }
    if est.lower_bound_only {
        let _ = writeln!(out, "note: no errors at the largest T; the slope is a lower bound");
    }

    Ok(est.to_csv())
}

fn cmd_surface(a: &SurfaceArgs, out: &mut String) -> Result<String> {
    if !(a.min > -1.0 && a.max < 1.0 && a.min < a.max) {
        return Err(AppError::Invalid(format!(
            "weight range must satisfy -1 < min < max < 1, got [{}, {}]",
            a.min, a.max
        )));
    }
    if a.w1_steps == 0 || a.w2_steps == 0 {
        return Err(AppError::Invalid("grid steps must be positive".into()));
    }
    let rows = ratio_surface(
        &midpoint_grid(a.min, a.max, a.w1_steps),
        &midpoint_grid(a.min, a.max, a.w2_steps),
    );
    let mut csv = String::from("w1,w2,ci1,ci2,ratio,lambda_max,status\n");
    let (mut lo, mut hi, mut skipped) = (f64::INFINITY, f64::NEG_INFINITY, 0usize);
    for row in &rows {
        match row {
            SurfaceRow::Point(p) => {
                lo = lo.min(p.ratio);
                hi = hi.max(p.ratio);
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},ok",
                    g12(p.w1),
                    g12(p.w2),
                    g12(p.ci1),
                    g12(p.ci2),
                    g12(p.ratio),
                    g12(p.lambda_max)
                );
            }
            SurfaceRow::Skipped { w1, w2, reason } => {
                skipped += 1;
                let _ = writeln!(csv, "{},{},,,,,skipped: {reason}", g12(*w1), g12(*w2));
            }
        }
    }
    let _ = writeln!(out, "points: {}", rows.len() - skipped);
    let _ = writeln!(out, "skipped: {skipped}");
    if skipped < rows.len() {
        line(out, "min_ratio", lo);
        line(out, "max_ratio", hi);
    }
    Ok(csv)
}
