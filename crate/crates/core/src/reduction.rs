//! Shrinking a pair of trees without changing their Chernoff information.
//!
//! A leaf attached to the same neighbour with the same weight in both trees
//! can be dropped, and a node of degree 2 with the same two neighbours and
//! weights in both trees can be replaced by a single edge carrying the product
//! of its weights. Applied to a grafted pair, these steps always end at the
//! 3-node skeleton
//!
//! ```text
//!   tree1:  b ─w1─ a ─w2─ c        tree2:  a ─w1─ b ─w2─ c
//! ```
//!
//! where `a` is the old neighbour of the moved node `c`, `b` the new one, `w2`
//! the moved edge's weight and `w1` the path weight from `a` to `b`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::info::scalar_g;
use crate::linalg::{Cholesky, Matrix};
use crate::math::{abs, ln_1p, sqrt};
use crate::tree::{GaussianTree, GraftedPair};

/// Two trees on the same node set, with the original id of every node.
#[derive(Debug, Clone, PartialEq)]
pub struct TreePair {
    tree1: GaussianTree,
    tree2: GaussianTree,
    labels: Vec<usize>,
}

impl TreePair {
    pub fn new(tree1: GaussianTree, tree2: GaussianTree) -> Result<Self> {
        if tree1.n() != tree2.n() {
            return Err(Error::DimensionMismatch(tree1.n(), tree2.n()));
        }
        let labels = (1..=tree1.n()).collect();
        Ok(TreePair {
            tree1,
            tree2,
            labels,
        })
    }

    pub fn tree1(&self) -> &GaussianTree {
        &self.tree1
    }

    pub fn tree2(&self) -> &GaussianTree {
        &self.tree2
    }

    pub fn n(&self) -> usize {
        self.tree1.n()
    }

    /// Original id of current node `node`.
    pub fn original_label(&self, node: usize) -> usize {
        self.labels[node - 1]
    }

    /// Current id of an original node, if it is still present.
    pub fn current_id(&self, original: usize) -> Option<usize> {
        self.labels.iter().position(|&l| l == original).map(|p| p + 1)
    }

    pub fn is_common_leaf(&self, node: usize) -> bool {
        node >= 1
            && node <= self.n()
            && self.tree1.degree(node) == 1
            && self.tree1.neighbors(node) == self.tree2.neighbors(node)
    }

    pub fn is_common_degree2(&self, node: usize) -> bool {
        node >= 1
            && node <= self.n()
            && self.tree1.degree(node) == 2
            && self.tree1.neighbors(node) == self.tree2.neighbors(node)
    }

    fn without(&self, node: usize, t1: GaussianTree, t2: GaussianTree) -> TreePair {
        let mut labels = self.labels.clone();
        labels.remove(node - 1);
        TreePair {
            tree1: t1,
            tree2: t2,
            labels,
        }
    }

    /// Removes a leaf that hangs off the same node with the same weight in
    /// both trees.
    pub fn prune_common_leaf(&self, node: usize) -> Result<TreePair> {
        if !self.is_common_leaf(node) {
            return Err(Error::NotCommonLeaf(node));
        }
        if self.n() <= 2 {
            return Err(Error::PairTooSmall);
        }
        let t1 = self.tree1.without_leaf(node)?;
        let t2 = self.tree2.without_leaf(node)?;
        Ok(self.without(node, t1, t2))
    }

    /// Replaces a shared degree-2 node `p – i – q` by the edge `p – q` with
    /// weight `w_ip · w_iq` in both trees.
    pub fn contract_common_degree2(&self, node: usize) -> Result<TreePair> {
        if !self.is_common_degree2(node) {
            return Err(Error::NotCommonDegree2(node));
        }
        let t1 = self.tree1.without_degree2(node)?;
        let t2 = self.tree2.without_degree2(node)?;
        Ok(self.without(node, t1, t2))
    }

    /// Prunes common leaves to a fixpoint, then contracts common degree-2
    /// nodes, and repeats until neither applies. The smallest eligible node id
    /// goes first; the pair never drops below 2 nodes.
    pub fn reduce(&self) -> TreePair {
        let mut cur = self.clone();
        loop {
            if cur.n() > 2 {
                if let Some(v) = (1..=cur.n()).find(|&v| cur.is_common_leaf(v)) {
                    cur = cur.prune_common_leaf(v).expect("eligible leaf");
                    continue;
                }
            }
            if cur.n() > 2 {
                if let Some(v) = (1..=cur.n()).find(|&v| cur.is_common_degree2(v)) {
                    cur = cur.contract_common_degree2(v).expect("eligible node");
                    continue;
                }
            }
            return cur;
        }
    }
}

/// Reduces a grafted pair to its 3-node canonical form by repeated pruning
/// and contraction.
pub fn reduce_pair(pair: &GraftedPair) -> Result<CanonicalPair> {
    if pair.is_trivial() {
        return Err(Error::TrivialGraft);
    }
    let (i, j) = pair.cut_edge();
    let k = pair.attach_node();
    let reduced = TreePair::new(pair.tree1().clone(), pair.tree2().clone())?.reduce();
    if reduced.n() != 3 {
        return Err(Error::NotGraftedPair("reduction did not reach a 3-node skeleton"));
    }
    let id = |v: usize| {
        reduced
            .current_id(v)
            .ok_or(Error::NotGraftedPair("graft endpoints were reduced away"))
    };
    let (a, c, b) = (id(i)?, id(j)?, id(k)?);
    let t1 = reduced.tree1();
    let t2 = reduced.tree2();
    let w1 = t1.weight(a, b);
    let w2 = t1.weight(a, c);
    if w1.is_none() || w2.is_none() || t2.weight(a, b) != w1 || t2.weight(b, c) != w2 {
        return Err(Error::NotGraftedPair("reduced trees do not match the 3-node skeleton"));
    }
    CanonicalPair::new(w1.unwrap_or_default(), w2.unwrap_or_default())
}

/// Covariances of the 3-node skeleton with nodes ordered `(a, b, c)`:
/// `tree1 = {a–b: w1, a–c: w2}`, `tree2 = {a–b: w1, b–c: w2}`.
/// Either sign of `w2` is accepted.
pub fn canonical_covariances(w1: f64, w2: f64) -> (Matrix, Matrix) {
    let s1 = Matrix::from_row_slice(
        3,
        3,
        &[1.0, w1, w2, w1, 1.0, w1 * w2, w2, w1 * w2, 1.0],
    );
    let s2 = Matrix::from_row_slice(
        3,
        3,
        &[1.0, w1, w1 * w2, w1, 1.0, w2, w1 * w2, w2, 1.0],
    );
    (s1, s2)
}

/// The reduced parameters `(w1, w2)` of a grafted pair. `w2` is stored as
/// `|w2|`; the Chernoff information only sees `w2²` and the spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalPair {
    w1: f64,
    w2: f64,
}

impl CanonicalPair {
    pub fn new(w1: f64, w2: f64) -> Result<Self> {
        let ok = w1.is_finite() && abs(w1) < 1.0 && w2.is_finite() && w2 != 0.0 && abs(w2) < 1.0;
        if !ok {
            return Err(Error::CanonicalDomain { w1, w2 });
        }
        Ok(CanonicalPair { w1, w2: abs(w2) })
    }

    pub fn w1(&self) -> f64 {
        self.w1
    }

    pub fn w2(&self) -> f64 {
        self.w2
    }

    /// `β = w2² + 2(1 − w2²)/(1 − w1)`.
    pub fn beta(&self) -> f64 {
        let w2sq = self.w2 * self.w2;
        w2sq + 2.0 * (1.0 - w2sq) / (1.0 - self.w1)
    }

    /// Largest generalized eigenvalue, `(√β + w2)/(√β − w2)`.
    pub fn lambda_max(&self) -> f64 {
        let sb = sqrt(self.beta());
        (sb + self.w2) / (sb - self.w2)
    }

    pub fn covariances(&self) -> (Matrix, Matrix) {
        canonical_covariances(self.w1, self.w2)
    }

    /// The skeleton as trees on nodes `a = 1, b = 2, c = 3`. Fails when
    /// `w1 = 0`, which has no tree representation.
    pub fn trees(&self) -> Result<(GaussianTree, GaussianTree)> {
        Ok((
            GaussianTree::new(3, &[(1, 2, self.w1), (1, 3, self.w2)])?,
            GaussianTree::new(3, &[(1, 2, self.w1), (2, 3, self.w2)])?,
        ))
    }

    /// Full-observation Chernoff information `ln((λ + 1)/(2√λ))`.
    pub fn ci_full(&self) -> f64 {
        // (λ + 1)/(2√λ) − 1 = (√λ − 1)²/(2√λ)
        let r = sqrt(self.lambda_max());
        ln_1p((r - 1.0) * (r - 1.0) / (2.0 * r))
    }

    /// The same quantity written in the weights:
    /// `½ ln(1 + ½ · w2²/(1 − w2²) · (1 − w1))`.
    pub fn ci_full_from_weights(&self) -> f64 {
        let w2sq = self.w2 * self.w2;
        0.5 * ln_1p(0.5 * w2sq / (1.0 - w2sq) * (1.0 - self.w1))
    }

    /// Best single-projection Chernoff information `g(λ_max)`.
    pub fn ci_lt(&self) -> f64 {
        scalar_g(self.lambda_max()).unwrap_or(0.0)
    }
}

/// Generalized eigenvalues of a 3-node canonical pair, ascending.
///
/// The pencil always has the eigenvalue 1 (equal determinants and a shared
/// edge), so the characteristic cubic of `Σ₂⁻¹Σ₁` is deflated by `(μ − 1)`
/// and the remaining quadratic solved directly.
pub fn canonical_eigs(sigma1: &Matrix, sigma2: &Matrix) -> Result<[f64; 3]> {
    if sigma1.rows() != 3 || sigma1.cols() != 3 || sigma2.rows() != 3 || sigma2.cols() != 3 {
        return Err(Error::NotCanonical("expected two 3x3 matrices"));
    }
    Cholesky::new(sigma1)?;
    let m = Cholesky::new(sigma2)?.inverse().matmul(sigma1)?;
    let minor = |i: usize, j: usize| m[(i, i)] * m[(j, j)] - m[(i, j)] * m[(j, i)];
    let tr = m.trace();
    let c1 = minor(0, 1) + minor(0, 2) + minor(1, 2);
    let det = m[(0, 0)] * minor(1, 2) - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)]);

    // μ³ − tr μ² + c1 μ − det = (μ − 1)(μ² + q1 μ + q2)
    let q1 = 1.0 - tr;
    let q2 = c1 + q1;
    let remainder = q2 - det;
    let scale = 1.0 + abs(tr) + abs(c1) + abs(det);
    if abs(remainder) > 1e-9 * scale {
        return Err(Error::NotCanonical("1 is not a generalized eigenvalue"));
    }
    let disc = (q1 * q1 - 4.0 * q2).max(0.0);
    let big = if q1 <= 0.0 {
        0.5 * (-q1 + sqrt(disc))
    } else {
        0.5 * (-q1 - sqrt(disc))
    };
    let small = q2 / big;
    let mut out = [small, 1.0, big];
    out.sort_by(f64::total_cmp);
    Ok(out)
}
