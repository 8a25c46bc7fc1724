//! Normalized Gaussian trees.
//!
//! Every node has unit variance and each edge carries the correlation between
//! its endpoints. The covariance of two nodes is the product of the weights on
//! the unique path joining them, and both the determinant and the precision
//! matrix have closed forms in terms of the edge weights alone.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Deref;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::math::abs;

/// Undirected weighted edge, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

impl Edge {
    fn new(i: usize, j: usize, weight: f64) -> Self {
        Edge {
            a: i.min(j),
            b: i.max(j),
            weight,
        }
    }

    pub fn other(&self, node: usize) -> usize {
        if node == self.a {
            self.b
        } else {
            self.a
        }
    }

    pub fn touches(&self, node: usize) -> bool {
        self.a == node || self.b == node
    }
}

/// A spanning tree on nodes `1..=n` with weights in `0 < |w| < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTree {
    n: usize,
    edges: Vec<Edge>,
    // adj[v - 1] = (neighbour, weight)
    adj: Vec<Vec<(usize, f64)>>,
}

pub fn check_weight(w: f64) -> Result<()> {
    if w.is_finite() && w != 0.0 && abs(w) < 1.0 {
        Ok(())
    } else {
        Err(Error::WeightDomain(w))
    }
}

impl GaussianTree {
    /// Builds a tree from `(i, j, w)` triples with 1-based node ids.
    pub fn new(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewNodes(n));
        }
        if edges.len() != n - 1 {
            return Err(Error::EdgeCount {
                nodes: n,
                expected: n - 1,
                got: edges.len(),
            });
        }
        let mut list = Vec::with_capacity(edges.len());
        for &(i, j, w) in edges {
            for node in [i, j] {
                if node == 0 || node > n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            check_weight(w)?;
            list.push(Edge::new(i, j, w));
        }
        list.sort_by_key(|e| (e.a, e.b));
        if let Some(w) = list.windows(2).find(|w| (w[0].a, w[0].b) == (w[1].a, w[1].b)) {
            return Err(Error::DuplicateEdge(w[0].a, w[0].b));
        }

        let mut adj = vec![Vec::new(); n];
        for e in &list {
            adj[e.a - 1].push((e.b, e.weight));
            adj[e.b - 1].push((e.a, e.weight));
        }
        for nb in adj.iter_mut() {
            nb.sort_by_key(|&(v, _)| v);
        }
        let tree = GaussianTree {
            n,
            edges: list,
            adj,
        };
        // n - 1 edges: connected <=> acyclic
        if tree.reachable_from(1, None).iter().any(|seen| !seen) {
            return Err(Error::Disconnected);
        }
        Ok(tree)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges sorted by `(a, b)` with `a < b`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.adj[node - 1]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adj[node - 1].len()
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        if i == 0 || i > self.n {
            return None;
        }
        self.adj[i - 1]
            .iter()
            .find(|&&(v, _)| v == j)
            .map(|&(_, w)| w)
    }

    fn check_node(&self, node: usize) -> Result<()> {
        if node == 0 || node > self.n {
            Err(Error::NodeOutOfRange { node, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Marks nodes reachable from `start`, optionally ignoring one edge.
    fn reachable_from(&self, start: usize, skip: Option<(usize, usize)>) -> Vec<bool> {
        let blocked = |u: usize, v: usize| match skip {
            Some((a, b)) => (u == a && v == b) || (u == b && v == a),
            None => false,
        };
        let mut seen = vec![false; self.n];
        let mut stack = vec![start];
        seen[start - 1] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adj[u - 1] {
                if !seen[v - 1] && !blocked(u, v) {
                    seen[v - 1] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Parent pointers and the product of weights from `root` to every node.
    fn root_products(&self, root: usize) -> (Vec<usize>, Vec<f64>) {
        let mut parent = vec![0usize; self.n];
        let mut prod = vec![0.0; self.n];
        let mut seen = vec![false; self.n];
        prod[root - 1] = 1.0;
        seen[root - 1] = true;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &(v, w) in &self.adj[u - 1] {
                if !seen[v - 1] {
                    seen[v - 1] = true;
                    parent[v - 1] = u;
                    prod[v - 1] = prod[u - 1] * w;
                    stack.push(v);
                }
            }
        }
        (parent, prod)
    }

    /// Nodes on the unique path from `a` to `b`, both ends included.
    pub fn path(&self, a: usize, b: usize) -> Result<Vec<usize>> {
        self.check_node(a)?;
        self.check_node(b)?;
        let (parent, _) = self.root_products(a);
        let mut nodes = vec![b];
        let mut cur = b;
        while cur != a {
            cur = parent[cur - 1];
            nodes.push(cur);
        }
        nodes.reverse();
        Ok(nodes)
    }

    /// Product of edge weights along the path from `a` to `b` (1 when `a == b`).
    pub fn path_weight(&self, a: usize, b: usize) -> Result<f64> {
        let nodes = self.path(a, b)?;
        Ok(nodes
            .windows(2)
            .map(|p| self.weight(p[0], p[1]).unwrap_or(f64::NAN))
            .product())
    }

    /// Covariance with `σᵢᵢ = 1` and `σᵢⱼ` the path product.
    pub fn covariance(&self) -> CovarianceMatrix {
        let mut m = Matrix::identity(self.n);
        for root in 1..=self.n {
            let (_, prod) = self.root_products(root);
            for other in (root + 1)..=self.n {
                m[(root - 1, other - 1)] = prod[other - 1];
                m[(other - 1, root - 1)] = prod[other - 1];
            }
        }
        CovarianceMatrix(m)
    }

    /// `∏ (1 − w²)` over the edges.
    ///
    /// Factors are multiplied in sorted order, so trees with the same multiset
    /// of edge weights get bit-identical determinants.
    pub fn determinant(&self) -> f64 {
        let mut f: Vec<f64> = self.edges.iter().map(|e| 1.0 - e.weight * e.weight).collect();
        f.sort_by(f64::total_cmp);
        f.iter().product()
    }

    /// Closed-form inverse of [`covariance`](Self::covariance). Non-zero only on
    /// the diagonal and on edges.
    pub fn precision(&self) -> Matrix {
        let mut u = Matrix::identity(self.n);
        for e in &self.edges {
            let w = e.weight;
            let d = 1.0 - w * w;
            u[(e.a - 1, e.b - 1)] = -w / d;
            u[(e.b - 1, e.a - 1)] = -w / d;
            u[(e.a - 1, e.a - 1)] += w * w / d;
            u[(e.b - 1, e.b - 1)] += w * w / d;
        }
        u
    }

    /// Cuts edge `(i, j)` and reattaches `j` (with everything hanging below it)
    /// to `attach`, keeping the weight.
    pub fn graft(&self, cut: (usize, usize), attach: usize) -> Result<GraftedPair> {
        let (i, j) = cut;
        self.check_node(i)?;
        self.check_node(j)?;
        self.check_node(attach)?;
        let w2 = self.weight(i, j).ok_or(Error::MissingEdge(i, j))?;
        let severed = self.reachable_from(j, Some((i, j)));
        if severed[attach - 1] {
            return Err(Error::AttachInSubtree { attach, child: j });
        }
        let w1 = self.path_weight(i, attach)?;

        let mut triples: Vec<(usize, usize, f64)> = self
            .edges
            .iter()
            .filter(|e| !(e.touches(i) && e.touches(j)))
            .map(|e| (e.a, e.b, e.weight))
            .collect();
        triples.push((attach, j, w2));
        let tree2 = GaussianTree::new(self.n, &triples)?;

        Ok(GraftedPair {
            tree1: self.clone(),
            tree2,
            cut,
            attach,
            w1,
            w2,
        })
    }

    /// Deletes a leaf and relabels nodes above it down by one.
    pub(crate) fn without_leaf(&self, leaf: usize) -> Result<GaussianTree> {
        if self.degree(leaf) != 1 {
            return Err(Error::NotCommonLeaf(leaf));
        }
        let relabel = |v: usize| if v > leaf { v - 1 } else { v };
        let triples: Vec<_> = self
            .edges
            .iter()
            .filter(|e| !e.touches(leaf))
            .map(|e| (relabel(e.a), relabel(e.b), e.weight))
            .collect();
        GaussianTree::new(self.n - 1, &triples)
    }

    /// Replaces a degree-2 node `p – v – q` by the edge `p – q` with weight
    /// `w_vp · w_vq`, relabelling nodes above `v` down by one.
    pub(crate) fn without_degree2(&self, node: usize) -> Result<GaussianTree> {
        let nb = self.neighbors(node);
        if nb.len() != 2 {
            return Err(Error::NotCommonDegree2(node));
        }
        let (p, wp) = nb[0];
        let (q, wq) = nb[1];
        let relabel = |v: usize| if v > node { v - 1 } else { v };
        let mut triples: Vec<_> = self
            .edges
            .iter()
            .filter(|e| !e.touches(node))
            .map(|e| (relabel(e.a), relabel(e.b), e.weight))
            .collect();
        triples.push((relabel(p), relabel(q), wp * wq));
        GaussianTree::new(self.n - 1, &triples)
    }
}

/// Random tree on `n` nodes: node `v` attaches to a uniformly chosen node in
/// `1..v`, with weight magnitude uniform on `[0.05, 0.95]` and a random sign.
pub fn random_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<GaussianTree> {
    let edges: Vec<_> = (2..=n.max(1))
        .map(|v| {
            let parent = rng.random_range(1..v);
            let mag = rng.random_range(0.05..=0.95);
            let w = if rng.random_bool(0.5) { mag } else { -mag };
            (parent, v, w)
        })
        .collect();
    GaussianTree::new(n, &edges)
}

/// Random non-trivial graft of `tree`: a uniformly chosen edge, a random
/// choice of which endpoint moves, and a uniformly chosen new neighbour on the
/// other side of the cut. `None` if the tree has only 2 nodes.
pub fn random_graft<R: Rng + ?Sized>(tree: &GaussianTree, rng: &mut R) -> Option<GraftedPair> {
    if tree.n() < 3 {
        return None;
    }
    loop {
        let e = tree.edges()[rng.random_range(0..tree.edges().len())];
        let (i, j) = if rng.random_bool(0.5) { (e.a, e.b) } else { (e.b, e.a) };
        let severed = tree.reachable_from(j, Some((i, j)));
        let targets: Vec<usize> = (1..=tree.n())
            .filter(|&v| v != i && !severed[v - 1])
            .collect();
        if targets.is_empty() {
            continue;
        }
        let k = targets[rng.random_range(0..targets.len())];
        return tree.graft((i, j), k).ok();
    }
}

/// A symmetric, unit-diagonal, positive definite matrix with off-diagonal
/// entries in `(-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix(Matrix);

impl CovarianceMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let n = m.rows();
        for i in 0..n {
            if m[(i, i)] != 1.0 {
                return Err(Error::InvalidCovariance("diagonal entries must be 1"));
            }
            for j in 0..i {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::InvalidCovariance("matrix is not symmetric"));
                }
                if abs(m[(i, j)]).is_nan() || abs(m[(i, j)]) >= 1.0 {
                    return Err(Error::InvalidCovariance("off-diagonal entry outside (-1, 1)"));
                }
            }
        }
        Cholesky::new(&m)?;
        Ok(CovarianceMatrix(m))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_inner(self) -> Matrix {
        self.0
    }
}

impl Deref for CovarianceMatrix {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.0
    }
}

impl AsRef<Matrix> for CovarianceMatrix {
    fn as_ref(&self) -> &Matrix {
        &self.0
    }
}

/// Two trees one graft apart: `tree2` is `tree1` with edge `(i, j)` replaced
/// by `(k, j)` of the same weight.
#[derive(Debug, Clone, PartialEq)]
pub struct GraftedPair {
    tree1: GaussianTree,
    tree2: GaussianTree,
    cut: (usize, usize),
    attach: usize,
    w1: f64,
    w2: f64,
}

impl GraftedPair {
    pub fn tree1(&self) -> &GaussianTree {
        &self.tree1
    }

    pub fn tree2(&self) -> &GaussianTree {
        &self.tree2
    }

    /// The removed edge `(i, j)`; `j` is the node that moves.
    pub fn cut_edge(&self) -> (usize, usize) {
        self.cut
    }

    /// The new neighbour `k` of the moved node.
    pub fn attach_node(&self) -> usize {
        self.attach
    }

    /// Path weight from `i` to `k` in `tree1`.
    pub fn w1(&self) -> f64 {
        self.w1
    }

    /// Weight of the moved edge.
    pub fn w2(&self) -> f64 {
        self.w2
    }

    pub fn is_trivial(&self) -> bool {
        self.attach == self.cut.0
    }

    /// Recovers the graft relating two trees from the symmetric difference of
    /// their weighted edge sets. The difference must be exactly one removed
    /// edge `(i, j, w)` and one added edge `(k, j, w)`.
    pub fn detect(tree1: &GaussianTree, tree2: &GaussianTree) -> Result<GraftedPair> {
        if tree1.n() != tree2.n() {
            return Err(Error::DimensionMismatch(tree1.n(), tree2.n()));
        }
        let only_in = |x: &GaussianTree, y: &GaussianTree| -> Vec<Edge> {
            x.edges()
                .iter()
                .filter(|e| y.weight(e.a, e.b) != Some(e.weight))
                .copied()
                .collect()
        };
        let removed = only_in(tree1, tree2);
        let added = only_in(tree2, tree1);
        if removed.is_empty() && added.is_empty() {
            return Err(Error::TrivialGraft);
        }
        if removed.len() != 1 || added.len() != 1 {
            return Err(Error::NotGraftedPair("edge sets differ by more than one edge"));
        }
        let (r, a) = (removed[0], added[0]);
        if r.weight != a.weight {
            return Err(Error::NotGraftedPair("the moved edge changed its weight"));
        }
        let j = if a.touches(r.a) {
            r.a
        } else if a.touches(r.b) {
            r.b
        } else {
            return Err(Error::NotGraftedPair("removed and added edges share no endpoint"));
        };
        let i = r.other(j);
        let k = a.other(j);
        let pair = tree1.graft((i, j), k)?;
        if pair.tree2 != *tree2 {
            return Err(Error::NotGraftedPair("regrafting does not reproduce the second tree"));
        }
        Ok(pair)
    }
}
