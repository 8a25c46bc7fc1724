use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a tree needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("a tree on {nodes} nodes has {expected} edges, got {got}")]
    EdgeCount {
        nodes: usize,
        expected: usize,
        got: usize,
    },
    #[error("node {node} is outside 1..={n}")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("edge ({0}, {0}) is a self-loop")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) appears more than once")]
    DuplicateEdge(usize, usize),
    #[error("edges do not connect all nodes (the edge set has a cycle)")]
    Disconnected,
    #[error("edge weight {0} is outside 0 < |w| < 1")]
    WeightDomain(f64),
    #[error("({0}, {1}) is not an edge of the tree")]
    MissingEdge(usize, usize),
    #[error("attach node {attach} lies in the subtree cut off below node {child}")]
    AttachInSubtree { attach: usize, child: usize },
    #[error("trivial graft: the attach node is the cut node, so both trees coincide")]
    TrivialGraft,
    #[error("trees are not one graft apart: {0}")]
    NotGraftedPair(&'static str),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("not a normalized covariance matrix: {0}")]
    InvalidCovariance(&'static str),
    #[error("interpolation parameter {0} is outside [0, 1]")]
    LambdaRange(f64),
    #[error("expected a positive value, got {0}")]
    NonPositive(f64),
    #[error("invalid probability vector: {0}")]
    InvalidPmf(&'static str),
    #[error("state index {index} is out of range for {len} states")]
    StateIndex { index: usize, len: usize },
    #[error("node {0} is not a leaf with the same neighbour and weight in both trees")]
    NotCommonLeaf(usize),
    #[error("node {0} does not have the same two neighbours and weights in both trees")]
    NotCommonDegree2(usize),
    #[error("node {0} has a different neighbourhood in the two trees")]
    NodeDiffers(usize),
    #[error("pair already has the minimum of 2 nodes")]
    PairTooSmall,
    #[error("canonical pair needs |w1| < 1 and 0 < |w2| < 1, got ({w1}, {w2})")]
    CanonicalDomain { w1: f64, w2: f64 },
    #[error("matrices are not a 3-node canonical pair: {0}")]
    NotCanonical(&'static str),
    #[error("invalid observation dimensions p={p}, q={q} for N={n}")]
    ObservationDims { p: usize, q: usize, n: usize },
    #[error("grid value {0} must lie in (1, inf)")]
    GridDomain(f64),
}
