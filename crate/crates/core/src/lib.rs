//! Chernoff information between Gaussian tree models related by an edge graft.
//!
//! A Gaussian tree on `n` nodes with unit variances is fully described by its
//! edge correlations: the covariance between two nodes is the product of the
//! weights along the path joining them. Cutting one edge `(i, j)` and hanging
//! `j` (with its subtree) from another node `k` gives a second tree with the
//! same determinant, and the pair is the hardest to tell apart among trees
//! one graft away from each other.
//!
//! The crate is `no_std` (it needs `alloc`) and is organised as:
//!
//! | module | contents |
//! |--------|----------|
//! | [`linalg`] | dense matrices, Cholesky, symmetric Jacobi eigen |
//! | [`tree`] | [`GaussianTree`], covariance, closed-form inverse/determinant, grafting |
//! | [`info`] | KL divergence, Chernoff information (full and scalar), discrete PMFs |
//! | [`reduction`] | leaf pruning, degree-2 contraction, the 3-node [`CanonicalPair`] |
//! | [`lt`] | best single linear observation `y = αᵀx` |
//! | [`compare`] | full vs. one-dimensional observation, normalised exponents |
//!
//! ```
//! use graftci::{tree::GaussianTree, info::chernoff, reduction::CanonicalPair};
//!
//! let t1 = GaussianTree::new(3, &[(1, 2, 0.5), (1, 3, 0.6)]).unwrap();
//! let pair = t1.graft((1, 3), 2).unwrap();
//! let full = chernoff(&t1.covariance(), &pair.tree2().covariance()).unwrap();
//! let canon = CanonicalPair::new(0.5, 0.6).unwrap();
//! assert!((full.value - canon.ci_full()).abs() < 1e-9);
//! ```
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod compare;
pub mod error;
pub mod info;
pub mod linalg;
pub mod lt;
mod math;
pub mod reduction;
pub mod tree;

pub use error::{Error, Result};
pub use info::{chernoff, kl, ChernoffResult, DiscretePmf};
pub use linalg::Matrix;
pub use lt::LtSolution;
pub use reduction::{CanonicalPair, TreePair};
pub use tree::{CovarianceMatrix, GaussianTree, GraftedPair};
