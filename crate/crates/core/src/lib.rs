//! Spectral sparsification of weighted undirected graphs.
//!
//! A spanning tree is extracted as a backbone, off-tree edges are ranked by
//! the Joule heat they dissipate under a few steps of generalized power
//! iteration, and the hottest dissimilar edges are recovered round by round
//! until the estimated relative condition number `λ_max / λ_min` of the
//! pencil `(L_G, L_P)` meets a target. The result serves as a preconditioner
//! for conjugate gradients and as a fast engine for spectral bipartitioning.
//!
//! ```
//! use heatsparse::graph::generate::{grid, Weighting};
//! use heatsparse::sparsifier::{densify, DensifyConfig};
//! use heatsparse::tree::max_weight;
//!
//! let g = grid(20, 20, Weighting::Unit).unwrap();
//! let tree = max_weight(&g).unwrap();
//! let sp = densify(&g, tree, 50.0, &DensifyConfig::default()).unwrap();
//! assert!(sp.edge_count() >= g.n() - 1);
//! ```

// Negated float comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod embedding;
pub mod error;
pub mod graph;
pub mod numeric;
pub mod oracle;
pub mod partition;
pub mod pcg;
pub mod rng;
pub mod similarity;
pub mod solver;
pub mod sparsifier;
pub mod tree;

pub use error::{Error, Result};
pub use graph::{Edge, VertexVector, WeightedGraph};
pub use solver::LaplacianSolver;
pub use tree::SpanningTree;
