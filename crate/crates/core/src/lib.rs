//! Approximate nearest neighbors under truncated commute time.
//!
//! For every destination `j` the library grows a bounded neighborhood
//! `AP(*, j)` of sources and keeps lower and upper bounds on the truncated
//! hitting time `h^T(i, j)` of each member. Nodes outside the neighborhood are
//! known to be at least `lb(j)` away. Adding the two directions gives commute
//! time bounds from which k-nearest-neighbor queries are answered with a
//! `(1 + ε)` guarantee.
//!
//! ```
//! use granch::ap::{expand_ap, GranchParams};
//! use granch::graph::parse_edge_list;
//! use granch::knn::{knn_commute, KnnParams};
//!
//! let g = parse_edge_list("0 1\n1 2\n0 2\n2 3\n", false).unwrap();
//! let mut index = expand_ap(&g, &GranchParams::new(6, 5.95)).unwrap();
//! let res = knn_commute(&g, &mut index, 0, &KnnParams { k: 1, ..Default::default() }).unwrap();
//! assert!(!res.entries.is_empty());
//! ```
//!
//! Modules:
//! - [`graph`]: sparse weighted graphs and edge-list I/O.
//! - [`oracle`]: exact truncated and true hitting times, commute times.
//! - [`bounds`], [`ap`]: neighborhoods, bound sweeps, expansion.
//! - [`knn`]: hitting and commute kNN queries.
//! - [`simgen`]: small-world generator and hub noise.
//! - [`eval`]: link-prediction protocol and AUC.
//! - [`verify`]: invariant checks against the oracles.
//! - [`dump`]: text formats for neighborhoods and query output.
//! - [`cli`]: the `granch` command.

pub mod ap;
pub mod bounds;
pub mod cli;
pub mod dump;
pub mod error;
pub mod eval;
pub mod graph;
pub mod knn;
pub mod oracle;
pub mod simgen;
pub mod verify;

pub use ap::{expand_ap, GranchIndex, GranchParams};
pub use error::{Error, Result};
pub use graph::Graph;
pub use knn::{knn_commute, KnnParams, NeighborResult};
