//! Second-order (node2vec) random walks on simple undirected graphs.
//!
//! The walk is lifted to a first-order chain on directed edges and on
//! wedges (paths of length two). The crate builds both kernels, computes
//! their stationary measures and checks structural properties: ergodicity,
//! balance relations and a recurrence comparison against simple random walk.

pub mod balance;
pub mod corpus;
pub mod ergodicity;
pub mod error;
pub mod generators;
pub mod graph;
pub mod kernel;
pub mod linalg;
pub mod recurrence;
pub mod report;
pub mod resistance;
pub mod rng;
pub mod simulate;
pub mod stationary;

pub use error::{Error, Result};
pub use graph::{DirectedEdge, Graph, Params, Wedge, WedgeKind};
pub use kernel::{Kernel, Space};
