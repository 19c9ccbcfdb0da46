//! Varied-density clustering on neighborhood graphs.
//!
//! The pipeline finds approximate neighborhoods with a CEOs random-projection
//! index (or exactly, by brute force), builds a kNN graph, and extracts
//! clusters by density-aware neighborhood propagation (DNP), label
//! propagation or Louvain. An exact DBSCAN / DBSCAN*_k implementation and the
//! usual external scores (AMI, NMI, ARI) are included for evaluation.
//!
//! ```
//! use vdc_core::propagation::{ping, Backend, CheckSet, PingConfig, Propagator};
//! use vdc_core::{synth, GraphKind, Metric};
//!
//! let (ds, _) = synth::two_blobs(200, 10.0, 7);
//! let cfg = PingConfig {
//!     k: 10,
//!     graph: GraphKind::Symmetric,
//!     backend: Backend::Exact { metric: Metric::L2 },
//!     propagator: Propagator::Dnp { c: 1, k_prime: None, check: CheckSet::TopK },
//!     keep_graph: false,
//! };
//! assert_eq!(ping(&ds, &cfg).unwrap().labeling.n_clusters(), 2);
//! ```

// `!(x > 0.0)` style checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ceos;
pub mod data_io;
pub mod dbscan;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod propagation;
pub mod rp;
pub mod synth;

pub use ceos::{CeosIndex, CeosParams, NeighborList};
pub use data_io::{Dataset, GroundTruth, KernelFeatureConfig, KernelMetric, Metric};
pub use error::{Error, Result};
pub use graph::{build_graph, exact_knn, exact_knn_for, GraphKind, KnnGraph, KnnLists};
pub use propagation::Labeling;
