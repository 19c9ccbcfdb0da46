//! Cluster extraction from neighborhood graphs.
//!
//! - [`dnp`]: density-aware neighborhood propagation, a deterministic
//!   priority-queue expansion from the densest points outward
//! - [`lpa`]: classic label propagation
//! - [`louvain`]: weighted modularity optimization
//! - [`ping`]: neighborhood search, graph construction and propagation in
//!   one call

pub mod dnp;
pub mod louvain;
pub mod lpa;
pub mod ping;

pub use dnp::{dnp, dnp_observed, CheckSet, DnpInput, DnpObserver, DnpParams};
pub use louvain::{louvain, modularity, LouvainResult, Similarity};
pub use lpa::lpa;
pub use ping::{
    ping, ping_from_neighborhoods, ping_with_index, prepare_for_ceos, Backend, PingConfig,
    PingOutput, Propagator, StageTimings,
};

/// Cluster id per point; `-1` marks an unassigned (noise) point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    labels: Vec<i32>,
    n_clusters: usize,
}

impl Labeling {
    /// Renumbers non-negative labels to `0..c` in order of first appearance;
    /// `-1` is kept.
    pub fn compact(raw: &[i64]) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|&l| {
                if l < 0 {
                    -1
                } else {
                    let next = map.len() as i32;
                    *map.entry(l).or_insert(next)
                }
            })
            .collect();
        Self {
            labels,
            n_clusters: map.len(),
        }
    }

    pub(crate) fn from_dense(labels: Vec<i32>, n_clusters: usize) -> Self {
        debug_assert!(labels
            .iter()
            .all(|&l| l >= -1 && (l as i64) < n_clusters as i64));
        Self { labels, n_clusters }
    }

    pub fn labels(&self) -> &[i32] {
        &self.labels
    }

    pub fn into_labels(self) -> Vec<i32> {
        self.labels
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l < 0).count()
    }

    /// Point count per cluster id.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters];
        for &l in &self.labels {
            if l >= 0 {
                sizes[l as usize] += 1;
            }
        }
        sizes
    }
}
