//! Label propagation: every node starts in its own cluster and repeatedly
//! adopts the most frequent label among its neighbors.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Labeling;
use crate::error::{Error, Result};
use crate::graph::KnnGraph;

/// Most frequent neighbor label, ties to the smallest label. `None` for an
/// isolated node.
pub(crate) fn majority_label(
    g: &KnnGraph,
    labels: &[i64],
    u: usize,
    scratch: &mut Vec<i64>,
) -> Option<i64> {
    scratch.clear();
    scratch.extend(g.neighbors(u).iter().map(|e| labels[e.id as usize]));
    if scratch.is_empty() {
        return None;
    }
    scratch.sort_unstable();
    let (mut best, mut best_count) = (scratch[0], 0usize);
    let mut i = 0;
    while i < scratch.len() {
        let mut j = i;
        while j < scratch.len() && scratch[j] == scratch[i] {
            j += 1;
        }
        // strictly greater keeps the smallest label among equal counts
        if j - i > best_count {
            best = scratch[i];
            best_count = j - i;
        }
        i = j;
    }
    Some(best)
}

/// Nodes are visited in a fresh seeded random order each sweep and updated in
/// place. Stops at a fixpoint or after `max_iters` sweeps.
pub fn lpa(g: &KnnGraph, max_iters: usize, seed: u64) -> Result<Labeling> {
    lpa_traced(g, max_iters, seed, |_, _, _| {})
}

/// As [`lpa`], calling `trace(order, before, after)` once per sweep.
pub fn lpa_traced(
    g: &KnnGraph,
    max_iters: usize,
    seed: u64,
    mut trace: impl FnMut(&[usize], &[i64], &[i64]),
) -> Result<Labeling> {
    if max_iters == 0 {
        return Err(Error::Config("LPA needs at least one iteration".into()));
    }
    let n = g.n();
    let mut labels: Vec<i64> = (0..n as i64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut scratch = Vec::new();
    for _ in 0..max_iters {
        order.shuffle(&mut rng);
        let before = labels.clone();
        let mut changed = false;
        for &u in &order {
            if let Some(l) = majority_label(g, &labels, u, &mut scratch) {
                if l != labels[u] {
                    labels[u] = l;
                    changed = true;
                }
            }
        }
        trace(&order, &before, &labels);
        if !changed {
            break;
        }
    }
    Ok(Labeling::compact(&labels))
}
