//! Density-aware neighborhood propagation (DNP).
//!
//! Points are visited in ascending `d_k'` (descending density). An unlabeled
//! point seeds a new cluster and its label spreads through a min-priority
//! queue keyed by `d(pred, x) + d_k'(x)`. A neighbor is queued only while
//! unlabeled and only when the edge improves its best-so-far reachability
//! distance. A popped point inherits its predecessor's label if one of its
//! own candidates already carries that label; otherwise it starts a new
//! cluster and keeps expanding.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::Labeling;
use crate::ceos::NeighborList;
use crate::error::{Error, Result};
use crate::graph::{by_dist_then_id, KnnEntry, KnnGraph, KnnLists};

/// `k` bounds the neighbor lists used for propagation; density uses
/// `k' = max(1, k / c)` unless `k'` was given directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DnpParams {
    pub k: usize,
    pub c: usize,
    k_prime: Option<usize>,
}

impl DnpParams {
    pub fn new(k: usize, c: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("DNP needs k >= 1".into()));
        }
        if c == 0 {
            return Err(Error::Config("DNP needs c >= 1".into()));
        }
        Ok(Self {
            k,
            c,
            k_prime: None,
        })
    }

    /// Fixes `k'` instead of deriving it from `c`; `1 <= k' <= k`.
    pub fn with_k_prime(k: usize, k_prime: usize) -> Result<Self> {
        if k_prime == 0 || k_prime > k {
            return Err(Error::Config(format!(
                "DNP needs 1 <= k' <= k, got k'={k_prime}, k={k}"
            )));
        }
        let mut p = Self::new(k, 1)?;
        p.c = (k / k_prime).max(1);
        p.k_prime = Some(k_prime);
        Ok(p)
    }

    pub fn k_prime(&self) -> usize {
        self.k_prime.unwrap_or((self.k / self.c).max(1))
    }
}

/// Which candidates are scanned for the predecessor-label check when the
/// push set is a full CEOs neighborhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CheckSet {
    /// The whole stored list. Large neighborhoods almost always hold a few
    /// far candidates from other clusters, which lets whole clusters merge.
    Stored,
    /// Only the `k` nearest stored candidates.
    #[default]
    TopK,
}

/// Candidate lists (sorted by `(distance, id)`) plus the per-point `d_k'`.
#[derive(Debug, Clone, PartialEq)]
pub struct DnpInput {
    lists: Vec<Vec<KnnEntry>>,
    density: Vec<f64>,
    check_len: Option<usize>,
}

impl DnpInput {
    /// Plain kNN lists: the first `k` entries of each list are both pushed and
    /// checked.
    pub fn from_knn_lists(lists: &KnnLists, p: &DnpParams) -> Self {
        let kp = p.k_prime();
        Self {
            lists: lists
                .lists()
                .iter()
                .map(|l| l[..l.len().min(p.k)].to_vec())
                .collect(),
            density: (0..lists.n()).map(|q| lists.kth_distance(q, kp)).collect(),
            check_len: None,
        }
    }

    /// Graph adjacency as the candidate set; `d_k'` from the lists the graph
    /// was built from.
    pub fn from_graph(g: &KnnGraph, p: &DnpParams) -> Self {
        Self {
            lists: g.adjacency().to_vec(),
            density: g.dk_at(p.k_prime()),
            check_len: None,
        }
    }

    /// Full CEOs neighborhoods `N(q)` are pushed; `d_k'` is read from `N(q)`.
    pub fn from_neighborhoods(nls: &[NeighborList], p: &DnpParams, check: CheckSet) -> Self {
        let kp = p.k_prime();
        let mut density = Vec::with_capacity(nls.len());
        let lists = nls
            .iter()
            .map(|nl| {
                let mut l: Vec<KnnEntry> = nl
                    .entries
                    .iter()
                    .map(|e| KnnEntry {
                        id: e.id,
                        dist: (1.0 - e.dot as f64).max(0.0),
                    })
                    .collect();
                l.sort_by(by_dist_then_id);
                density.push(match l.len() {
                    0 => f64::INFINITY,
                    len => l[kp.min(len) - 1].dist,
                });
                l
            })
            .collect();
        Self {
            lists,
            density,
            check_len: match check {
                CheckSet::Stored => None,
                CheckSet::TopK => Some(p.k),
            },
        }
    }

    /// Raw constructor; lists are sorted by `(distance, id)`.
    pub fn new(mut lists: Vec<Vec<KnnEntry>>, density: Vec<f64>) -> Result<Self> {
        if lists.len() != density.len() {
            return Err(Error::LengthMismatch {
                expected: lists.len(),
                actual: density.len(),
            });
        }
        let n = lists.len();
        for (u, l) in lists.iter_mut().enumerate() {
            if l.iter()
                .any(|e| e.id as usize >= n || e.id as usize == u || !(e.dist >= 0.0))
            {
                return Err(Error::Input(format!("invalid candidate in list {u}")));
            }
            l.sort_by(by_dist_then_id);
        }
        Ok(Self {
            lists,
            density,
            check_len: None,
        })
    }

    pub fn n(&self) -> usize {
        self.lists.len()
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn list(&self, u: usize) -> &[KnnEntry] {
        &self.lists[u]
    }

    fn check_list(&self, u: usize) -> &[KnnEntry] {
        let l = &self.lists[u];
        match self.check_len {
            Some(k) => &l[..l.len().min(k)],
            None => l,
        }
    }
}

/// Hooks into a DNP run, for instrumentation and tests.
pub trait DnpObserver {
    fn seed(&mut self, _node: usize, _label: i32) {}
    fn reach_update(&mut self, _node: usize, _old: f64, _new: f64) {}
    /// `stale` pops hit an already-labeled node and change nothing.
    fn pop(&mut self, _node: usize, _pred: usize, _stale: bool) {}
}

impl DnpObserver for () {}

#[derive(Debug, Clone, Copy)]
struct QueueEntry {
    priority: f64,
    node: u32,
    pred: u32,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueEntry {}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then(self.node.cmp(&other.node))
            .then(self.pred.cmp(&other.pred))
    }
}

pub fn dnp(input: &DnpInput) -> Labeling {
    dnp_observed(input, &mut ())
}

pub fn dnp_observed(input: &DnpInput, obs: &mut impl DnpObserver) -> Labeling {
    let n = input.n();
    let mut labels = vec![-1i32; n];
    let mut reach = vec![f64::INFINITY; n];
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by(|&a, &b| {
        input.density[a as usize]
            .total_cmp(&input.density[b as usize])
            .then(a.cmp(&b))
    });

    let mut heap: BinaryHeap<Reverse<QueueEntry>> = BinaryHeap::new();
    let mut next_label = 0i32;

    let push = |u: usize,
                labels: &[i32],
                reach: &mut [f64],
                heap: &mut BinaryHeap<Reverse<QueueEntry>>,
                obs: &mut dyn FnMut(usize, f64, f64)| {
        for e in &input.lists[u] {
            let v = e.id as usize;
            if labels[v] == -1 && e.dist < reach[v] {
                obs(v, reach[v], e.dist);
                reach[v] = e.dist;
                heap.push(Reverse(QueueEntry {
                    priority: e.dist + input.density[v],
                    node: v as u32,
                    pred: u as u32,
                }));
            }
        }
    };

    for &q in &order {
        let q = q as usize;
        if labels[q] >= 0 {
            continue;
        }
        labels[q] = next_label;
        obs.seed(q, next_label);
        next_label += 1;
        push(q, &labels, &mut reach, &mut heap, &mut |v, o, w| {
            obs.reach_update(v, o, w)
        });

        while let Some(Reverse(entry)) = heap.pop() {
            let x = entry.node as usize;
            let p = entry.pred as usize;
            if labels[x] >= 0 {
                obs.pop(x, p, true);
                continue;
            }
            obs.pop(x, p, false);
            let pred_label = labels[p];
            let eligible = input
                .check_list(x)
                .iter()
                .any(|e| labels[e.id as usize] == pred_label);
            if eligible {
                labels[x] = pred_label;
            } else {
                labels[x] = next_label;
                next_label += 1;
            }
            push(x, &labels, &mut reach, &mut heap, &mut |v, o, w| {
                obs.reach_update(v, o, w)
            });
        }
    }
    Labeling::from_dense(labels, next_label as usize)
}
