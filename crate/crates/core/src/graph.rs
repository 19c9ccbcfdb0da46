//! Exact kNN search and neighborhood graphs.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::data_io::{dot, squared_l2, Dataset, Metric};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnEntry {
    pub id: u32,
    pub dist: f64,
}

#[inline]
pub(crate) fn by_dist_then_id(a: &KnnEntry, b: &KnnEntry) -> Ordering {
    a.dist.total_cmp(&b.dist).then(a.id.cmp(&b.id))
}

/// Per-point neighbor lists sorted by `(distance, id)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnLists {
    lists: Vec<Vec<KnnEntry>>,
    k: usize,
    short: Vec<bool>,
}

impl KnnLists {
    /// Wraps raw lists, sorting each by `(distance, id)`. A list with fewer
    /// than `k` entries is flagged short.
    pub fn new(mut lists: Vec<Vec<KnnEntry>>, k: usize) -> Self {
        for l in &mut lists {
            l.sort_by(by_dist_then_id);
        }
        let short = lists.iter().map(|l| l.len() < k).collect();
        Self { lists, k, short }
    }

    pub(crate) fn from_parts(lists: Vec<Vec<KnnEntry>>, k: usize, short: Vec<bool>) -> Self {
        Self { lists, k, short }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.lists.len()
    }

    pub fn list(&self, q: usize) -> &[KnnEntry] {
        &self.lists[q]
    }

    pub fn lists(&self) -> &[Vec<KnnEntry>] {
        &self.lists
    }

    pub fn is_short(&self, q: usize) -> bool {
        self.short[q]
    }

    pub fn short_count(&self) -> usize {
        self.short.iter().filter(|&&s| s).count()
    }

    /// Distance to the `kk`-th neighbor, or to the farthest available one when
    /// the list is shorter. Empty lists give `+inf`.
    pub fn kth_distance(&self, q: usize, kk: usize) -> f64 {
        kth_or_last(self.lists[q].iter().map(|e| e.dist), kk)
    }
}

fn kth_or_last(dists: impl ExactSizeIterator<Item = f64>, kk: usize) -> f64 {
    let len = dists.len();
    if len == 0 {
        return f64::INFINITY;
    }
    let mut dists = dists;
    dists.nth(kk.clamp(1, len) - 1).unwrap()
}

/// Brute-force kNN, `O(n² d)`; ties go to the smaller id.
pub fn exact_knn(ds: &Dataset, k: usize, metric: Metric) -> Result<KnnLists> {
    let all: Vec<usize> = (0..ds.n()).collect();
    let lists = exact_knn_for(ds, &all, k, metric)?;
    Ok(KnnLists::from_parts(lists, k, vec![false; ds.n()]))
}

/// Brute-force kNN lists for the given query ids only.
pub fn exact_knn_for(
    ds: &Dataset,
    queries: &[usize],
    k: usize,
    metric: Metric,
) -> Result<Vec<Vec<KnnEntry>>> {
    let n = ds.n();
    if k == 0 || k >= n {
        return Err(Error::Config(format!(
            "k must satisfy 1 <= k < n, got k = {k}, n = {n}"
        )));
    }
    if let Some(&q) = queries.iter().find(|&&q| q >= n) {
        return Err(Error::Input(format!(
            "query id {q} out of range for {n} points"
        )));
    }
    let norms: Vec<f64> = match metric {
        Metric::Cosine => ds.rows().map(|r| dot(r, r).sqrt()).collect(),
        _ => Vec::new(),
    };
    let distance = |a: usize, b: usize| -> f64 {
        let (x, y) = (ds.row(a), ds.row(b));
        match metric {
            Metric::Cosine => {
                let denom = norms[a] * norms[b];
                if denom == 0.0 {
                    1.0
                } else {
                    1.0 - dot(x, y) / denom
                }
            }
            Metric::L2 => squared_l2(x, y).sqrt(),
            Metric::L1 => x.iter().zip(y).map(|(p, q)| (p - q).abs()).sum(),
        }
    };
    Ok(queries
        .par_iter()
        .map_init(Vec::new, |buf: &mut Vec<KnnEntry>, &q| {
            buf.clear();
            buf.extend((0..n).filter(|&o| o != q).map(|o| KnnEntry {
                id: o as u32,
                dist: distance(q, o),
            }));
            buf.select_nth_unstable_by(k - 1, by_dist_then_id);
            let mut top = buf[..k].to_vec();
            top.sort_unstable_by(by_dist_then_id);
            top
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphKind {
    /// Edge when both endpoints list each other.
    Mutual,
    /// Edge when either endpoint lists the other.
    Symmetric,
}

impl GraphKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphKind::Mutual => "mutual",
            GraphKind::Symmetric => "symmetric",
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mutual" => Ok(GraphKind::Mutual),
            "symmetric" => Ok(GraphKind::Symmetric),
            _ => Err(Error::Config(format!("unknown graph kind {s:?}"))),
        }
    }
}

/// Undirected weighted kNN graph. Adjacency lists hold `(neighbor, distance)`
/// sorted by `(distance, id)`; every edge is stored in both directions with
/// the same weight.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnGraph {
    n: usize,
    k: usize,
    kind: GraphKind,
    adjacency: Vec<Vec<KnnEntry>>,
    dk: Vec<f64>,
    short: Vec<bool>,
    list_dists: Vec<Vec<f64>>,
}

pub fn build_graph(lists: &KnnLists, kind: GraphKind) -> Result<KnnGraph> {
    let n = lists.n();
    for (u, l) in lists.lists().iter().enumerate() {
        let mut seen: Vec<u32> = Vec::with_capacity(l.len());
        for e in l {
            if e.id as usize >= n {
                return Err(Error::Input(format!(
                    "list {u} references unknown node {}",
                    e.id
                )));
            }
            if e.id as usize == u {
                return Err(Error::Input(format!("list {u} contains itself")));
            }
            if !(e.dist >= 0.0) {
                return Err(Error::Input(format!(
                    "list {u} has invalid distance {} to node {}",
                    e.dist, e.id
                )));
            }
            seen.push(e.id);
        }
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Input(format!("list {u} contains duplicate ids")));
        }
    }

    // (low, high, weight) once per listing; a pair listed from both sides
    // appears twice
    let mut edges: Vec<(u32, u32, f64)> = lists
        .lists()
        .iter()
        .enumerate()
        .flat_map(|(u, l)| {
            l.iter().map(move |e| {
                let u = u as u32;
                (u.min(e.id), u.max(e.id), e.dist)
            })
        })
        .collect();
    edges.par_sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));

    let mut adjacency: Vec<Vec<KnnEntry>> = vec![Vec::new(); n];
    let mut i = 0;
    while i < edges.len() {
        let (a, b, w) = edges[i];
        let mut j = i + 1;
        while j < edges.len() && edges[j].0 == a && edges[j].1 == b {
            j += 1;
        }
        let both_ways = j - i >= 2;
        if kind == GraphKind::Symmetric || both_ways {
            adjacency[a as usize].push(KnnEntry { id: b, dist: w });
            adjacency[b as usize].push(KnnEntry { id: a, dist: w });
        }
        i = j;
    }
    adjacency
        .par_iter_mut()
        .for_each(|l| l.sort_unstable_by(by_dist_then_id));

    let k = lists.k();
    let dk = (0..n).map(|q| lists.kth_distance(q, k)).collect();
    let short = (0..n).map(|q| lists.is_short(q)).collect();
    let list_dists = lists
        .lists()
        .iter()
        .map(|l| l.iter().map(|e| e.dist).collect())
        .collect();
    Ok(KnnGraph {
        n,
        k,
        kind,
        adjacency,
        dk,
        short,
        list_dists,
    })
}

impl KnnGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn neighbors(&self, u: usize) -> &[KnnEntry] {
        &self.adjacency[u]
    }

    pub fn adjacency(&self) -> &[Vec<KnnEntry>] {
        &self.adjacency
    }

    /// Distance to the `k`-th neighbor of each node (largest available when
    /// the node's list was short).
    pub fn dk(&self) -> &[f64] {
        &self.dk
    }

    pub fn is_short(&self, u: usize) -> bool {
        self.short[u]
    }

    /// Same as [`KnnGraph::dk`] for a smaller neighbor rank `kk`.
    pub fn dk_at(&self, kk: usize) -> Vec<f64> {
        self.list_dists
            .iter()
            .map(|d| kth_or_last(d.iter().copied(), kk))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Each undirected edge once, as `(u, v, weight)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, l)| {
            l.iter()
                .filter(move |e| (e.id as usize) > u)
                .map(move |e| (u as u32, e.id, e.dist))
        })
    }

    /// Debug dump: header `n k kind`, then `u v weight` per edge with `u < v`,
    /// ordered by `(u, v)`.
    pub fn write_dump(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "{} {} {}", self.n, self.k, self.kind)?;
        let mut edges: Vec<_> = self.edges().collect();
        edges.sort_unstable_by_key(|&(u, v, _)| (u, v));
        for (u, v, w) in edges {
            writeln!(out, "{u} {v} {w}")?;
        }
        Ok(())
    }
}

/// Component id per node, numbered in order of each component's smallest
/// node. Nodes outside `mask` get `-1` and do not connect anything.
pub fn connected_components(g: &KnnGraph, mask: Option<&[bool]>) -> Vec<i32> {
    let n = g.n();
    let inside = |u: usize| mask.is_none_or(|m| m[u]);
    let mut comp = vec![-1i32; n];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if comp[start] >= 0 || !inside(start) {
            continue;
        }
        comp[start] = next;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for e in g.neighbors(u) {
                let v = e.id as usize;
                if comp[v] < 0 && inside(v) {
                    comp[v] = next;
                    queue.push_back(v);
                }
            }
        }
        next += 1;
    }
    comp
}
