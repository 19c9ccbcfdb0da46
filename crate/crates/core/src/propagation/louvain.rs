//! Weighted Louvain modularity optimization.
//!
//! Edge distances are turned into non-negative similarities first; modularity
//! then runs on those weights.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Labeling;
use crate::data_io::Metric;
use crate::error::{Error, Result};
use crate::graph::KnnGraph;

// gains below this are treated as zero so float noise cannot cycle moves
const MIN_GAIN: f64 = 1e-12;
const MAX_SWEEPS_PER_LEVEL: usize = 1000;

/// Distance-to-similarity conversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Similarity {
    /// `max(0, 1 - d)`, for cosine distances.
    OneMinus,
    /// `exp(-d / mean edge distance)`.
    Exponential,
}

impl Similarity {
    pub fn for_metric(m: Metric) -> Self {
        match m {
            Metric::Cosine => Similarity::OneMinus,
            Metric::L2 | Metric::L1 => Similarity::Exponential,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LouvainResult {
    pub labeling: Labeling,
    /// Modularity after each aggregation level, starting with the singleton
    /// partition.
    pub level_modularity: Vec<f64>,
}

/// Weighted graph with explicit self-loops. `self_loop[u]` holds the sum of
/// ordered internal pairs, so degrees and modularity stay consistent across
/// aggregation.
struct WeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
    self_loop: Vec<f64>,
}

impl WeightedGraph {
    fn n(&self) -> usize {
        self.adj.len()
    }

    fn degrees(&self) -> Vec<f64> {
        self.adj
            .iter()
            .zip(&self.self_loop)
            .map(|(l, s)| s + l.iter().map(|e| e.1).sum::<f64>())
            .collect()
    }

    fn modularity(&self, comm: &[usize]) -> f64 {
        let deg = self.degrees();
        let two_m: f64 = deg.iter().sum();
        if two_m <= 0.0 {
            return 0.0;
        }
        let c = comm.iter().max().map_or(0, |m| m + 1);
        let mut inside = vec![0.0; c];
        let mut tot = vec![0.0; c];
        for u in 0..self.n() {
            tot[comm[u]] += deg[u];
            inside[comm[u]] += self.self_loop[u];
            for &(v, w) in &self.adj[u] {
                if comm[v] == comm[u] {
                    inside[comm[u]] += w;
                }
            }
        }
        inside
            .iter()
            .zip(&tot)
            .map(|(i, t)| i / two_m - (t / two_m).powi(2))
            .sum()
    }

    fn aggregate(&self, comm: &[usize], c: usize) -> WeightedGraph {
        let mut self_loop = vec![0.0; c];
        let mut maps: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); c];
        for u in 0..self.n() {
            let cu = comm[u];
            self_loop[cu] += self.self_loop[u];
            for &(v, w) in &self.adj[u] {
                let cv = comm[v];
                if cu == cv {
                    self_loop[cu] += w;
                } else {
                    *maps[cu].entry(cv).or_insert(0.0) += w;
                }
            }
        }
        WeightedGraph {
            adj: maps.into_iter().map(|m| m.into_iter().collect()).collect(),
            self_loop,
        }
    }
}

fn similarity_graph(g: &KnnGraph, sim: Similarity) -> Result<WeightedGraph> {
    let scale = match sim {
        Similarity::OneMinus => 1.0,
        Similarity::Exponential => {
            let (sum, count) = g.edges().fold((0.0, 0usize), |(s, c), e| (s + e.2, c + 1));
            if count == 0 || sum <= 0.0 {
                1.0
            } else {
                sum / count as f64
            }
        }
    };
    let adj = g
        .adjacency()
        .iter()
        .enumerate()
        .map(|(u, l)| {
            l.iter()
                .map(|e| {
                    let w = match sim {
                        Similarity::OneMinus => (1.0 - e.dist).max(0.0),
                        Similarity::Exponential => (-e.dist / scale).exp(),
                    };
                    if !(w >= 0.0) || !w.is_finite() {
                        return Err(Error::Input(format!(
                            "edge ({u}, {}) has invalid similarity {w}",
                            e.id
                        )));
                    }
                    Ok((e.id as usize, w))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightedGraph {
        self_loop: vec![0.0; adj.len()],
        adj,
    })
}

/// Modularity of a labeling (all labels `>= 0`) on the similarity-weighted
/// graph.
pub fn modularity(g: &KnnGraph, sim: Similarity, labels: &[i32]) -> Result<f64> {
    if labels.len() != g.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            actual: labels.len(),
        });
    }
    if labels.iter().any(|&l| l < 0) {
        return Err(Error::Input("modularity needs every node labeled".into()));
    }
    let wg = similarity_graph(g, sim)?;
    let comm: Vec<usize> = labels.iter().map(|&l| l as usize).collect();
    Ok(wg.modularity(&comm))
}

/// One local-moving phase. Returns the community of each node (renumbered
/// densely) and whether anything moved.
fn local_moving(wg: &WeightedGraph, rng: &mut ChaCha8Rng) -> (Vec<usize>, usize, bool) {
    let n = wg.n();
    let deg = wg.degrees();
    let two_m: f64 = deg.iter().sum();
    let mut comm: Vec<usize> = (0..n).collect();
    let mut tot = deg.clone();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut link = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut moved_any = false;
    if two_m > 0.0 {
        for _ in 0..MAX_SWEEPS_PER_LEVEL {
            let mut moved = false;
            for &u in &order {
                let cu = comm[u];
                touched.clear();
                for &(v, w) in &wg.adj[u] {
                    let cv = comm[v];
                    if link[cv] == 0.0 {
                        touched.push(cv);
                    }
                    link[cv] += w;
                }
                tot[cu] -= deg[u];
                let gain = |c: usize, l: f64| l - tot[c] * deg[u] / two_m;
                let stay = gain(cu, link[cu]);
                let (mut best, mut best_gain) = (cu, stay);
                touched.sort_unstable();
                touched.dedup();
                for &c in &touched {
                    let g = gain(c, link[c]);
                    if g > best_gain + MIN_GAIN {
                        best = c;
                        best_gain = g;
                    }
                }
                tot[best] += deg[u];
                if best != cu {
                    comm[u] = best;
                    moved = true;
                    moved_any = true;
                }
                for &c in &touched {
                    link[c] = 0.0;
                }
            }
            if !moved {
                break;
            }
        }
    }

    let mut remap = vec![usize::MAX; n];
    let mut c = 0;
    for x in comm.iter_mut() {
        if remap[*x] == usize::MAX {
            remap[*x] = c;
            c += 1;
        }
        *x = remap[*x];
    }
    (comm, c, moved_any)
}

/// Louvain with a seeded node order per level. Levels repeat until local
/// moving no longer changes anything.
pub fn louvain(g: &KnnGraph, sim: Similarity, seed: u64) -> Result<LouvainResult> {
    let n = g.n();
    let mut wg = similarity_graph(g, sim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut membership: Vec<usize> = (0..n).collect();
    let mut level_modularity = vec![wg.modularity(&(0..n).collect::<Vec<_>>())];
    loop {
        let (comm, c, moved) = local_moving(&wg, &mut rng);
        if !moved {
            break;
        }
        for m in membership.iter_mut() {
            *m = comm[*m];
        }
        wg = wg.aggregate(&comm, c);
        level_modularity.push(wg.modularity(&(0..c).collect::<Vec<_>>()));
    }
    let raw: Vec<i64> = membership.iter().map(|&m| m as i64).collect();
    Ok(LouvainResult {
        labeling: Labeling::compact(&raw),
        level_modularity,
    })
}
