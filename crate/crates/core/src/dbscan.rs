//! Exact DBSCAN and the multi-level DBSCAN*_k, with brute-force range queries.
//! Both serve as reference clusterings; nothing here is meant to scale.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::data_io::{Dataset, Metric};
use crate::error::{Error, Result};
use crate::graph::KnnGraph;
use crate::propagation::Labeling;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbscanParams {
    pub eps: f64,
    pub min_pts: usize,
}

impl DbscanParams {
    pub fn new(eps: f64, min_pts: usize) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::Config(format!("eps must be positive, got {eps}")));
        }
        if min_pts == 0 {
            return Err(Error::Config("minPts must be at least 1".into()));
        }
        Ok(Self { eps, min_pts })
    }
}

/// One DBSCAN pass over the `active` subset. Labels are indexed like
/// `active`; cluster ids follow the smallest core id of each cluster.
struct Pass {
    labels: Vec<i32>,
    core: Vec<bool>,
    n_clusters: usize,
}

fn dbscan_pass(ds: &Dataset, active: &[usize], eps: f64, min_pts: usize, metric: Metric) -> Pass {
    let m = active.len();
    // closed balls, the point itself included
    let balls: Vec<Vec<u32>> = (0..m)
        .into_par_iter()
        .map(|a| {
            (0..m)
                .filter(|&b| ds.distance(metric, active[a], active[b]) <= eps)
                .map(|b| b as u32)
                .collect()
        })
        .collect();
    let core: Vec<bool> = balls.iter().map(|b| b.len() >= min_pts).collect();

    let mut labels = vec![-1i32; m];
    let mut next = 0i32;
    let mut queue = VecDeque::new();
    for seed in 0..m {
        if !core[seed] || labels[seed] >= 0 {
            continue;
        }
        labels[seed] = next;
        queue.push_back(seed);
        while let Some(u) = queue.pop_front() {
            for &v in &balls[u] {
                let v = v as usize;
                if core[v] && labels[v] < 0 {
                    labels[v] = next;
                    queue.push_back(v);
                }
            }
        }
        next += 1;
    }
    // borders: label of the smallest-id core neighbor
    for u in 0..m {
        if core[u] {
            continue;
        }
        if let Some(&c) = balls[u].iter().find(|&&v| core[v as usize]) {
            labels[u] = labels[c as usize];
        }
    }
    Pass {
        labels,
        core,
        n_clusters: next as usize,
    }
}

/// Textbook DBSCAN; `-1` marks noise.
pub fn dbscan(ds: &Dataset, p: &DbscanParams, metric: Metric) -> Labeling {
    let all: Vec<usize> = (0..ds.n()).collect();
    let pass = dbscan_pass(ds, &all, p.eps, p.min_pts, metric);
    Labeling::from_dense(pass.labels, pass.n_clusters)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbscanStarConfig {
    /// `minPts` at every level.
    pub k: usize,
    /// Radii in run order, strictly increasing (densest level first).
    pub eps_list: Vec<f64>,
}

impl DbscanStarConfig {
    pub fn new(k: usize, eps_list: Vec<f64>) -> Result<Self> {
        let cfg = Self { k, eps_list };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Radii from density levels `f` (any order) for `n` points in `d`
    /// dimensions.
    pub fn from_density_levels(k: usize, n: usize, d: usize, levels: &[f64]) -> Result<Self> {
        let mut eps = levels
            .iter()
            .map(|&f| eps_from_density(k, n, d, f))
            .collect::<Result<Vec<_>>>()?;
        eps.sort_by(f64::total_cmp);
        Self::new(k, eps)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.eps_list.is_empty() {
            return Err(Error::Config("DBSCAN* needs at least one radius".into()));
        }
        if self.eps_list.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
            return Err(Error::Config("radii must be positive and finite".into()));
        }
        if self.eps_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("radii must be strictly increasing".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbscanStarResult {
    pub labeling: Labeling,
    /// Index into `eps_list` of the level at which each point became core.
    pub core_level: Vec<Option<usize>>,
}

/// Runs DBSCAN with `(eps_i, k)` for increasing `eps_i`, each time on the
/// points that were not core at any earlier level. Cluster ids are allocated
/// level by level, then by smallest seed id. A point that is never core keeps
/// the first border assignment it received, so one level reproduces
/// [`dbscan`] exactly.
pub fn dbscan_star(
    ds: &Dataset,
    cfg: &DbscanStarConfig,
    metric: Metric,
) -> Result<DbscanStarResult> {
    cfg.validate()?;
    let n = ds.n();
    let mut labels = vec![-1i32; n];
    let mut core_level = vec![None; n];
    let mut active: Vec<usize> = (0..n).collect();
    let mut offset = 0i32;
    for (level, &eps) in cfg.eps_list.iter().enumerate() {
        if active.is_empty() {
            break;
        }
        let pass = dbscan_pass(ds, &active, eps, cfg.k, metric);
        for (local, &u) in active.iter().enumerate() {
            let l = pass.labels[local];
            if pass.core[local] {
                labels[u] = offset + l;
                core_level[u] = Some(level);
            } else if l >= 0 && labels[u] < 0 {
                labels[u] = offset + l;
            }
        }
        offset += pass.n_clusters as i32;
        active = active
            .iter()
            .zip(&pass.core)
            .filter(|(_, &c)| !c)
            .map(|(&u, _)| u)
            .collect();
    }
    Ok(DbscanStarResult {
        labeling: Labeling::from_dense(labels, offset as usize),
        core_level,
    })
}

/// `ln V_d`, the log-volume of the unit ball in `d` dimensions, by the
/// recurrence `V_d = V_{d-2} * 2 pi / d`.
pub fn ln_unit_ball_volume(d: usize) -> f64 {
    let mut v = if d.is_multiple_of(2) { 0.0 } else { 2f64.ln() };
    let mut i = if d.is_multiple_of(2) { 2 } else { 3 };
    while i <= d {
        v += (2.0 * PI / i as f64).ln();
        i += 2;
    }
    v
}

/// Radius at which a kNN ball holds density `f`: `(k / (n V_d f))^(1/d)`.
pub fn eps_from_density(k: usize, n: usize, d: usize, f: f64) -> Result<f64> {
    if k == 0 || n == 0 || d == 0 || !(f > 0.0) {
        return Err(Error::Config(format!(
            "eps_from_density needs positive inputs, got k={k}, n={n}, d={d}, f={f}"
        )));
    }
    let ln = (k as f64).ln() - (n as f64).ln() - ln_unit_ball_volume(d) - f.ln();
    Ok((ln / d as f64).exp())
}

/// kNN density estimate `k / (n V_d d_k^d)` from per-point `d_k`; zero
/// distances give `+inf`.
pub fn density_from_dk(dk: &[f64], k: usize, d: usize) -> Vec<f64> {
    let n = dk.len() as f64;
    let base = (k as f64).ln() - n.ln() - ln_unit_ball_volume(d);
    dk.iter()
        .map(|&r| {
            if r == 0.0 {
                f64::INFINITY
            } else {
                (base - d as f64 * r.ln()).exp()
            }
        })
        .collect()
}

/// [`density_from_dk`] with the graph's `k` and `d_k`.
pub fn knn_density(g: &KnnGraph, d: usize) -> Vec<f64> {
    density_from_dk(g.dk(), g.k(), d)
}
