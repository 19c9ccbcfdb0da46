//! Neighborhood search, graph construction and propagation in one call.

use std::time::{Duration, Instant};

use super::{dnp, louvain, lpa, CheckSet, DnpInput, DnpParams, Labeling, Similarity};
use crate::ceos::{knn_lists_from_neighborhoods, CeosIndex, CeosParams, NeighborList};
use crate::data_io::{kernel_map, normalize_unit, Dataset, KernelFeatureConfig, Metric};
use crate::error::{Error, Result};
use crate::graph::{build_graph, exact_knn, GraphKind, KnnGraph};

#[derive(Debug, Clone, PartialEq)]
pub enum Backend {
    /// Brute-force kNN under `metric`.
    Exact { metric: Metric },
    /// CEOs neighborhoods over unit vectors. With `kernel` set the data is
    /// first embedded by random Fourier features, otherwise it is normalized.
    Ceos {
        params: CeosParams,
        kernel: Option<KernelFeatureConfig>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Propagator {
    /// `k_prime` overrides `k / c` when set.
    Dnp {
        c: usize,
        k_prime: Option<usize>,
        check: CheckSet,
    },
    Lpa {
        max_iters: usize,
        seed: u64,
    },
    Louvain {
        seed: u64,
    },
}

impl Propagator {
    pub fn name(&self) -> &'static str {
        match self {
            Propagator::Dnp { .. } => "dnp",
            Propagator::Lpa { .. } => "lpa",
            Propagator::Louvain { .. } => "louvain",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PingConfig {
    pub k: usize,
    pub graph: GraphKind,
    pub backend: Backend,
    pub propagator: Propagator,
    /// Return the kNN graph in the output even when the propagator does not
    /// need one.
    pub keep_graph: bool,
}

/// Wall time per pipeline stage.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub find_knn: Duration,
    pub build_graph: Duration,
    pub propagation: Duration,
}

#[derive(Debug, Clone)]
pub struct PingOutput {
    pub labeling: Labeling,
    pub timings: StageTimings,
    pub graph: Option<KnnGraph>,
    /// Points whose candidate list held fewer than `k` neighbors.
    pub short_lists: usize,
    /// Final modularity, Louvain only.
    pub modularity: Option<f64>,
}

/// Unit-norm input for the CEOs backend.
pub fn prepare_for_ceos(ds: &Dataset, kernel: Option<&KernelFeatureConfig>) -> Result<Dataset> {
    match kernel {
        Some(cfg) => kernel_map(ds, cfg),
        None if ds.is_normalized() => Ok(ds.clone()),
        None => normalize_unit(ds),
    }
}

pub fn ping(ds: &Dataset, cfg: &PingConfig) -> Result<PingOutput> {
    if cfg.k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if ds.n() <= 1 {
        return Ok(trivial(ds.n()));
    }
    match &cfg.backend {
        Backend::Exact { metric } => {
            let t0 = Instant::now();
            let lists = exact_knn(ds, cfg.k, *metric)?;
            let find_knn = t0.elapsed();
            let t1 = Instant::now();
            let g = build_graph(&lists, cfg.graph)?;
            let build = t1.elapsed();
            propagate_on_graph(g, cfg, Similarity::for_metric(*metric), find_knn, build)
        }
        Backend::Ceos { params, kernel } => {
            let t0 = Instant::now();
            let prepared = prepare_for_ceos(ds, kernel.as_ref())?;
            let index = CeosIndex::build(&prepared, *params)?;
            let mut out = ping_with_index(&prepared, &index, cfg)?;
            // preparation and index build count toward neighborhood search
            out.timings.find_knn = t0.elapsed() - out.timings.build_graph - out.timings.propagation;
            Ok(out)
        }
    }
}

/// CEOs pipeline over an already prepared dataset and a built (or loaded)
/// index. `cfg.backend` is ignored.
pub fn ping_with_index(
    prepared: &Dataset,
    index: &CeosIndex,
    cfg: &PingConfig,
) -> Result<PingOutput> {
    if cfg.k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if prepared.n() <= 1 {
        return Ok(trivial(prepared.n()));
    }
    let t0 = Instant::now();
    let nls = index.query_all(prepared)?;
    let find_knn = t0.elapsed();
    let mut out = ping_from_neighborhoods(nls, cfg)?;
    out.timings.find_knn = find_knn;
    Ok(out)
}

/// Graph construction and propagation over already computed CEOs
/// neighborhoods. The reported `find_knn` time is zero.
pub fn ping_from_neighborhoods(nls: Vec<NeighborList>, cfg: &PingConfig) -> Result<PingOutput> {
    if cfg.k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if nls.len() <= 1 {
        return Ok(trivial(nls.len()));
    }
    let find_knn = Duration::ZERO;

    if let Propagator::Dnp { c, k_prime, check } = cfg.propagator {
        let t1 = Instant::now();
        let p = dnp_params(cfg.k, c, k_prime)?;
        let input = DnpInput::from_neighborhoods(&nls, &p, check);
        let short_lists = nls.iter().filter(|nl| nl.len() < cfg.k).count();
        let graph = if cfg.keep_graph {
            Some(build_graph(
                &knn_lists_from_neighborhoods(&nls, cfg.k),
                cfg.graph,
            )?)
        } else {
            None
        };
        drop(nls);
        let build = t1.elapsed();
        let t2 = Instant::now();
        let labeling = dnp(&input);
        return Ok(PingOutput {
            labeling,
            timings: StageTimings {
                find_knn,
                build_graph: build,
                propagation: t2.elapsed(),
            },
            graph,
            short_lists,
            modularity: None,
        });
    }

    let t1 = Instant::now();
    let lists = knn_lists_from_neighborhoods(&nls, cfg.k);
    drop(nls);
    let g = build_graph(&lists, cfg.graph)?;
    let build = t1.elapsed();
    propagate_on_graph(g, cfg, Similarity::OneMinus, find_knn, build)
}

fn propagate_on_graph(
    g: KnnGraph,
    cfg: &PingConfig,
    sim: Similarity,
    find_knn: Duration,
    build_graph: Duration,
) -> Result<PingOutput> {
    let t = Instant::now();
    let mut modularity = None;
    let labeling = match cfg.propagator {
        Propagator::Dnp { c, k_prime, .. } => {
            dnp(&DnpInput::from_graph(&g, &dnp_params(cfg.k, c, k_prime)?))
        }
        Propagator::Lpa { max_iters, seed } => lpa(&g, max_iters, seed)?,
        Propagator::Louvain { seed } => {
            let r = louvain(&g, sim, seed)?;
            modularity = r.level_modularity.last().copied();
            r.labeling
        }
    };
    let propagation = t.elapsed();
    let short_lists = (0..g.n()).filter(|&u| g.is_short(u)).count();
    Ok(PingOutput {
        labeling,
        timings: StageTimings {
            find_knn,
            build_graph,
            propagation,
        },
        graph: Some(g),
        short_lists,
        modularity,
    })
}

fn dnp_params(k: usize, c: usize, k_prime: Option<usize>) -> Result<DnpParams> {
    match k_prime {
        Some(kp) => DnpParams::with_k_prime(k, kp),
        None => DnpParams::new(k, c),
    }
}

fn trivial(n: usize) -> PingOutput {
    PingOutput {
        labeling: Labeling::from_dense(vec![0; n], n.min(1)),
        timings: StageTimings::default(),
        graph: None,
        short_lists: 0,
        modularity: None,
    }
}
