use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use vdc_core::ceos::knn_from_neighborhood;
use vdc_core::data_io::{
    default_sigma, load_ground_truth, load_labels, parse_csv, parse_fvecs, save_labels,
};
use vdc_core::graph::GraphKind;
use vdc_core::metrics::{evaluate, NoisePolicy, Scores};
use vdc_core::propagation::{
    ping, ping_from_neighborhoods, ping_with_index, prepare_for_ceos, Backend, CheckSet, DnpParams,
    PingConfig, PingOutput, Propagator,
};
use vdc_core::{
    exact_knn_for, CeosIndex, CeosParams, Dataset, GroundTruth, KernelFeatureConfig, KernelMetric,
    Labeling, Metric,
};

use crate::report::{ms, Fingerprint, RunReport, ScoreBlock};
use crate::sweep::Sweep;
use crate::{
    Algo, BackendKind, BenchArgs, CeosArgs, Check, ClusterArgs, EvalArgs, Failure, Format,
    IndexArgs, InputArgs, KernelArgs, PropagationArgs,
};

const DEFAULT_DPRIME: usize = 256;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn runtime(msg: impl Into<String>) -> Failure {
    Failure::Runtime(msg.into())
}

/// The kernel features get their own stream so they never share random
/// numbers with the index.
fn kernel_seed(seed: u64) -> u64 {
    seed.wrapping_add(1)
}

struct Loaded {
    ds: Dataset,
    fingerprint: Fingerprint,
}

fn load_input(a: &InputArgs) -> Result<Loaded, Failure> {
    let format = a
        .format
        .unwrap_or_else(|| match a.input.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("fvecs") => Format::Fvecs,
            _ => Format::Csv,
        });
    let raw = fs::read(&a.input)
        .map_err(|e| runtime(format!("cannot read {}: {e}", a.input.display())))?;
    let ds = match format {
        Format::Fvecs => parse_fvecs(&raw)?,
        Format::Csv => {
            let text = std::str::from_utf8(&raw)
                .map_err(|e| runtime(format!("{}: {e}", a.input.display())))?;
            parse_csv(text, a.header)?
        }
    }
    .with_metric(a.metric);
    let fingerprint = Fingerprint::new(&ds, &raw);
    Ok(Loaded { ds, fingerprint })
}

fn check_kernel_flags(metric: Metric, k: &KernelArgs) -> Result<(), Failure> {
    if metric == Metric::Cosine && (k.sigma.is_some() || k.dprime.is_some()) {
        return Err(usage(
            "--sigma and --dprime apply to l2 and l1 data only, not cosine",
        ));
    }
    if let Some(s) = k.sigma {
        if !(s > 0.0 && s.is_finite()) {
            return Err(usage(format!("--sigma must be positive, got {s}")));
        }
    }
    if k.dprime == Some(0) {
        return Err(usage("--dprime must be at least 1"));
    }
    Ok(())
}

/// Unit vectors for the CEOs index, plus the kernel settings that produced
/// them.
fn prepare(
    ds: &Dataset,
    k: &KernelArgs,
    seed: u64,
) -> Result<(Dataset, Option<KernelFeatureConfig>), Failure> {
    let metric = ds.metric().expect("input is always tagged");
    let Some(target) = KernelMetric::from_metric(metric) else {
        return Ok((prepare_for_ceos(ds, None)?, None));
    };
    let sigma = match k.sigma {
        Some(s) => s,
        None => default_sigma(ds, target, seed),
    };
    if !(sigma > 0.0) {
        return Err(runtime("mean pairwise distance is zero; pass --sigma"));
    }
    let cfg = KernelFeatureConfig {
        target,
        dprime: k.dprime.unwrap_or(DEFAULT_DPRIME),
        sigma,
        seed: kernel_seed(seed),
    };
    Ok((prepare_for_ceos(ds, Some(&cfg))?, Some(cfg)))
}

fn ceos_params(
    projections: Option<usize>,
    s: usize,
    m: usize,
    n: usize,
    seed: u64,
) -> Result<CeosParams, Failure> {
    let p = CeosParams::new(
        projections.unwrap_or_else(|| CeosParams::default_projections(n)),
        s,
        m,
        seed,
    );
    p.validate().map_err(|e| usage(e.to_string()))?;
    Ok(p)
}

fn note_kernel(report: &mut RunReport, kernel: Option<&KernelFeatureConfig>) {
    if let Some(cfg) = kernel {
        report.param("sigma", cfg.sigma).param("dprime", cfg.dprime);
        report.seeds.insert("kernel", cfg.seed);
    }
}

fn note_ceos(report: &mut RunReport, p: &CeosParams) {
    report
        .param("D", p.projections)
        .param("s", p.top_s)
        .param("m", p.bucket_cap);
    report.seeds.insert("index", p.seed_r);
}

pub fn index(a: IndexArgs) -> Result<(), Failure> {
    check_kernel_flags(a.input.metric, &a.kernel)?;
    let CeosArgs { projections, s, m } = a.ceos;
    let loaded = load_input(&a.input)?;
    let params = ceos_params(projections, s, m, loaded.ds.n(), a.seed)?;

    let t = Instant::now();
    let (prepared, kernel) = prepare(&loaded.ds, &a.kernel, a.seed)?;
    let idx = CeosIndex::build(&prepared, params)?;
    let elapsed = t.elapsed();
    idx.save(&a.out)?;

    let stats = idx.stats();
    let mut report = RunReport::new("index", loaded.fingerprint);
    report.param("metric", a.input.metric.as_str());
    note_ceos(&mut report, &params);
    note_kernel(&mut report, kernel.as_ref());
    report.timings_ms.index = ms(elapsed);
    report.extra.insert(
        "index_stats",
        json!({
            "buckets": stats.buckets,
            "non_empty": stats.non_empty,
            "total_entries": stats.total_entries,
            "max_bucket": stats.max_bucket,
            "mean_non_empty": stats.total_entries as f64 / stats.non_empty.max(1) as f64,
        }),
    );
    println!("{}", report.to_json());
    Ok(())
}

fn check_propagation(p: &PropagationArgs, k: usize) -> Result<(), Failure> {
    if k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    if p.c == 0 {
        return Err(usage("--c must be at least 1"));
    }
    if let Some(kp) = p.kp {
        if kp == 0 || kp > k {
            return Err(usage(format!(
                "--kp must satisfy 1 <= kp <= k, got kp = {kp}, k = {k}"
            )));
        }
    }
    if p.lpa_iters == 0 {
        return Err(usage("--lpa-iters must be at least 1"));
    }
    Ok(())
}

fn dnp_params(k: usize, c: usize, kp: Option<usize>) -> Result<DnpParams, Failure> {
    match kp {
        Some(kp) => DnpParams::with_k_prime(k, kp),
        None => DnpParams::new(k, c),
    }
    .map_err(|e| usage(e.to_string()))
}

fn propagator(
    algo: Algo,
    c: usize,
    kp: Option<usize>,
    p: &PropagationArgs,
    seed: u64,
) -> Propagator {
    match algo {
        Algo::Dnp => Propagator::Dnp {
            c,
            k_prime: kp,
            check: match p.check {
                Check::Stored => CheckSet::Stored,
                Check::Topk => CheckSet::TopK,
            },
        },
        Algo::Lpa => Propagator::Lpa {
            max_iters: p.lpa_iters,
            seed,
        },
        Algo::Louvain => Propagator::Louvain { seed },
    }
}

fn warn_mutual_dnp(algo: Option<Algo>, graph: GraphKind) {
    if algo == Some(Algo::Dnp) && graph == GraphKind::Mutual {
        eprintln!("warning: DNP is meant for symmetric graphs or CEOs lists; running it on the mutual graph");
    }
}

fn load_truth(path: &Path, n: usize) -> Result<GroundTruth, Failure> {
    let truth = load_ground_truth(path)?;
    if truth.len() != n {
        return Err(runtime(format!(
            "length mismatch: {} points but {} truth labels in {}",
            n,
            truth.len(),
            path.display()
        )));
    }
    Ok(truth)
}

fn propagation_params(
    report: &mut RunReport,
    algo: Algo,
    k: usize,
    c: usize,
    kp: Option<usize>,
    p: &PropagationArgs,
) {
    report
        .param("algo", format!("{algo:?}").to_lowercase())
        .param("graph", p.graph.as_str())
        .param("k", k);
    match algo {
        Algo::Dnp => {
            let k_prime = dnp_params(k, c, kp).map(|d| d.k_prime()).unwrap_or(0);
            report.param("c", c).param("k_prime", k_prime);
            report.param("check", format!("{:?}", p.check).to_lowercase());
        }
        Algo::Lpa => {
            report.param("lpa_iters", p.lpa_iters);
        }
        Algo::Louvain => {}
    }
}

pub fn cluster(a: ClusterArgs) -> Result<(), Failure> {
    check_propagation(&a.prop, a.prop.k)?;
    dnp_params(a.prop.k, a.prop.c, a.prop.kp)?;
    if a.backend == BackendKind::Exact {
        if a.index.is_some() {
            return Err(usage("--index needs --backend ceos"));
        }
        if a.kernel.sigma.is_some() || a.kernel.dprime.is_some() {
            eprintln!("warning: --sigma and --dprime only affect the ceos backend");
        }
    }
    check_kernel_flags(a.input.metric, &a.kernel)?;
    warn_mutual_dnp(Some(a.algo), a.prop.graph);

    let loaded = load_input(&a.input)?;
    let ds = &loaded.ds;
    let truth = a
        .truth
        .as_deref()
        .map(|p| load_truth(p, ds.n()))
        .transpose()?;
    let mut cfg = PingConfig {
        k: a.prop.k,
        graph: a.prop.graph,
        backend: Backend::Exact {
            metric: a.input.metric,
        },
        propagator: propagator(a.algo, a.prop.c, a.prop.kp, &a.prop, a.seed),
        keep_graph: a.dump_graph.is_some(),
    };

    let mut report = RunReport::new("cluster", loaded.fingerprint.clone());
    report
        .param("backend", format!("{:?}", a.backend).to_lowercase())
        .param("metric", a.input.metric.as_str());
    propagation_params(&mut report, a.algo, a.prop.k, a.prop.c, a.prop.kp, &a.prop);
    if matches!(a.algo, Algo::Lpa | Algo::Louvain) {
        report.seeds.insert("propagation", a.seed);
    }

    let out: PingOutput = match a.backend {
        BackendKind::Exact => ping(ds, &cfg)?,
        BackendKind::Ceos => {
            let t = Instant::now();
            let (prepared, kernel) = prepare(ds, &a.kernel, a.seed)?;
            let idx = match &a.index {
                Some(path) => {
                    let idx = CeosIndex::load(path)?;
                    if idx.n() != prepared.n() || idx.d() != prepared.d() {
                        return Err(runtime(format!(
                            "index holds {} points of dimension {}, prepared data has {} of dimension {}",
                            idx.n(),
                            idx.d(),
                            prepared.n(),
                            prepared.d()
                        )));
                    }
                    report.param("index", path.display().to_string());
                    idx
                }
                None => CeosIndex::build(
                    &prepared,
                    ceos_params(a.ceos.projections, a.ceos.s, a.ceos.m, ds.n(), a.seed)?,
                )?,
            };
            report.timings_ms.index = ms(t.elapsed());
            note_ceos(&mut report, idx.params());
            note_kernel(&mut report, kernel.as_ref());
            cfg.backend = Backend::Ceos {
                params: *idx.params(),
                kernel,
            };
            ping_with_index(&prepared, &idx, &cfg)?
        }
    };

    save_labels(out.labeling.labels(), &a.out)?;
    if let Some(path) = &a.dump_graph {
        let g = out.graph.as_ref().expect("graph kept on request");
        let file = File::create(path)
            .map_err(|e| runtime(format!("cannot create {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        g.write_dump(&mut w)
            .and_then(|()| w.flush())
            .map_err(|e| runtime(format!("writing {}: {e}", path.display())))?;
    }

    report.timings_ms.find_knn = ms(out.timings.find_knn);
    report.timings_ms.build_graph = ms(out.timings.build_graph);
    report.timings_ms.propagation = ms(out.timings.propagation);
    report.clusters = Some(out.labeling.n_clusters());
    report.noise = Some(out.labeling.noise_count());
    report.extra.insert("short_lists", out.short_lists.into());
    if let Some(q) = out.modularity {
        report.extra.insert("modularity", q.into());
    }
    if let Some(truth) = &truth {
        let scores = evaluate(out.labeling.labels(), truth.labels(), a.noise)?;
        report.scores = Some(ScoreBlock::from(&scores));
        report.param("noise", noise_name(a.noise));
    }
    println!("{}", report.to_json());
    Ok(())
}

fn noise_name(p: NoisePolicy) -> &'static str {
    match p {
        NoisePolicy::OwnCluster => "own-cluster",
        NoisePolicy::Exclude => "exclude",
    }
}

fn scores_json(s: &Scores) -> Value {
    json!({
        "ami": s.ami,
        "nmi": s.nmi,
        "ari": s.ari,
        "clusters_pred": s.clusters_pred,
        "clusters_true": s.clusters_true,
        "noise": s.noise,
    })
}

pub fn eval(a: EvalArgs) -> Result<(), Failure> {
    let pred = Labeling::compact(&load_labels(&a.pred)?);
    let truth = load_ground_truth(&a.truth)?;
    if pred.len() != truth.len() {
        return Err(runtime(format!(
            "length mismatch: {} predicted labels, {} truth labels",
            pred.len(),
            truth.len()
        )));
    }
    let scores = evaluate(pred.labels(), truth.labels(), a.noise)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&scores_json(&scores)).expect("json")
    );
    Ok(())
}

/// Brute-force top-`k` id sets for the oracle queries.
struct RecallOracle {
    queries: Vec<usize>,
    truth: Vec<HashSet<u32>>,
    k: usize,
}

impl RecallOracle {
    fn new(prepared: &Dataset, k: usize, sample: usize, seed: u64) -> Result<Self, Failure> {
        let n = prepared.n();
        let queries = if sample == 0 || sample >= n {
            (0..n).collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut q = index::sample(&mut rng, n, sample).into_vec();
            q.sort_unstable();
            q
        };
        let lists = exact_knn_for(prepared, &queries, k, Metric::Cosine)?;
        let truth = lists
            .iter()
            .map(|l| l.iter().map(|e| e.id).collect())
            .collect();
        Ok(Self { queries, truth, k })
    }

    fn recall(&self, nls: &[vdc_core::NeighborList]) -> f64 {
        let hits: usize = self
            .queries
            .iter()
            .zip(&self.truth)
            .map(|(&q, want)| {
                knn_from_neighborhood(&nls[q], self.k)
                    .entries
                    .iter()
                    .filter(|e| want.contains(&e.id))
                    .count()
            })
            .sum();
        hits as f64 / (self.queries.len() * self.k) as f64
    }
}

const CSV_COLUMNS: [&str; 16] = [
    "D",
    "s",
    "m",
    "k",
    "c",
    "k_prime",
    "index_ms",
    "find_knn_ms",
    "build_graph_ms",
    "propagation_ms",
    "recall",
    "clusters",
    "noise",
    "ami",
    "nmi",
    "ari",
];

pub fn bench(a: BenchArgs) -> Result<(), Failure> {
    let sweep = Sweep::parse(&a.sweep).map_err(usage)?;
    check_kernel_flags(a.input.metric, &a.kernel)?;
    if a.recall_k == 0 {
        return Err(usage("--recall-k must be at least 1"));
    }
    let points = sweep.points();
    for p in &points {
        let k = p.get("k").copied().unwrap_or(a.prop.k);
        check_propagation(&a.prop, k)?;
        if let Some(kp) = p.get("kp").copied().or(a.prop.kp) {
            if kp == 0 || kp > k {
                return Err(usage(format!("kp = {kp} out of range for k = {k}")));
            }
        }
    }
    warn_mutual_dnp(a.algo, a.prop.graph);

    let loaded = load_input(&a.input)?;
    let n = loaded.ds.n();
    if a.oracle && a.recall_k >= n {
        return Err(usage(format!("--recall-k must be below n = {n}")));
    }
    let truth = a.truth.as_deref().map(|p| load_truth(p, n)).transpose()?;

    let t = Instant::now();
    let (prepared, kernel) = prepare(&loaded.ds, &a.kernel, a.seed)?;
    let prepare_time = t.elapsed();
    let oracle = if a.oracle {
        Some(RecallOracle::new(
            &prepared,
            a.recall_k,
            a.oracle_queries,
            a.seed,
        )?)
    } else {
        None
    };

    let mut cached: Option<(CeosParams, CeosIndex, Duration)> = None;
    let mut rows = Vec::with_capacity(points.len());
    for p in &points {
        let params = ceos_params(
            p.get("D").copied().or(a.ceos.projections),
            p.get("s").copied().unwrap_or(a.ceos.s),
            p.get("m").copied().unwrap_or(a.ceos.m),
            n,
            a.seed,
        )?;
        if cached.as_ref().is_none_or(|(cp, _, _)| *cp != params) {
            let t = Instant::now();
            let idx = CeosIndex::build(&prepared, params)?;
            cached = Some((params, idx, t.elapsed() + prepare_time));
        }
        let (_, idx, index_time) = cached.as_ref().expect("index cached above");

        let t = Instant::now();
        let nls = idx.query_all(&prepared)?;
        let find_knn = t.elapsed();
        let recall = oracle.as_ref().map(|o| o.recall(&nls));

        let k = p.get("k").copied().unwrap_or(a.prop.k);
        let c = p.get("c").copied().unwrap_or(a.prop.c);
        let kp = p.get("kp").copied().or(a.prop.kp);
        let mut row = json!({
            "D": params.projections,
            "s": params.top_s,
            "m": params.bucket_cap,
            "k": k,
            "recall": recall,
            "timings_ms": {"index": ms(*index_time), "find_knn": ms(find_knn), "build_graph": 0.0, "propagation": 0.0},
        });
        if let Some(algo) = a.algo {
            let cfg = PingConfig {
                k,
                graph: a.prop.graph,
                backend: Backend::Ceos { params, kernel },
                propagator: propagator(algo, c, kp, &a.prop, a.seed),
                keep_graph: false,
            };
            let out = ping_from_neighborhoods(nls, &cfg)?;
            row["algo"] = json!(format!("{algo:?}").to_lowercase());
            if algo == Algo::Dnp {
                row["c"] = json!(c);
                row["k_prime"] = json!(dnp_params(k, c, kp)?.k_prime());
            }
            row["timings_ms"]["build_graph"] = json!(ms(out.timings.build_graph));
            row["timings_ms"]["propagation"] = json!(ms(out.timings.propagation));
            row["clusters"] = json!(out.labeling.n_clusters());
            row["noise"] = json!(out.labeling.noise_count());
            if let Some(truth) = &truth {
                let s = evaluate(out.labeling.labels(), truth.labels(), a.noise)?;
                row["scores"] = json!(ScoreBlock::from(&s));
            }
        }
        rows.push(row);
    }

    if a.csv {
        println!("{}", CSV_COLUMNS.join(","));
        for r in &rows {
            println!("{}", csv_row(r));
        }
        return Ok(());
    }
    let mut report = RunReport::new("bench", loaded.fingerprint);
    report
        .param("sweep", a.sweep.as_str())
        .param("metric", a.input.metric.as_str());
    report.param("oracle", a.oracle);
    if a.oracle {
        report.param("recall_k", a.recall_k);
        report.param(
            "oracle_queries",
            oracle.as_ref().map_or(0, |o| o.queries.len()),
        );
    }
    if let Some(algo) = a.algo {
        report
            .param("algo", format!("{algo:?}").to_lowercase())
            .param("graph", a.prop.graph.as_str());
    }
    report.seeds.insert("index", a.seed);
    note_kernel(&mut report, kernel.as_ref());
    report.timings_ms.index = ms(prepare_time);
    report.extra.insert("rows", Value::Array(rows));
    println!("{}", report.to_json());
    Ok(())
}

fn csv_row(r: &Value) -> String {
    let cell = |v: &Value| match v {
        Value::Null => String::new(),
        other => other.to_string(),
    };
    let t = &r["timings_ms"];
    let s = &r["scores"];
    [
        cell(&r["D"]),
        cell(&r["s"]),
        cell(&r["m"]),
        cell(&r["k"]),
        cell(&r["c"]),
        cell(&r["k_prime"]),
        cell(&t["index"]),
        cell(&t["find_knn"]),
        cell(&t["build_graph"]),
        cell(&t["propagation"]),
        cell(&r["recall"]),
        cell(&r["clusters"]),
        cell(&r["noise"]),
        cell(&s["ami"]),
        cell(&s["nmi"]),
        cell(&s["ari"]),
    ]
    .join(",")
}
