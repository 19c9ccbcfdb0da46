//! Dataset loading, unit-sphere normalization and random kernel feature maps.
//!
//! Points are held as a dense row-major `f64` matrix. File formats:
//!
//! - fvecs: `[i32 dim][f32 x dim]` repeated, little-endian
//! - CSV: comma-separated numeric fields, no quoting
//! - labels: one decimal integer per line

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Distance the dataset is meant to be clustered under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Cosine,
    L2,
    L1,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Cosine => "cosine",
            Metric::L2 => "l2",
            Metric::L1 => "l1",
        }
    }

    /// Distance between two rows. Cosine distance is `1 - cos(a, b)`; a
    /// zero-norm operand is treated as orthogonal to everything.
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Cosine => {
                let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
                for (x, y) in a.iter().zip(b) {
                    dot += x * y;
                    na += x * x;
                    nb += y * y;
                }
                if na == 0.0 || nb == 0.0 {
                    1.0
                } else {
                    1.0 - dot / (na.sqrt() * nb.sqrt())
                }
            }
            Metric::L2 => squared_l2(a, b).sqrt(),
            Metric::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cosine" => Ok(Metric::Cosine),
            "l2" => Ok(Metric::L2),
            "l1" => Ok(Metric::L1),
            other => Err(Error::Config(format!("unknown metric {other:?}"))),
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn squared_l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let t = x - y;
            t * t
        })
        .sum()
}

/// Dense `n x d` point matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<f64>,
    n: usize,
    d: usize,
    metric: Option<Metric>,
    normalized: bool,
}

impl Dataset {
    /// Wraps a row-major buffer of `n * d` values.
    pub fn new(points: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension("dimension must be at least 1".into()));
        }
        if points.is_empty() {
            return Err(Error::Empty);
        }
        if !points.len().is_multiple_of(d) {
            return Err(Error::Dimension(format!(
                "buffer of {} values is not a multiple of d = {d}",
                points.len()
            )));
        }
        if let Some(pos) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "non-finite value at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        let n = points.len() / d;
        Ok(Self {
            points,
            n,
            d,
            metric: None,
            normalized: false,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map(|r| r.as_ref().len()).ok_or(Error::Empty)?;
        let mut points = Vec::with_capacity(rows.len() * d);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != d {
                return Err(Error::Dimension(format!(
                    "row {i} has {} values, expected {d}",
                    r.len()
                )));
            }
            points.extend_from_slice(r);
        }
        Self::new(points, d)
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        if metric != Metric::Cosine {
            self.normalized = false;
        }
        self.metric = Some(metric);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn metric(&self) -> Option<Metric> {
        self.metric
    }

    /// True when every row is known to lie on the unit sphere.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.d)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Selects a subset of rows, keeping the metric and normalization flags.
    pub fn subset(&self, ids: &[usize]) -> Result<Self> {
        let mut points = Vec::with_capacity(ids.len() * self.d);
        for &i in ids {
            if i >= self.n {
                return Err(Error::Input(format!(
                    "row {i} out of range (n = {})",
                    self.n
                )));
            }
            points.extend_from_slice(self.row(i));
        }
        let mut out = Self::new(points, self.d)?;
        out.metric = self.metric;
        out.normalized = self.normalized;
        Ok(out)
    }

    pub(crate) fn mark_normalized(mut self) -> Self {
        self.metric = Some(Metric::Cosine);
        self.normalized = true;
        self
    }

    pub fn distance(&self, metric: Metric, a: usize, b: usize) -> f64 {
        metric.distance(self.row(a), self.row(b))
    }
}

/// Ground-truth cluster ids, one per point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    labels: Vec<usize>,
}

impl GroundTruth {
    pub fn new(labels: Vec<usize>) -> Self {
        Self { labels }
    }

    pub fn from_signed(labels: &[i64]) -> Result<Self> {
        let labels = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                usize::try_from(l).map_err(|_| {
                    Error::Input(format!(
                        "ground-truth label {l} at line {} is negative",
                        i + 1
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { labels })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn check_against(&self, ds: &Dataset) -> Result<()> {
        if self.labels.len() != ds.n() {
            return Err(Error::LengthMismatch {
                expected: ds.n(),
                actual: self.labels.len(),
            });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// fvecs

pub fn parse_fvecs(bytes: &[u8]) -> Result<Dataset> {
    if bytes.is_empty() {
        return Err(Error::Empty);
    }
    let mut offset = 0usize;
    let mut dim: Option<usize> = None;
    let mut points = Vec::new();
    while offset < bytes.len() {
        if bytes.len() - offset < 4 {
            return Err(Error::Format {
                offset: offset as u64,
                message: "truncated record header".into(),
            });
        }
        let raw = i32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap());
        if raw <= 0 {
            return Err(Error::Format {
                offset: offset as u64,
                message: format!("invalid record dimension {raw}"),
            });
        }
        let rd = raw as usize;
        match dim {
            None => dim = Some(rd),
            Some(d) if d != rd => {
                return Err(Error::Format {
                    offset: offset as u64,
                    message: format!(
                        "inconsistent dimension: first record has {d}, this record has {rd}"
                    ),
                })
            }
            _ => {}
        }
        let body = offset + 4;
        let end = body + 4 * rd;
        if end > bytes.len() {
            return Err(Error::Format {
                offset: offset as u64,
                message: format!(
                    "truncated record: needs {} bytes, {} available",
                    4 * rd,
                    bytes.len() - body
                ),
            });
        }
        points.extend(
            bytes[body..end]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64),
        );
        offset = end;
    }
    Dataset::new(points, dim.expect("at least one record parsed"))
}

pub fn load_fvecs(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_fvecs(&bytes)
}

/// Values are narrowed to `f32`.
pub fn encode_fvecs(ds: &Dataset) -> Vec<u8> {
    let mut out = Vec::with_capacity(ds.n() * (4 + 4 * ds.d()));
    for row in ds.rows() {
        out.extend_from_slice(&(ds.d() as i32).to_le_bytes());
        for &v in row {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

pub fn save_fvecs(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_fvecs(ds)).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// CSV

pub fn parse_csv(text: &str, has_header: bool) -> Result<Dataset> {
    let mut d: Option<usize> = None;
    let mut points = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if has_header && idx == 0 {
            continue;
        }
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut count = 0;
        for (col, field) in line.split(',').enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                column: col + 1,
                message: format!("non-numeric field {:?}", field.trim()),
            })?;
            points.push(v);
            count += 1;
        }
        match d {
            None => d = Some(count),
            Some(expected) if expected != count => {
                return Err(Error::Parse {
                    line: lineno,
                    column: count.min(expected) + 1,
                    message: format!("ragged row: {count} fields, expected {expected}"),
                })
            }
            _ => {}
        }
    }
    let d = d.ok_or(Error::Empty)?;
    Dataset::new(points, d)
}

pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, has_header)
}

/// Nine significant digits, enough to round-trip any `f32`.
fn format_value(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn encode_csv(ds: &Dataset) -> String {
    let mut out = String::with_capacity(ds.n() * ds.d() * 16);
    for row in ds.rows() {
        for (j, &v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format_value(v));
        }
        out.push('\n');
    }
    out
}

pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_csv(ds)).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// labels

pub fn parse_labels(text: &str) -> Result<Vec<i64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse::<i64>().map_err(|_| Error::Parse {
                line: i + 1,
                column: 1,
                message: format!("not an integer label: {:?}", l.trim()),
            })
        })
        .collect()
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<i64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_labels(&text)
}

pub fn load_ground_truth(path: impl AsRef<Path>) -> Result<GroundTruth> {
    GroundTruth::from_signed(&load_labels(path)?)
}

pub fn save_labels(labels: &[i32], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::with_capacity(labels.len() * 4);
    for l in labels {
        writeln!(out, "{l}").expect("writing to a Vec cannot fail");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// normalization and kernel features

pub fn normalize_unit(ds: &Dataset) -> Result<Dataset> {
    let mut points = Vec::with_capacity(ds.points.len());
    for (i, row) in ds.rows().enumerate() {
        let norm = dot(row, row).sqrt();
        if norm == 0.0 {
            return Err(Error::Precondition(format!("row {i} has zero norm")));
        }
        points.extend(row.iter().map(|v| v / norm));
    }
    Ok(Dataset::new(points, ds.d)?.mark_normalized())
}

/// Metrics that can be embedded into cosine similarity by random features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMetric {
    /// Gaussian kernel `exp(-|x-y|_2^2 / 2 sigma^2)`.
    L2,
    /// Laplacian kernel `exp(-|x-y|_1 / sigma)`.
    L1,
}

impl KernelMetric {
    pub fn metric(self) -> Metric {
        match self {
            KernelMetric::L2 => Metric::L2,
            KernelMetric::L1 => Metric::L1,
        }
    }

    pub fn from_metric(m: Metric) -> Option<Self> {
        match m {
            Metric::L2 => Some(KernelMetric::L2),
            Metric::L1 => Some(KernelMetric::L1),
            Metric::Cosine => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelFeatureConfig {
    pub target: KernelMetric,
    /// Number of (sin, cos) feature pairs; output dimension is `2 * dprime`.
    pub dprime: usize,
    pub sigma: f64,
    pub seed: u64,
}

impl KernelFeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::Config(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if self.dprime == 0 {
            return Err(Error::Config("dprime must be at least 1".into()));
        }
        Ok(())
    }
}

/// Random frequency matrix, `dprime x d`, row-major.
fn frequencies(cfg: &KernelFeatureConfig, d: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let scale = 1.0 / cfg.sigma;
    let len = cfg.dprime * d;
    match cfg.target {
        KernelMetric::L2 => {
            let dist = Normal::new(0.0, scale).expect("positive scale");
            (0..len).map(|_| dist.sample(&mut rng)).collect()
        }
        KernelMetric::L1 => {
            let dist = Cauchy::new(0.0, scale).expect("positive scale");
            (0..len).map(|_| dist.sample(&mut rng)).collect()
        }
    }
}

/// Random Fourier features `x -> (sin(w_i.x), cos(w_i.x))_i / sqrt(d')`, laid
/// out as interleaved pairs. Every output row lies on the unit sphere and the
/// result is tagged cosine.
pub fn kernel_map(ds: &Dataset, cfg: &KernelFeatureConfig) -> Result<Dataset> {
    cfg.validate()?;
    match ds.metric {
        Some(m) if m == cfg.target.metric() => {}
        other => {
            return Err(Error::Precondition(format!(
                "kernel map for {} requires a dataset tagged {}, found {}",
                cfg.target.metric(),
                cfg.target.metric(),
                other.map_or("none", Metric::as_str)
            )))
        }
    }
    let d = ds.d;
    let w = frequencies(cfg, d);
    let width = 2 * cfg.dprime;
    let scale = 1.0 / (cfg.dprime as f64).sqrt();
    let mut out = vec![0.0; ds.n * width];
    out.par_chunks_mut(width)
        .zip(ds.points.par_chunks(d))
        .for_each(|(dst, x)| {
            for (pair, wi) in dst.chunks_exact_mut(2).zip(w.chunks_exact(d)) {
                let (s, c) = dot(wi, x).sin_cos();
                pair[0] = s * scale;
                pair[1] = c * scale;
            }
        });
    Ok(Dataset::new(out, width)?.mark_normalized())
}

/// Mean pairwise distance over a uniform sample of at most `sample` rows.
pub fn mean_pairwise_distance(ds: &Dataset, metric: Metric, sample: usize, seed: u64) -> f64 {
    let take = sample.min(ds.n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids = index::sample(&mut rng, ds.n, take).into_vec();
    ids.sort_unstable();
    if ids.len() < 2 {
        return 0.0;
    }
    let total: f64 = (0..ids.len())
        .into_par_iter()
        .map(|a| {
            ids[a + 1..]
                .iter()
                .map(|&b| ds.distance(metric, ids[a], b))
                .sum::<f64>()
        })
        .sum();
    let pairs = ids.len() * (ids.len() - 1) / 2;
    total / pairs as f64
}

/// Default bandwidth: mean pairwise distance of a 1000-point sample.
pub fn default_sigma(ds: &Dataset, metric: KernelMetric, seed: u64) -> f64 {
    mean_pairwise_distance(ds, metric.metric(), 1000, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn fvecs_bytes(records: &[(i32, &[f32])]) -> Vec<u8> {
        let mut out = Vec::new();
        for (dim, vals) in records {
            out.extend_from_slice(&dim.to_le_bytes());
            for v in *vals {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    #[test]
    fn fvecs_two_records() {
        let bytes = fvecs_bytes(&[(2, &[1.0, 0.0]), (2, &[0.0, 1.0])]);
        let ds = parse_fvecs(&bytes).unwrap();
        assert_eq!((ds.n(), ds.d()), (2, 2));
        assert_eq!(ds.row(1), &[0.0, 1.0]);
        assert_eq!(ds.metric(), None);
    }

    #[test]
    fn fvecs_empty_is_error() {
        let err = parse_fvecs(&[]).unwrap_err();
        assert_eq!(err.to_string(), "no records");
    }

    #[test]
    fn fvecs_truncated_reports_offset() {
        let mut bytes = fvecs_bytes(&[(2, &[1.0, 0.0]), (2, &[0.0, 1.0])]);
        bytes.truncate(bytes.len() - 2);
        match parse_fvecs(&bytes).unwrap_err() {
            Error::Format { offset, .. } => assert_eq!(offset, 12),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn fvecs_inconsistent_dim_names_both() {
        let bytes = fvecs_bytes(&[(2, &[1.0, 0.0]), (3, &[0.0, 1.0, 2.0])]);
        let msg = parse_fvecs(&bytes).unwrap_err().to_string();
        assert!(msg.contains('2') && msg.contains('3'), "{msg}");
    }

    #[test]
    fn fvecs_random_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let vals: Vec<f64> = (0..800)
            .map(|_| (rng.random::<f32>() * 10.0 - 5.0) as f64)
            .collect();
        let ds = Dataset::new(vals, 8).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.fvecs");
        save_fvecs(&ds, &p).unwrap();
        let back = load_fvecs(&p).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn csv_basic_and_errors() {
        let ds = parse_csv("1,2\n3,4", false).unwrap();
        assert_eq!((ds.n(), ds.d()), (2, 2));
        assert_eq!(ds.points(), &[1.0, 2.0, 3.0, 4.0]);

        match parse_csv("a,b", false).unwrap_err() {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (1, 1)),
            e => panic!("unexpected {e}"),
        }
        assert!(matches!(
            parse_csv("1,2\n3", false),
            Err(Error::Parse { line: 2, .. })
        ));
        let with_header = parse_csv("x,y\n1,2\n", true).unwrap();
        assert_eq!(with_header.n(), 1);
    }

    #[test]
    fn csv_random_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let vals: Vec<f64> = (0..300).map(|_| rng.random_range(-1e3..1e3)).collect();
        let ds = Dataset::new(vals, 3).unwrap();
        let back = parse_csv(&encode_csv(&ds), false).unwrap();
        for (a, b) in ds.points().iter().zip(back.points()) {
            assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn normalize_examples() {
        let ds = Dataset::from_rows(&[[3.0, 4.0]]).unwrap();
        let u = normalize_unit(&ds).unwrap();
        assert!((u.row(0)[0] - 0.6).abs() < 1e-15 && (u.row(0)[1] - 0.8).abs() < 1e-15);
        assert_eq!(u.metric(), Some(Metric::Cosine));
        assert!(u.is_normalized());

        let again = normalize_unit(&u).unwrap();
        for (a, b) in u.points().iter().zip(again.points()) {
            assert!((a - b).abs() < 1e-12);
        }

        let zero = Dataset::from_rows(&[[1.0, 1.0], [0.0, 0.0]]).unwrap();
        let msg = normalize_unit(&zero).unwrap_err().to_string();
        assert!(msg.contains("row 1"), "{msg}");
    }

    #[test]
    fn normalize_random_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vals: Vec<f64> = (0..500).map(|_| rng.random_range(-2.0..2.0)).collect();
        let u = normalize_unit(&Dataset::new(vals, 10).unwrap()).unwrap();
        for r in u.rows() {
            assert!((dot(r, r).sqrt() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn kernel_map_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let vals: Vec<f64> = (0..40).map(|_| rng.random_range(-3.0..3.0)).collect();
        let ds = Dataset::new(vals, 4).unwrap().with_metric(Metric::L2);
        let cfg = KernelFeatureConfig {
            target: KernelMetric::L2,
            dprime: 64,
            sigma: 1.5,
            seed: 9,
        };
        let f = kernel_map(&ds, &cfg).unwrap();
        assert_eq!(f.d(), 128);
        assert_eq!(f.metric(), Some(Metric::Cosine));
        for r in f.rows() {
            assert!((dot(r, r) - 1.0).abs() < 1e-12);
        }
        // identical points map to identical features
        let twin = Dataset::from_rows(&[ds.row(0), ds.row(0)])
            .unwrap()
            .with_metric(Metric::L2);
        let ft = kernel_map(&twin, &cfg).unwrap();
        assert!((dot(ft.row(0), ft.row(1)) - 1.0).abs() < 1e-12);
        // seeded determinism
        assert_eq!(kernel_map(&ds, &cfg).unwrap(), f);
    }

    #[test]
    fn kernel_map_rejects_bad_config() {
        let ds = Dataset::from_rows(&[[1.0, 2.0]])
            .unwrap()
            .with_metric(Metric::L1);
        let mut cfg = KernelFeatureConfig {
            target: KernelMetric::L1,
            dprime: 4,
            sigma: 0.0,
            seed: 1,
        };
        assert!(matches!(kernel_map(&ds, &cfg), Err(Error::Config(_))));
        cfg.sigma = 1.0;
        cfg.target = KernelMetric::L2;
        assert!(matches!(kernel_map(&ds, &cfg), Err(Error::Precondition(_))));
    }

    #[test]
    fn mean_pairwise_distance_small() {
        let ds = Dataset::from_rows(&[[0.0, 0.0], [3.0, 4.0], [0.0, 4.0]]).unwrap();
        // pairs: 5, 4, 3
        assert!((mean_pairwise_distance(&ds, Metric::L2, 1000, 0) - 4.0).abs() < 1e-12);
        assert!((mean_pairwise_distance(&ds, Metric::L1, 1000, 0) - 14.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn labels_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("l.txt");
        save_labels(&[0, -1, 3], &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "0\n-1\n3\n");
        assert_eq!(load_labels(&p).unwrap(), vec![0, -1, 3]);
        assert!(load_ground_truth(&p).is_err());
    }
}
