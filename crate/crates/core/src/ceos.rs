//! CEOs neighborhood index.
//!
//! Two banks of `D` random directions `R` and `S` define `D²` composite
//! directions `z_ij = r_i + s_j`. Every point is hashed into the buckets of its
//! `s x s` best composite directions (top-`s` of each bank), each bucket keeps
//! the `m` points with the largest `x.r_i + x.s_j`, and a point's approximate
//! neighborhood is the union of the buckets of its top-`s` composite
//! directions. Insertion into neighborhoods is symmetric.
//!
//! Both banks come from structured spinners, so hashing a point costs
//! `O(D log D)`. When the input is wider than `D`, the spinner runs at the
//! next power of two above the input dimension and the bank keeps its first
//! `D` outputs.

use std::cmp::Ordering;
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::data_io::{dot, Dataset};
use crate::error::{Error, Result};
use crate::graph::{KnnEntry, KnnLists};
use crate::rp::StructuredSpinner;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CeosParams {
    /// Random directions per bank (`D`).
    pub projections: usize,
    /// Directions kept per bank and composite directions probed per query (`s`).
    pub top_s: usize,
    /// Bucket capacity (`m`).
    pub bucket_cap: usize,
    pub seed_r: u64,
    pub seed_s: u64,
}

impl CeosParams {
    pub fn new(projections: usize, top_s: usize, bucket_cap: usize, seed: u64) -> Self {
        Self {
            projections,
            top_s,
            bucket_cap,
            seed_r: seed,
            seed_s: seed.wrapping_add(0x9E37_79B9_7F4A_7C15),
        }
    }

    /// `D ≈ sqrt(n)` rounded to a power of two, at least 16.
    pub fn default_projections(n: usize) -> usize {
        ((n as f64).sqrt().round() as usize)
            .max(16)
            .next_power_of_two()
    }

    pub fn validate(&self) -> Result<()> {
        if self.projections == 0 {
            return Err(Error::Config("D must be at least 1".into()));
        }
        if self.top_s == 0 || self.top_s > self.projections {
            return Err(Error::Config(format!(
                "s must satisfy 1 <= s <= D, got s = {}, D = {}",
                self.top_s, self.projections
            )));
        }
        if self.bucket_cap == 0 {
            return Err(Error::Config("m must be at least 1".into()));
        }
        if self.projections > u32::MAX as usize {
            return Err(Error::Config("D too large".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    /// Truncate every bucket to `m` entries once all points are inserted.
    pub trim: bool,
    /// Bound bucket growth during insertion: a bucket reaching `4m` entries is
    /// cut back to its best `m`. The final index is unchanged.
    pub memory_cap: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            trim: true,
            memory_cap: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BucketEntry {
    pub id: u32,
    pub score: f32,
}

fn by_score_desc(a: &BucketEntry, b: &BucketEntry) -> Ordering {
    b.score.total_cmp(&a.score).then(a.id.cmp(&b.id))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub id: u32,
    pub dot: f32,
}

/// Approximate neighborhood `N(q)`: distinct ids, sorted by descending dot
/// product (ties by id), never containing the owner.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NeighborList {
    pub owner: u32,
    pub entries: Vec<Neighbor>,
}

impl NeighborList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, id: u32) -> bool {
        self.entries.iter().any(|e| e.id == id)
    }
}

/// Top-`k` of a neighborhood as cosine distances.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortKnn {
    pub entries: Vec<KnnEntry>,
    /// Fewer than `k` candidates were available.
    pub short: bool,
}

pub fn knn_from_neighborhood(nl: &NeighborList, k: usize) -> ShortKnn {
    let take = k.min(nl.entries.len());
    ShortKnn {
        entries: nl.entries[..take]
            .iter()
            .map(|e| KnnEntry {
                id: e.id,
                // f32 dots can overshoot 1 slightly
                dist: (1.0 - e.dot as f64).max(0.0),
            })
            .collect(),
        short: nl.entries.len() < k,
    }
}

/// Per-point top-`k` lists derived from CEOs neighborhoods, ready for graph
/// construction.
pub fn knn_lists_from_neighborhoods(nls: &[NeighborList], k: usize) -> KnnLists {
    let mut lists = Vec::with_capacity(nls.len());
    let mut short = Vec::with_capacity(nls.len());
    for nl in nls {
        let s = knn_from_neighborhood(nl, k);
        lists.push(s.entries);
        short.push(s.short);
    }
    KnnLists::from_parts(lists, k, short)
}

/// The `s` largest coordinates of `values`, ties to the smaller index, in
/// descending order.
pub(crate) fn top_s(values: &[f64], s: usize) -> Vec<(u32, f64)> {
    let cmp = |a: &(u32, f64), b: &(u32, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
    let mut idx: Vec<(u32, f64)> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| (i as u32, v))
        .collect();
    if s < idx.len() {
        idx.select_nth_unstable_by(s, cmp);
        idx.truncate(s);
    }
    idx.sort_unstable_by(cmp);
    idx
}

#[derive(Debug, Clone)]
struct Banks {
    r: StructuredSpinner,
    s: StructuredSpinner,
    projections: usize,
}

/// Per-point projection summary: best directions of each bank with their
/// projection values.
#[derive(Debug, Clone, PartialEq)]
pub struct TopDirections {
    pub r: Vec<(u32, f64)>,
    pub s: Vec<(u32, f64)>,
}

impl TopDirections {
    /// All `s²` composite buckets `(i, j)` with score `x.r_i + x.s_j`.
    pub fn composites(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.r
            .iter()
            .flat_map(move |&(i, pr)| self.s.iter().map(move |&(j, ps)| (i, j, pr + ps)))
    }

    /// The `count` best composite directions, ties by `(i, j)`.
    pub fn best_composites(&self, count: usize) -> Vec<(u32, u32, f64)> {
        let mut all: Vec<(u32, u32, f64)> = self.composites().collect();
        let cmp = |a: &(u32, u32, f64), b: &(u32, u32, f64)| {
            b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1)))
        };
        if count < all.len() {
            all.select_nth_unstable_by(count, cmp);
            all.truncate(count);
        }
        all.sort_unstable_by(cmp);
        all
    }
}

impl Banks {
    fn new(d: usize, p: &CeosParams) -> Result<Self> {
        Ok(Self {
            r: StructuredSpinner::covering(d, p.projections, p.seed_r)?,
            s: StructuredSpinner::covering(d, p.projections, p.seed_s)?,
            projections: p.projections,
        })
    }

    fn top(&self, x: &[f64], s: usize, scratch: &mut Vec<f64>) -> TopDirections {
        scratch.resize(self.r.dim(), 0.0);
        self.r
            .project_into(x, scratch)
            .expect("spinner covers input");
        let r = top_s(&scratch[..self.projections], s);
        self.s
            .project_into(x, scratch)
            .expect("spinner covers input");
        let sb = top_s(&scratch[..self.projections], s);
        TopDirections { r, s: sb }
    }
}

#[derive(Debug, Clone)]
pub struct CeosIndex {
    params: CeosParams,
    n: usize,
    d: usize,
    banks: Banks,
    buckets: Vec<Vec<BucketEntry>>,
}

impl CeosIndex {
    pub fn build(ds: &Dataset, params: CeosParams) -> Result<Self> {
        Self::build_with(ds, params, BuildOptions::default())
    }

    pub fn build_with(ds: &Dataset, params: CeosParams, opts: BuildOptions) -> Result<Self> {
        params.validate()?;
        if !ds.is_normalized() {
            return Err(Error::Precondition(
                "CEOs requires a dataset normalized to the unit sphere".into(),
            ));
        }
        if ds.n() > u32::MAX as usize {
            return Err(Error::Input("too many points for 32-bit ids".into()));
        }
        let banks = Banks::new(ds.d(), &params)?;
        let tops = compute_tops(ds, &banks, params.top_s);

        let big_d = params.projections;
        let cap = 4 * params.bucket_cap;
        let mut buckets: Vec<Vec<BucketEntry>> = vec![Vec::new(); big_d * big_d];
        for (id, t) in tops.iter().enumerate() {
            for (i, j, score) in t.composites() {
                let b = &mut buckets[i as usize * big_d + j as usize];
                b.push(BucketEntry {
                    id: id as u32,
                    score: score as f32,
                });
                if opts.memory_cap && b.len() >= cap {
                    b.sort_unstable_by(by_score_desc);
                    b.truncate(params.bucket_cap);
                }
            }
        }
        let m = params.bucket_cap;
        buckets.par_iter_mut().for_each(|b| {
            b.sort_unstable_by(by_score_desc);
            if opts.trim {
                b.truncate(m);
            }
        });
        Ok(Self {
            params,
            n: ds.n(),
            d: ds.d(),
            banks,
            buckets,
        })
    }

    pub fn params(&self) -> &CeosParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn bucket(&self, i: usize, j: usize) -> &[BucketEntry] {
        &self.buckets[i * self.params.projections + j]
    }

    pub fn buckets(&self) -> &[Vec<BucketEntry>] {
        &self.buckets
    }

    pub fn stats(&self) -> IndexStats {
        let sizes: Vec<usize> = self.buckets.iter().map(Vec::len).collect();
        let total: usize = sizes.iter().sum();
        let non_empty = sizes.iter().filter(|&&s| s > 0).count();
        let max = sizes.iter().copied().max().unwrap_or(0);
        let mut histogram = vec![0usize; max + 1];
        for &s in &sizes {
            histogram[s] += 1;
        }
        IndexStats {
            buckets: sizes.len(),
            non_empty,
            total_entries: total,
            max_bucket: max,
            histogram,
        }
    }

    /// Best directions of both banks for an arbitrary unit vector.
    pub fn top_directions(&self, x: &[f64]) -> Result<TopDirections> {
        if x.len() != self.d {
            return Err(Error::Dimension(format!(
                "query has dimension {}, index expects {}",
                x.len(),
                self.d
            )));
        }
        let mut scratch = Vec::new();
        Ok(self.banks.top(x, self.params.top_s, &mut scratch))
    }

    /// Approximate neighborhoods `N(q)` for every indexed point.
    pub fn query_all(&self, ds: &Dataset) -> Result<Vec<NeighborList>> {
        if ds.n() != self.n || ds.d() != self.d {
            return Err(Error::Input(format!(
                "dataset is {}x{}, index was built over {}x{}",
                ds.n(),
                ds.d(),
                self.n,
                self.d
            )));
        }
        let s = self.params.top_s;
        let big_d = self.params.projections;

        // forward candidates, sorted by id
        let forward: Vec<Vec<Neighbor>> = (0..self.n)
            .into_par_iter()
            .map_init(
                || (Vec::new(), Vec::new()),
                |(scratch, ids): &mut (Vec<f64>, Vec<u32>), q| {
                    let x = ds.row(q);
                    let tops = self.banks.top(x, s, scratch);
                    ids.clear();
                    for (i, j, _) in tops.best_composites(s) {
                        ids.extend(
                            self.buckets[i as usize * big_d + j as usize]
                                .iter()
                                .map(|e| e.id)
                                .filter(|&id| id as usize != q),
                        );
                    }
                    ids.sort_unstable();
                    ids.dedup();
                    ids.iter()
                        .map(|&id| Neighbor {
                            id,
                            dot: dot(x, ds.row(id as usize)) as f32,
                        })
                        .collect()
                },
            )
            .collect();

        // reverse insertions that the forward pass did not already produce
        let reverse: Vec<Vec<(u32, Neighbor)>> = forward
            .par_iter()
            .enumerate()
            .map(|(q, cands)| {
                cands
                    .iter()
                    .filter(|c| {
                        forward[c.id as usize]
                            .binary_search_by_key(&(q as u32), |e| e.id)
                            .is_err()
                    })
                    .map(|c| {
                        (
                            c.id,
                            Neighbor {
                                id: q as u32,
                                dot: c.dot,
                            },
                        )
                    })
                    .collect()
            })
            .collect();

        let mut lists = forward;
        for batch in reverse {
            for (target, nb) in batch {
                lists[target as usize].push(nb);
            }
        }
        Ok(lists
            .into_par_iter()
            .enumerate()
            .map(|(q, mut entries)| {
                entries.sort_unstable_by(|a, b| b.dot.total_cmp(&a.dot).then(a.id.cmp(&b.id)));
                NeighborList {
                    owner: q as u32,
                    entries,
                }
            })
            .collect())
    }

    pub fn write_to(&self, out: &mut impl Write) -> std::io::Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&FORMAT_VERSION.to_le_bytes())?;
        out.write_all(&(self.n as u64).to_le_bytes())?;
        out.write_all(&(self.d as u64).to_le_bytes())?;
        out.write_all(&(self.params.projections as u32).to_le_bytes())?;
        out.write_all(&(self.params.top_s as u32).to_le_bytes())?;
        out.write_all(&(self.params.bucket_cap as u32).to_le_bytes())?;
        out.write_all(&self.params.seed_r.to_le_bytes())?;
        out.write_all(&self.params.seed_s.to_le_bytes())?;
        let non_empty = self.buckets.iter().filter(|b| !b.is_empty()).count();
        out.write_all(&(non_empty as u64).to_le_bytes())?;
        let big_d = self.params.projections;
        for (idx, b) in self.buckets.iter().enumerate() {
            if b.is_empty() {
                continue;
            }
            out.write_all(&((idx / big_d) as u32).to_le_bytes())?;
            out.write_all(&((idx % big_d) as u32).to_le_bytes())?;
            out.write_all(&(b.len() as u32).to_le_bytes())?;
            for e in b {
                out.write_all(&e.id.to_le_bytes())?;
                out.write_all(&e.score.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out)
            .expect("writing to a Vec cannot fail");
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format {
                offset: 0,
                message: "bad magic, expected \"CEOS\"".into(),
            });
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format {
                offset: 4,
                message: format!("unsupported index version {version}"),
            });
        }
        let n = r.u64()? as usize;
        let d = r.u64()? as usize;
        let params = CeosParams {
            projections: r.u32()? as usize,
            top_s: r.u32()? as usize,
            bucket_cap: r.u32()? as usize,
            seed_r: r.u64()?,
            seed_s: r.u64()?,
        };
        params.validate()?;
        if d == 0 {
            return Err(Error::Format {
                offset: 12,
                message: "index dimension is zero".into(),
            });
        }
        let big_d = params.projections;
        let records = r.u64()?;
        let mut buckets = vec![Vec::new(); big_d * big_d];
        for _ in 0..records {
            let at = r.pos as u64;
            let (i, j, count) = (r.u32()? as usize, r.u32()? as usize, r.u32()? as usize);
            if i >= big_d || j >= big_d {
                return Err(Error::Format {
                    offset: at,
                    message: format!("bucket ({i}, {j}) outside a {big_d}x{big_d} table"),
                });
            }
            let b = &mut buckets[i * big_d + j];
            b.reserve(count);
            for _ in 0..count {
                let at = r.pos as u64;
                let id = r.u32()?;
                if id as usize >= n {
                    return Err(Error::Format {
                        offset: at,
                        message: format!("point id {id} out of range (n = {n})"),
                    });
                }
                b.push(BucketEntry {
                    id,
                    score: r.f32()?,
                });
            }
        }
        if r.pos != bytes.len() {
            return Err(Error::Format {
                offset: r.pos as u64,
                message: "trailing bytes after bucket table".into(),
            });
        }
        Ok(Self {
            banks: Banks::new(d, &params)?,
            params,
            n,
            d,
            buckets,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

const MAGIC: &[u8; 4] = b"CEOS";
const FORMAT_VERSION: u32 = 1;

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < len {
            return Err(Error::Format {
                offset: self.pos as u64,
                message: format!("truncated index: wanted {len} more bytes"),
            });
        }
        let s = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

fn compute_tops(ds: &Dataset, banks: &Banks, s: usize) -> Vec<TopDirections> {
    (0..ds.n())
        .into_par_iter()
        .map_init(Vec::new, |scratch, q| banks.top(ds.row(q), s, scratch))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexStats {
    pub buckets: usize,
    pub non_empty: usize,
    pub total_entries: usize,
    pub max_bucket: usize,
    /// `histogram[c]` = number of buckets holding exactly `c` entries.
    pub histogram: Vec<usize>,
}
