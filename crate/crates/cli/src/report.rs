//! JSON run reports.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use vdc_core::metrics::Scores;
use vdc_core::Dataset;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Fingerprint {
    pub n: usize,
    pub d: usize,
    pub metric: String,
    pub sha256: String,
}

impl Fingerprint {
    pub fn new(ds: &Dataset, raw: &[u8]) -> Self {
        Self {
            n: ds.n(),
            d: ds.d(),
            metric: ds.metric().map_or("none", |m| m.as_str()).to_string(),
            sha256: format!("{:x}", Sha256::digest(raw)),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub index: f64,
    pub find_knn: f64,
    pub build_graph: f64,
    pub propagation: f64,
}

pub fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoreBlock {
    pub ami: f64,
    pub nmi: f64,
    pub ari: f64,
}

impl From<&Scores> for ScoreBlock {
    fn from(s: &Scores) -> Self {
        Self {
            ami: s.ami,
            nmi: s.nmi,
            ari: s.ari,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub parameters: BTreeMap<&'static str, Value>,
    pub dataset: Fingerprint,
    pub timings_ms: Timings,
    pub scores: Option<ScoreBlock>,
    pub clusters: Option<usize>,
    pub noise: Option<usize>,
    pub seeds: BTreeMap<&'static str, u64>,
    /// Command-specific sections (`index_stats`, `rows`, ...).
    #[serde(flatten)]
    pub extra: BTreeMap<&'static str, Value>,
}

impl RunReport {
    pub fn new(command: &'static str, dataset: Fingerprint) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            parameters: BTreeMap::new(),
            dataset,
            timings_ms: Timings::default(),
            scores: None,
            clusters: None,
            noise: None,
            seeds: BTreeMap::new(),
            extra: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, key: &'static str, value: impl Into<Value>) -> &mut Self {
        self.parameters.insert(key, value.into());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
