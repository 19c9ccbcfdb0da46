//! External clustering scores: NMI, AMI and ARI over a contingency table.
//! Natural logarithms throughout.

use std::collections::HashMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoisePolicy {
    /// Noise (`-1`) forms one extra predicted cluster.
    #[default]
    OwnCluster,
    /// Noise points are dropped from both partitions.
    Exclude,
}

impl std::str::FromStr for NoisePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "own-cluster" => Ok(NoisePolicy::OwnCluster),
            "exclude" => Ok(NoisePolicy::Exclude),
            other => Err(Error::Config(format!(
                "unknown noise policy '{other}', expected own-cluster or exclude"
            ))),
        }
    }
}

/// Rows are predicted clusters, columns are true classes, both in order of
/// first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let cols = counts.first().map_or(0, Vec::len);
        if counts.iter().any(|r| r.len() != cols) {
            return Err(Error::Input("contingency rows differ in length".into()));
        }
        let row_sums: Vec<u64> = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums: Vec<u64> = (0..cols)
            .map(|j| counts.iter().map(|r| r[j]).sum())
            .collect();
        let total = row_sums.iter().sum();
        Ok(Self {
            counts,
            row_sums,
            col_sums,
            total,
        })
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn transpose(&self) -> Self {
        let cols = self.col_sums.len();
        let counts = (0..cols)
            .map(|j| self.counts.iter().map(|r| r[j]).collect())
            .collect();
        Self {
            counts,
            row_sums: self.col_sums.clone(),
            col_sums: self.row_sums.clone(),
            total: self.total,
        }
    }

    /// Both partitions are the same up to renaming.
    fn is_identity_up_to_relabel(&self) -> bool {
        self.row_sums.len() == self.col_sums.len()
            && self
                .counts
                .iter()
                .all(|r| r.iter().filter(|&&c| c > 0).count() <= 1)
            && (0..self.col_sums.len())
                .all(|j| self.counts.iter().filter(|r| r[j] > 0).count() <= 1)
    }

    fn nonzero(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.counts.iter().enumerate().flat_map(|(i, r)| {
            r.iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(move |(j, &c)| (i, j, c))
        })
    }
}

pub fn contingency(pred: &[i32], truth: &[usize], noise: NoisePolicy) -> Result<ContingencyTable> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            expected: truth.len(),
            actual: pred.len(),
        });
    }
    let mut rows: HashMap<i32, usize> = HashMap::new();
    let mut cols: HashMap<usize, usize> = HashMap::new();
    let mut cells: Vec<(usize, usize)> = Vec::with_capacity(pred.len());
    for (&p, &t) in pred.iter().zip(truth) {
        if p < 0 && noise == NoisePolicy::Exclude {
            continue;
        }
        let p = p.max(-1);
        let next = rows.len();
        let i = *rows.entry(p).or_insert(next);
        let next = cols.len();
        let j = *cols.entry(t).or_insert(next);
        cells.push((i, j));
    }
    let mut counts = vec![vec![0u64; cols.len()]; rows.len()];
    for (i, j) in cells {
        counts[i][j] += 1;
    }
    ContingencyTable::from_counts(counts)
}

fn entropy(sums: &[u64], total: u64) -> f64 {
    let n = total as f64;
    sums.iter()
        .filter(|&&a| a > 0)
        .map(|&a| {
            let p = a as f64 / n;
            -p * p.ln()
        })
        .sum()
}

pub fn mutual_information(t: &ContingencyTable) -> f64 {
    let n = t.total as f64;
    t.nonzero()
        .map(|(i, j, c)| {
            let c = c as f64;
            c / n * (n * c / (t.row_sums[i] as f64 * t.col_sums[j] as f64)).ln()
        })
        .sum::<f64>()
        .max(0.0)
}

/// Entropy normalizer for NMI and AMI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalizer {
    #[default]
    Arithmetic,
    Max,
}

impl Normalizer {
    fn apply(self, hp: f64, ht: f64) -> f64 {
        match self {
            Normalizer::Arithmetic => 0.5 * (hp + ht),
            Normalizer::Max => hp.max(ht),
        }
    }
}

pub fn nmi(t: &ContingencyTable) -> f64 {
    let hp = entropy(&t.row_sums, t.total);
    let ht = entropy(&t.col_sums, t.total);
    let denom = Normalizer::Arithmetic.apply(hp, ht);
    if denom == 0.0 {
        // both partitions are a single cluster
        return 1.0;
    }
    (mutual_information(t) / denom).clamp(0.0, 1.0)
}

/// `ln(i!)` for `i = 0..=n`.
fn log_factorials(n: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..=n {
        acc += (i as f64).ln();
        out.push(acc);
    }
    out
}

/// Expected mutual information under the hypergeometric model of random
/// partitions with the table's marginals.
pub fn expected_mutual_information(t: &ContingencyTable) -> f64 {
    let n = t.total;
    if n == 0 {
        return 0.0;
    }
    let lf = log_factorials(n);
    let nf = n as f64;
    let mut emi = 0.0;
    for &a in &t.row_sums {
        for &b in &t.col_sums {
            let lo = (a + b).saturating_sub(n).max(1);
            let hi = a.min(b);
            // terms shared by every n_ij of this cell
            let fixed =
                lf[a as usize] + lf[b as usize] + lf[(n - a) as usize] + lf[(n - b) as usize]
                    - lf[n as usize];
            for nij in lo..=hi {
                let log_p = fixed
                    - lf[nij as usize]
                    - lf[(a - nij) as usize]
                    - lf[(b - nij) as usize]
                    - lf[(n + nij - a - b) as usize];
                let x = nij as f64;
                emi += x / nf * (nf * x / (a as f64 * b as f64)).ln() * log_p.exp();
            }
        }
    }
    emi
}

pub fn ami(t: &ContingencyTable) -> f64 {
    ami_with(t, Normalizer::Arithmetic)
}

/// Adjusted mutual information. A vanishing denominator scores 1 when the
/// partitions coincide and 0 otherwise.
pub fn ami_with(t: &ContingencyTable, norm: Normalizer) -> f64 {
    let hp = entropy(&t.row_sums, t.total);
    let ht = entropy(&t.col_sums, t.total);
    let mi = mutual_information(t);
    let emi = expected_mutual_information(t);
    let denom = norm.apply(hp, ht) - emi;
    if denom.abs() < 1e-15 {
        return if t.is_identity_up_to_relabel() {
            1.0
        } else {
            0.0
        };
    }
    ((mi - emi) / denom).min(1.0)
}

fn pairs(x: u64) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index. A vanishing denominator scores 1 when the partitions
/// coincide and 0 otherwise.
pub fn ari(t: &ContingencyTable) -> f64 {
    let sum_cells: f64 = t.nonzero().map(|(_, _, c)| pairs(c)).sum();
    let sum_rows: f64 = t.row_sums.iter().map(|&a| pairs(a)).sum();
    let sum_cols: f64 = t.col_sums.iter().map(|&b| pairs(b)).sum();
    let all = pairs(t.total);
    if all == 0.0 {
        return 1.0;
    }
    let expected = sum_rows * sum_cols / all;
    let max = 0.5 * (sum_rows + sum_cols);
    let denom = max - expected;
    if denom == 0.0 {
        return if t.is_identity_up_to_relabel() {
            1.0
        } else {
            0.0
        };
    }
    (sum_cells - expected) / denom
}

/// Everything the `eval` command reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub ami: f64,
    pub nmi: f64,
    pub ari: f64,
    pub clusters_pred: usize,
    pub clusters_true: usize,
    pub noise: usize,
}

pub fn evaluate(pred: &[i32], truth: &[usize], noise: NoisePolicy) -> Result<Scores> {
    let t = contingency(pred, truth, noise)?;
    let mut clusters_pred: Vec<i32> = pred.iter().copied().filter(|&l| l >= 0).collect();
    clusters_pred.sort_unstable();
    clusters_pred.dedup();
    let mut clusters_true = truth.to_vec();
    clusters_true.sort_unstable();
    clusters_true.dedup();
    Ok(Scores {
        ami: ami(&t),
        nmi: nmi(&t),
        ari: ari(&t),
        clusters_pred: clusters_pred.len(),
        clusters_true: clusters_true.len(),
        noise: pred.iter().filter(|&&l| l < 0).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(rows: &[&[u64]]) -> ContingencyTable {
        ContingencyTable::from_counts(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn random_labels(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
        (0..n).map(|_| rng.random_range(0..k)).collect()
    }

    fn as_pred(l: &[usize]) -> Vec<i32> {
        l.iter().map(|&x| x as i32).collect()
    }

    #[test]
    fn identical_partitions() {
        let t = contingency(&[0, 0, 1, 1], &[5, 5, 7, 7], NoisePolicy::OwnCluster).unwrap();
        assert_eq!(t.counts(), &[vec![2, 0], vec![0, 2]]);
        assert!((nmi(&t) - 1.0).abs() < 1e-12);
        assert!((ami(&t) - 1.0).abs() < 1e-12);
        assert!((ari(&t) - 1.0).abs() < 1e-12);
        let single = contingency(&[0, 0, 0], &[1, 1, 1], NoisePolicy::OwnCluster).unwrap();
        assert_eq!((nmi(&single), ami(&single), ari(&single)), (1.0, 1.0, 1.0));
    }

    #[test]
    fn noise_policies() {
        let t = contingency(&[-1, -1, -1], &[0, 1, 1], NoisePolicy::OwnCluster).unwrap();
        assert_eq!(t.counts(), &[vec![1, 2]]);
        let t = contingency(&[-1, 0, 0, 1], &[0, 0, 0, 1], NoisePolicy::Exclude).unwrap();
        assert_eq!(t.total(), 3);
        assert_eq!(ari(&t), 1.0);
        assert!(contingency(&[0], &[0, 1], NoisePolicy::OwnCluster).is_err());
    }

    #[test]
    fn table_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = random_labels(&mut rng, 200, 5);
        let q = random_labels(&mut rng, 200, 7);
        let t = contingency(&as_pred(&p), &q, NoisePolicy::OwnCluster).unwrap();
        // rows/cols are in first-appearance order
        let mut row_ids: Vec<usize> = Vec::new();
        let mut col_ids: Vec<usize> = Vec::new();
        for i in 0..200 {
            if !row_ids.contains(&p[i]) {
                row_ids.push(p[i]);
            }
            if !col_ids.contains(&q[i]) {
                col_ids.push(q[i]);
            }
        }
        for (r, &a) in row_ids.iter().enumerate() {
            for (c, &b) in col_ids.iter().enumerate() {
                let mut count = 0;
                for i in 0..200 {
                    if p[i] == a && q[i] == b {
                        count += 1;
                    }
                }
                assert_eq!(t.counts()[r][c], count);
            }
        }
    }

    #[test]
    fn hand_tables() {
        // [[5,1],[1,5]]: MI = (10/12) ln(10/6) + (2/12) ln(2/6), H = ln 2
        let t = table(&[&[5, 1], &[1, 5]]);
        let mi = 10.0 / 12.0 * (10.0f64 / 6.0).ln() + 2.0 / 12.0 * (2.0f64 / 6.0).ln();
        assert!((nmi(&t) - mi / 2f64.ln()).abs() < 1e-12);

        // [[2,1],[1,2]]: cells 1+0+0+1 = 2 pairs, rows 3+3, cols 3+3, all 15
        let t = table(&[&[2, 1], &[1, 2]]);
        let expected = 6.0 * 6.0 / 15.0;
        let want = (2.0 - expected) / (6.0 - expected);
        assert!((ari(&t) - want).abs() < 1e-12);
    }

    #[test]
    fn one_cluster_vs_singletons() {
        let n = 10;
        let t = contingency(
            &vec![0; n],
            &(0..n).collect::<Vec<_>>(),
            NoisePolicy::OwnCluster,
        )
        .unwrap();
        assert_eq!(ari(&t), 0.0);
        assert_eq!(nmi(&t), 0.0);
        assert!(ami(&t).abs() < 1e-12);
    }

    #[test]
    fn permutation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = random_labels(&mut rng, 300, 4);
        let q = random_labels(&mut rng, 300, 6);
        let t1 = contingency(&as_pred(&p), &q, NoisePolicy::OwnCluster).unwrap();
        let renamed: Vec<i32> = p.iter().map(|&x| [3, 0, 2, 1][x]).collect();
        let t2 = contingency(&renamed, &q, NoisePolicy::OwnCluster).unwrap();
        assert!((ami(&t1) - ami(&t2)).abs() < 1e-12);
        assert!((nmi(&t1) - nmi(&t2)).abs() < 1e-12);
        assert!((ari(&t1) - ari(&t2)).abs() < 1e-12);
    }

    #[test]
    fn chance_level_scores() {
        let mut ami_sum = 0.0;
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_labels(&mut rng, 1000, 8);
            let q = random_labels(&mut rng, 1000, 8);
            ami_sum += ami(&contingency(&as_pred(&p), &q, NoisePolicy::OwnCluster).unwrap());
        }
        assert!((ami_sum / 10.0).abs() <= 0.02);
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let p = random_labels(&mut rng, 10_000, 10);
            let q = random_labels(&mut rng, 10_000, 10);
            assert!(nmi(&contingency(&as_pred(&p), &q, NoisePolicy::OwnCluster).unwrap()) < 0.05);
        }
    }

    #[test]
    fn max_normalizer_bounds_arithmetic() {
        let t = table(&[&[5, 1, 0], &[1, 5, 3]]);
        assert!(ami_with(&t, Normalizer::Max) <= ami(&t) + 1e-12);
    }

    #[test]
    fn evaluate_reports_counts() {
        let s = evaluate(&[0, 0, 1, -1], &[0, 0, 1, 1], NoisePolicy::OwnCluster).unwrap();
        assert_eq!((s.clusters_pred, s.clusters_true, s.noise), (2, 2, 1));
    }

    fn partition_pair() -> impl Strategy<Value = (Vec<i32>, Vec<usize>)> {
        (2usize..120).prop_flat_map(|n| {
            (
                proptest::collection::vec(-1i32..6, n),
                proptest::collection::vec(0usize..5, n),
            )
        })
    }

    proptest! {
        #[test]
        fn bounds_and_symmetry((p, q) in partition_pair()) {
            let t = contingency(&p, &q, NoisePolicy::OwnCluster).unwrap();
            let (a, n, r) = (ami(&t), nmi(&t), ari(&t));
            prop_assert!(a <= 1.0 + 1e-12);
            prop_assert!((0.0..=1.0).contains(&n));
            prop_assert!(r <= 1.0 + 1e-12);
            let tt = t.transpose();
            prop_assert!((ami(&tt) - a).abs() < 1e-9);
            prop_assert!((nmi(&tt) - n).abs() < 1e-12);
            prop_assert!((ari(&tt) - r).abs() < 1e-12);
        }
    }
}
