//! Seeded synthetic datasets for tests, benchmarks and examples.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data_io::{Dataset, GroundTruth, Metric};

/// Isotropic 2-D Gaussian blobs, points grouped blob by blob. Tagged L2.
pub fn gaussian_blobs(
    centers: &[[f64; 2]],
    stds: &[f64],
    counts: &[usize],
    seed: u64,
) -> (Dataset, GroundTruth) {
    assert!(centers.len() == stds.len() && stds.len() == counts.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (c, ((center, &std), &count)) in centers.iter().zip(stds).zip(counts).enumerate() {
        for _ in 0..count {
            for &m in center {
                let z: f64 = StandardNormal.sample(&mut rng);
                points.push(m + std * z);
            }
            labels.push(c);
        }
    }
    let ds = Dataset::new(points, 2)
        .expect("non-empty blobs")
        .with_metric(Metric::L2);
    (ds, GroundTruth::new(labels))
}

/// Two unit-variance blobs whose centers are `separation` standard
/// deviations apart.
pub fn two_blobs(n: usize, separation: f64, seed: u64) -> (Dataset, GroundTruth) {
    let half = n / 2;
    gaussian_blobs(
        &[[0.0, 0.0], [separation, 0.0]],
        &[1.0, 1.0],
        &[half, n - half],
        seed,
    )
}

/// The classic interleaved half circles with Gaussian jitter. Tagged L2.
pub fn two_moons(n: usize, noise: f64, seed: u64) -> (Dataset, GroundTruth) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = n / 2;
    let mut points = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let upper = i < half;
        let t = rng.random::<f64>() * PI;
        let (x, y) = if upper {
            (t.cos(), t.sin())
        } else {
            (1.0 - t.cos(), 0.5 - t.sin())
        };
        let jx: f64 = StandardNormal.sample(&mut rng);
        let jy: f64 = StandardNormal.sample(&mut rng);
        points.push(x + noise * jx);
        points.push(y + noise * jy);
        labels.push(usize::from(!upper));
    }
    let ds = Dataset::new(points, 2)
        .expect("non-empty moons")
        .with_metric(Metric::L2);
    (ds, GroundTruth::new(labels))
}

/// `groups` random unit centers in `d` dimensions; every point is its center
/// plus Gaussian noise of scale `spread / sqrt(d)`, renormalized. Points are
/// assigned to groups round-robin. Tagged cosine.
pub fn clustered_unit_vectors(
    n: usize,
    d: usize,
    groups: usize,
    spread: f64,
    seed: u64,
) -> (Dataset, GroundTruth) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = |v: Vec<f64>| {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / norm).collect::<Vec<f64>>()
    };
    let centers: Vec<Vec<f64>> = (0..groups)
        .map(|_| unit((0..d).map(|_| StandardNormal.sample(&mut rng)).collect()))
        .collect();
    let scale = spread / (d as f64).sqrt();
    let mut points = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let g = i % groups;
        let v: Vec<f64> = centers[g]
            .iter()
            .map(|&c| {
                let z: f64 = StandardNormal.sample(&mut rng);
                c + scale * z
            })
            .collect();
        points.extend(unit(v));
        labels.push(g);
    }
    let ds = Dataset::new(points, d)
        .expect("non-empty")
        .with_metric(Metric::Cosine)
        .mark_normalized();
    (ds, GroundTruth::new(labels))
}

/// `side x side` grid with the given spacing, starting at the origin.
pub fn uniform_grid(side: usize, spacing: f64) -> Dataset {
    let mut points = Vec::with_capacity(2 * side * side);
    for i in 0..side {
        for j in 0..side {
            points.push(i as f64 * spacing);
            points.push(j as f64 * spacing);
        }
    }
    Dataset::new(points, 2)
        .expect("non-empty grid")
        .with_metric(Metric::L2)
}

/// Standard normal points in `d` dimensions. Tagged L2.
pub fn gaussian_cloud(n: usize, d: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n * d)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    Dataset::new(points, d)
        .expect("non-empty")
        .with_metric(Metric::L2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_labels() {
        let (ds, gt) = two_blobs(101, 10.0, 1);
        assert_eq!((ds.n(), ds.d(), gt.len()), (101, 2, 101));
        assert_eq!(gt.labels().iter().filter(|&&l| l == 1).count(), 51);
        let (ds, gt) = clustered_unit_vectors(50, 8, 5, 0.2, 2);
        assert_eq!(gt.labels()[7], 2);
        for r in ds.rows() {
            assert!((r.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(uniform_grid(3, 1.0).n(), 9);
        assert_eq!(two_moons(10, 0.0, 1).0.n(), 10);
        assert_eq!(two_blobs(20, 5.0, 3).0, two_blobs(20, 5.0, 3).0);
    }
}
