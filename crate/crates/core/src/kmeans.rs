//! Seeded Lloyd's k-means with k-means++ starts, used to initialise samplers
//! and derive data-adaptive priors.

use rand::Rng;

use crate::error::{Error, Result};

pub const DEFAULT_ITERATIONS: usize = 50;
pub const DEFAULT_RESTARTS: usize = 10;

#[derive(Clone, Debug)]
pub struct KMeansFit {
    /// 0-based cluster label per row.
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub sse: f64,
    /// Number of times an empty cluster was re-seeded from a random row.
    pub reseeded: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(row: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, mu) in centroids.iter().enumerate() {
        let d = sq_dist(row, mu);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_init<R: Rng + ?Sized>(rows: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut centroids = vec![rows[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = rows.iter().map(|r| sq_dist(r, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, d) in d2.iter().enumerate() {
                if u < *d {
                    pick = i;
                    break;
                }
                u -= d;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centroids.push(rows[idx].clone());
        for (i, r) in rows.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(r, &centroids[centroids.len() - 1]));
        }
    }
    centroids
}

fn lloyd<R: Rng + ?Sized>(rows: &[Vec<f64>], k: usize, iterations: usize, rng: &mut R) -> KMeansFit {
    let p = rows[0].len();
    let mut centroids = plus_plus_init(rows, k, rng);
    let mut labels = vec![usize::MAX; rows.len()];
    let mut reseeded = 0;
    for _ in 0..iterations {
        let mut changed = false;
        for (i, r) in rows.iter().enumerate() {
            let (c, _) = nearest(r, &centroids);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        let mut sums = vec![vec![0.0; p]; k];
        let mut counts = vec![0usize; k];
        for (r, &c) in rows.iter().zip(&labels) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(r) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                let i = rng.random_range(0..rows.len());
                log::debug!("k-means: re-seeding empty cluster {c} from row {i}");
                centroids[c] = rows[i].clone();
                reseeded += 1;
                changed = true;
            } else {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        if !changed {
            break;
        }
    }
    for (i, r) in rows.iter().enumerate() {
        labels[i] = nearest(r, &centroids).0;
    }
    let sse = rows.iter().zip(&labels).map(|(r, &c)| sq_dist(r, &centroids[c])).sum();
    KMeansFit {
        labels,
        centroids,
        sse,
        reseeded,
    }
}

/// Best-of-`restarts` k-means by within-cluster sum of squares.
pub fn kmeans_with<R: Rng + ?Sized>(
    rows: &[Vec<f64>],
    k: usize,
    iterations: usize,
    restarts: usize,
    rng: &mut R,
) -> Result<KMeansFit> {
    if k == 0 {
        return Err(Error::arg("k-means needs k >= 1"));
    }
    if rows.len() < k {
        return Err(Error::arg(format!("k-means needs at least k={k} rows, got {}", rows.len())));
    }
    let p = rows[0].len();
    if p == 0 || rows.iter().any(|r| r.len() != p) {
        return Err(Error::shape("k-means rows must share a nonzero width"));
    }
    let mut best: Option<KMeansFit> = None;
    for _ in 0..restarts.max(1) {
        let fit = lloyd(rows, k, iterations.max(1), rng);
        if best.as_ref().is_none_or(|b| fit.sse < b.sse) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}

pub fn kmeans<R: Rng + ?Sized>(rows: &[Vec<f64>], k: usize, rng: &mut R) -> Result<KMeansFit> {
    kmeans_with(rows, k, DEFAULT_ITERATIONS, DEFAULT_RESTARTS, rng)
}

/// Count of distinct rows (exact comparison).
pub fn distinct_rows(rows: &[Vec<f64>]) -> usize {
    let mut keys: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|v| v.to_bits()).collect()).collect();
    keys.sort();
    keys.dedup();
    keys.len()
}
