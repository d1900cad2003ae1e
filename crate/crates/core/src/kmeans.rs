//! Lloyd's k-means with k-means++ seeding over flat row-major point sets.
//!
//! Shared by the histogram dictionary and by k-means anchor selection.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{MfdhError, Result};

pub const MAX_ITERS: usize = 100;

/// Squared Euclidean distance.
#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest center; ties go to the lowest index.
pub fn nearest(point: &[f64], centers: &[f64], dim: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.chunks_exact(dim).enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Result of a k-means run. `centers` is `k * dim`, row-major.
#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub centers: Vec<f64>,
    pub assignment: Vec<usize>,
    pub iterations: usize,
}

pub fn fit(points: &[f64], dim: usize, k: usize, seed: u64) -> Result<KMeansFit> {
    if dim == 0 {
        return Err(MfdhError::invalid("k-means: point dimension must be >= 1"));
    }
    if points.is_empty() {
        return Err(MfdhError::invalid("k-means: empty input"));
    }
    if !points.len().is_multiple_of(dim) {
        return Err(MfdhError::invalid("k-means: ragged point buffer"));
    }
    let n = points.len() / dim;
    if k == 0 {
        return Err(MfdhError::invalid("k-means: k must be >= 1"));
    }
    if n < k {
        return Err(MfdhError::invalid(format!(
            "k-means: {n} points cannot form {k} clusters"
        )));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(MfdhError::invalid("k-means: non-finite coordinate"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = seed_plus_plus(points, dim, n, k, &mut rng);
    let mut assignment = vec![usize::MAX; n];
    let mut iterations = 0;

    for iter in 0..MAX_ITERS {
        iterations = iter + 1;
        let mut changed = false;
        let mut dists = vec![0.0; n];
        for (i, p) in points.chunks_exact(dim).enumerate() {
            let (j, d) = nearest(p, &centers, dim);
            dists[i] = d;
            if assignment[i] != j {
                assignment[i] = j;
                changed = true;
            }
        }

        let mut counts = vec![0usize; k];
        for &a in &assignment {
            counts[a] += 1;
        }
        // Repair empty clusters with the point farthest from its own center.
        for j in 0..k {
            if counts[j] > 0 {
                continue;
            }
            let far = (0..n)
                .filter(|&i| counts[assignment[i]] > 1)
                .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)));
            if let Some(i) = far {
                counts[assignment[i]] -= 1;
                assignment[i] = j;
                counts[j] = 1;
                dists[i] = 0.0;
                changed = true;
            }
        }

        if !changed {
            break;
        }

        let mut sums = vec![0.0; k * dim];
        for (i, p) in points.chunks_exact(dim).enumerate() {
            let a = assignment[i];
            for (s, v) in sums[a * dim..(a + 1) * dim].iter_mut().zip(p) {
                *s += v;
            }
        }
        for j in 0..k {
            if counts[j] == 0 {
                continue;
            }
            let inv = 1.0 / counts[j] as f64;
            for (c, s) in centers[j * dim..(j + 1) * dim]
                .iter_mut()
                .zip(&sums[j * dim..(j + 1) * dim])
            {
                *c = s * inv;
            }
        }
    }

    Ok(KMeansFit {
        centers,
        assignment,
        iterations,
    })
}

fn seed_plus_plus(points: &[f64], dim: usize, n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut centers = Vec::with_capacity(k * dim);
    let first = rng.random_range(0..n);
    centers.extend_from_slice(&points[first * dim..(first + 1) * dim]);

    let mut d2: Vec<f64> = points
        .chunks_exact(dim)
        .map(|p| sq_dist(p, &centers[..dim]))
        .collect();

    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 && total.is_finite() {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            // float round-off can walk past the end onto a zero-weight point
            while d2[chosen] <= 0.0 && chosen > 0 {
                chosen -= 1;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = &points[pick * dim..(pick + 1) * dim];
        centers.extend_from_slice(c);
        for (w, p) in d2.iter_mut().zip(points.chunks_exact(dim)) {
            let d = sq_dist(p, c);
            if d < *w {
                *w = d;
            }
        }
    }
    centers
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_clusters_on_a_line() {
        let pts = [0.0, 0.1, 10.0, 10.1];
        for seed in 0..20 {
            let fit = fit(&pts, 1, 2, seed).unwrap();
            let mut c = fit.centers.clone();
            c.sort_by(f64::total_cmp);
            assert!((c[0] - 0.05).abs() < 1e-12, "seed {seed}: {c:?}");
            assert!((c[1] - 10.05).abs() < 1e-12, "seed {seed}: {c:?}");
        }
    }

    #[test]
    fn duplicate_points_fill_every_cluster() {
        let pts = [1.0, 1.0, 1.0, 1.0, 2.0, 2.0];
        let fit = fit(&pts, 2, 3, 7).unwrap();
        let mut counts = [0; 3];
        for &a in &fit.assignment {
            counts[a] += 1;
        }
        assert!(counts.iter().all(|&c| c >= 1));
        assert!(fit.centers.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit(&[], 1, 1, 0).is_err());
        assert!(fit(&[1.0], 1, 2, 0).is_err());
        assert!(fit(&[1.0], 1, 0, 0).is_err());
        assert!(fit(&[f64::NAN], 1, 1, 0).is_err());
    }
}
