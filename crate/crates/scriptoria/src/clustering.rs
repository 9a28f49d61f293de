//! Per-manuscript k-means clustering of glyph vectors.
//!
//! Lloyd iterations from seeded k-means++ initialization, squared Euclidean
//! distance, deterministic for a fixed seed (fixed reduction order for
//! centroid sums). Empty clusters are reseeded to the point farthest from its
//! centroid, so no cluster is ever left empty.

use std::collections::HashMap;
use std::hash::Hash;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::FeatureVector;

#[derive(Debug, Error)]
pub enum ClusteringError {
    #[error("k must be >= 1, got {0}")]
    KTooSmall(usize),
    #[error("k = {k} exceeds the number of vectors {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("max_iter must be >= 1")]
    NoIterations,
    #[error("tolerance must be >= 0 and finite")]
    BadTolerance,
    #[error("vectors have inconsistent dimensions ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("clustering has no glyphs")]
    Empty,
    #[error("gold label count {got} does not match glyph count {expected}")]
    LabelCountMismatch { expected: usize, got: usize },
}

/// Partition of one manuscript's glyphs into k clusters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Clustering {
    pub manuscript_id: String,
    pub k: usize,
    /// Glyph index (position in the input vector list) -> cluster id.
    pub assignment: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub counts: Vec<usize>,
    pub seed: u64,
    /// Within-cluster SSE after each Lloyd iteration; non-increasing.
    pub sse_trace: Vec<f64>,
}

/// Relative cluster frequencies of one manuscript; sums to 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterFrequencies {
    pub manuscript_id: String,
    pub freq: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// k-means++ initialization: first center uniform, then each next center
/// drawn with probability proportional to the squared distance to the nearest
/// chosen center. Points already coinciding with a center carry zero weight
/// and are never drawn.
fn kmeans_plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    centers.push(points[rng.random_range(0..n)].clone());

    let mut best = vec![f64::INFINITY; n];
    while centers.len() < k {
        let newest = centers.last().expect("nonempty");
        for (i, p) in points.iter().enumerate() {
            let d = sq_dist(p, newest);
            if d < best[i] {
                best[i] = d;
            }
        }
        let total: f64 = best.iter().sum();
        let next = if total > 0.0 {
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &w) in best.iter().enumerate() {
                acc += w;
                if acc > u {
                    chosen = Some(i);
                    break;
                }
            }
            // Rounding can leave u at the very top of the range.
            chosen.unwrap_or_else(|| {
                best.iter()
                    .rposition(|&w| w > 0.0)
                    .expect("total > 0 implies a positive weight")
            })
        } else {
            // All points coincide with existing centers; fall back to the
            // first point not already used as a center, if any.
            (0..n)
                .find(|&i| !centers.iter().any(|c| c == &points[i]))
                .unwrap_or(0)
        };
        centers.push(points[next].clone());
    }
    centers
}

/// Move one point into each empty cluster: among points whose cluster keeps
/// at least two members, take the one farthest from its centroid (ties:
/// lowest point index). The moved point becomes the empty cluster's centroid.
fn reseed_empty_clusters(
    points: &[Vec<f64>],
    assignment: &mut [usize],
    centroids: &mut [Vec<f64>],
    counts: &mut [usize],
) {
    loop {
        let empty = match counts.iter().position(|&c| c == 0) {
            Some(e) => e,
            None => return,
        };
        let mut donor: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            if counts[assignment[i]] < 2 {
                continue;
            }
            let d = sq_dist(p, &centroids[assignment[i]]);
            if donor.is_none_or(|(_, best)| d > best) {
                donor = Some((i, d));
            }
        }
        // With n >= k points some cluster always has >= 2 members while any
        // cluster is empty.
        let (idx, _) = donor.expect("donor point must exist");
        counts[assignment[idx]] -= 1;
        assignment[idx] = empty;
        counts[empty] = 1;
        centroids[empty] = points[idx].clone();
    }
}

/// Assignment, centroids, cluster counts and the per-iteration SSE trace.
pub type KmeansFit = (Vec<usize>, Vec<Vec<f64>>, Vec<usize>, Vec<f64>);

/// Seeded k-means over raw points.
pub fn kmeans(
    points: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<KmeansFit, ClusteringError> {
    if k == 0 {
        return Err(ClusteringError::KTooSmall(k));
    }
    if k > points.len() {
        return Err(ClusteringError::KTooLarge { k, n: points.len() });
    }
    if max_iter == 0 {
        return Err(ClusteringError::NoIterations);
    }
    if tol < 0.0 || !tol.is_finite() {
        return Err(ClusteringError::BadTolerance);
    }
    let dim = points[0].len();
    for p in points {
        if p.len() != dim {
            return Err(ClusteringError::DimensionMismatch(dim, p.len()));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_plus_plus(points, k, &mut rng);
    let mut assignment = vec![0usize; points.len()];
    let mut counts = vec![0usize; k];
    let mut sse_trace = Vec::new();

    for _ in 0..max_iter {
        // Assignment step; ties go to the lowest cluster id.
        counts.iter_mut().for_each(|c| *c = 0);
        for (i, p) in points.iter().enumerate() {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let d = sq_dist(p, centroid);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            assignment[i] = best;
            counts[best] += 1;
        }
        reseed_empty_clusters(points, &mut assignment, &mut centroids, &mut counts);

        // Update step: means in fixed point order.
        let mut sums = vec![vec![0.0f64; dim]; k];
        for (i, p) in points.iter().enumerate() {
            let s = &mut sums[assignment[i]];
            for (acc, v) in s.iter_mut().zip(p) {
                *acc += v;
            }
        }
        let mut movement: f64 = 0.0;
        for c in 0..k {
            let mut new_centroid = sums[c].clone();
            for v in &mut new_centroid {
                *v /= counts[c] as f64;
            }
            movement = movement.max(sq_dist(&new_centroid, &centroids[c]).sqrt());
            centroids[c] = new_centroid;
        }

        let sse: f64 = points
            .iter()
            .enumerate()
            .map(|(i, p)| sq_dist(p, &centroids[assignment[i]]))
            .sum();
        sse_trace.push(sse);

        if movement < tol {
            break;
        }
    }
    Ok((assignment, centroids, counts, sse_trace))
}

impl Clustering {
    /// Cluster one manuscript's feature vectors. The vectors are taken in the
    /// order given; glyph index in the assignment refers to that order.
    pub fn fit(
        manuscript_id: &str,
        vectors: &[FeatureVector],
        k: usize,
        seed: u64,
        max_iter: usize,
        tol: f64,
    ) -> Result<Self, ClusteringError> {
        let points: Vec<Vec<f64>> = vectors.iter().map(|v| v.values.clone()).collect();
        let (assignment, centroids, counts, sse_trace) = kmeans(&points, k, seed, max_iter, tol)?;
        Ok(Self {
            manuscript_id: manuscript_id.to_string(),
            k,
            assignment,
            centroids,
            counts,
            seed,
            sse_trace,
        })
    }

    pub fn total_glyphs(&self) -> usize {
        self.assignment.len()
    }
}

/// Relative frequency of each cluster: counts / total glyph count.
pub fn cluster_frequencies(c: &Clustering) -> Result<ClusterFrequencies, ClusteringError> {
    let total: usize = c.counts.iter().sum();
    if total == 0 {
        return Err(ClusteringError::Empty);
    }
    Ok(ClusterFrequencies {
        manuscript_id: c.manuscript_id.clone(),
        freq: c.counts.iter().map(|&n| n as f64 / total as f64).collect(),
    })
}

/// Purity against gold labels: for each cluster take its majority label's
/// count, sum over clusters, divide by the total glyph count.
pub fn cluster_purity<L: Eq + Hash>(
    c: &Clustering,
    gold_labels: &[L],
) -> Result<f64, ClusteringError> {
    if gold_labels.len() != c.assignment.len() {
        return Err(ClusteringError::LabelCountMismatch {
            expected: c.assignment.len(),
            got: gold_labels.len(),
        });
    }
    if c.assignment.is_empty() {
        return Err(ClusteringError::Empty);
    }
    let mut per_cluster: Vec<HashMap<&L, usize>> = (0..c.k).map(|_| HashMap::new()).collect();
    for (i, &cl) in c.assignment.iter().enumerate() {
        *per_cluster[cl].entry(&gold_labels[i]).or_insert(0) += 1;
    }
    let majority_sum: usize = per_cluster
        .iter()
        .map(|m| m.values().copied().max().unwrap_or(0))
        .sum();
    Ok(majority_sum as f64 / c.assignment.len() as f64)
}
