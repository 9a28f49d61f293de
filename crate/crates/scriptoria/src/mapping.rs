//! Cross-manuscript cluster matching and the frequency-difference distance.
//!
//! Clusters of two manuscripts are matched one-to-one by maximizing total
//! centroid cosine similarity (a linear assignment problem on cost
//! 1 - similarity), the worst matches are discarded, and the distance is the
//! average absolute difference of relative cluster frequencies over the
//! retained matches.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::{ClusterFrequencies, Clustering};

#[derive(Debug, Error)]
pub enum MappingError {
    #[error("similarity matrix must be square and nonempty")]
    NotSquare,
    #[error("similarity matrix contains a non-finite entry at ({0},{1})")]
    NonFinite(usize, usize),
    #[error("centroid dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("cluster counts differ: {0} vs {1}")]
    KMismatch(usize, usize),
    #[error("no retained matches")]
    EmptyRetained,
    #[error("frequency vector length {got} does not match k = {expected}")]
    FrequencyLength { expected: usize, got: usize },
    #[error("need at least 2 manuscripts, got {0}")]
    TooFewManuscripts(usize),
    #[error("distance matrix is malformed: {0}")]
    BadMatrix(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Labeled symmetric nonnegative distance matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub labels: Vec<String>,
    /// Row-major `labels.len() x labels.len()` values.
    pub values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(labels: Vec<String>, values: Vec<f64>) -> Result<Self, MappingError> {
        let n = labels.len();
        if values.len() != n * n {
            return Err(MappingError::BadMatrix(format!(
                "expected {} values for {} labels, got {}",
                n * n,
                n,
                values.len()
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(MappingError::BadMatrix(format!(
                    "nonzero diagonal at {}",
                    labels[i]
                )));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(MappingError::BadMatrix(format!(
                        "invalid entry {v} at ({}, {})",
                        labels[i], labels[j]
                    )));
                }
                if (v - values[j * n + i]).abs() > 1e-12 {
                    return Err(MappingError::BadMatrix(format!(
                        "asymmetry at ({}, {})",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        Ok(Self { labels, values })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    /// Upper-triangle values in (row, col) order with row < col, paired with
    /// their label indices.
    pub fn upper_triangle(&self) -> Vec<(usize, usize, f64)> {
        let n = self.len();
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push((i, j, self.get(i, j)));
            }
        }
        out
    }

    /// CSV with a header row and a leading label column, six-decimal values.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("id");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(l);
            for j in 0..self.len() {
                let _ = write!(out, ",{:.6}", self.get(i, j));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, MappingError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| MappingError::BadMatrix("empty csv".into()))?;
        let labels: Vec<String> = header.split(',').skip(1).map(|s| s.to_string()).collect();
        let n = labels.len();
        let mut values = vec![0.0; n * n];
        for (i, line) in lines.enumerate() {
            if i >= n {
                return Err(MappingError::BadMatrix("too many rows".into()));
            }
            let mut fields = line.split(',');
            let row_label = fields
                .next()
                .ok_or_else(|| MappingError::BadMatrix("missing row label".into()))?;
            if row_label != labels[i] {
                return Err(MappingError::BadMatrix(format!(
                    "row label {row_label} does not match column label {}",
                    labels[i]
                )));
            }
            let mut count = 0;
            for (j, f) in fields.enumerate() {
                if j >= n {
                    return Err(MappingError::BadMatrix("too many columns".into()));
                }
                values[i * n + j] = f
                    .trim()
                    .parse()
                    .map_err(|_| MappingError::BadMatrix(format!("bad value {f}")))?;
                count += 1;
            }
            if count != n {
                return Err(MappingError::BadMatrix("short row".into()));
            }
        }
        Self::new(labels, values)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self, MappingError> {
        let text = std::fs::read_to_string(path).map_err(|source| MappingError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_csv(&text)
    }
}

/// Which divisor the frequency-difference distance uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NConvention {
    /// Average over the retained matches only.
    #[default]
    Retained,
    /// Divide by the full cluster count k even after discarding.
    All,
}

/// One-to-one cluster correspondence between two manuscripts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterMapping {
    pub pair: (String, String),
    pub matches: Vec<MatchEntry>,
    pub discard_fraction: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchEntry {
    /// Cluster id in the first manuscript.
    pub a: usize,
    /// Cluster id in the second manuscript.
    pub b: usize,
    pub similarity: f64,
    pub retained: bool,
}

impl ClusterMapping {
    pub fn retained_count(&self) -> usize {
        self.matches.iter().filter(|m| m.retained).count()
    }
}

/// Cosine similarity with zero-norm vectors defined as similar to nothing.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// Pairwise cosine similarity between the centroids of two clusterings.
pub fn centroid_similarity_matrix(
    a: &Clustering,
    b: &Clustering,
) -> Result<Vec<Vec<f64>>, MappingError> {
    if a.k != b.k {
        return Err(MappingError::KMismatch(a.k, b.k));
    }
    let da = a.centroids.first().map_or(0, |c| c.len());
    let db = b.centroids.first().map_or(0, |c| c.len());
    if da != db {
        return Err(MappingError::DimensionMismatch(da, db));
    }
    Ok(a.centroids
        .iter()
        .map(|ca| {
            b.centroids
                .iter()
                .map(|cb| cosine_similarity(ca, cb))
                .collect()
        })
        .collect())
}

/// O(n^3) minimum-cost assignment (Jonker-Volgenant style shortest augmenting
/// paths with potentials). Returns the row -> column assignment and the dual
/// potentials (u, v) satisfying u[i] + v[j] <= cost[i][j] with equality on
/// matched edges.
fn hungarian_min_cost(cost: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let n = cost.len();
    // 1-based arrays; p[j] = row matched to column j.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    let row_potentials: Vec<f64> = u[1..].to_vec();
    let col_potentials: Vec<f64> = v[1..].to_vec();
    (assignment, row_potentials, col_potentials)
}

/// Can the rows not yet fixed be matched to the columns not yet taken within
/// the admissible graph? Kuhn's augmenting paths.
fn can_complete_matching(adm: &[Vec<bool>], fixed: &[Option<usize>]) -> bool {
    let n = adm.len();
    let mut col_taken = vec![false; n];
    for c in fixed.iter().flatten() {
        col_taken[*c] = true;
    }

    fn try_augment(
        row: usize,
        adm: &[Vec<bool>],
        col_taken: &[bool],
        row_of_col: &mut [Option<usize>],
        visited: &mut [bool],
    ) -> bool {
        for c in 0..adm.len() {
            if col_taken[c] || !adm[row][c] || visited[c] {
                continue;
            }
            visited[c] = true;
            let free = match row_of_col[c] {
                None => true,
                Some(r) => try_augment(r, adm, col_taken, row_of_col, visited),
            };
            if free {
                row_of_col[c] = Some(row);
                return true;
            }
        }
        false
    }

    let mut row_of_col: Vec<Option<usize>> = vec![None; n];
    for (row, assigned) in fixed.iter().enumerate() {
        if assigned.is_some() {
            continue;
        }
        let mut visited = vec![false; n];
        if !try_augment(row, adm, &col_taken, &mut row_of_col, &mut visited) {
            return false;
        }
    }
    true
}

/// Maximize total similarity via minimum cost = 1 - similarity.
///
/// Among cost ties the lexicographically smallest assignment by
/// row-then-column index is returned: optimal reduced-cost-zero edges are
/// collected from the dual potentials and the smallest feasible column is
/// fixed row by row.
pub fn hungarian_match(sim: &[Vec<f64>]) -> Result<Vec<usize>, MappingError> {
    let n = sim.len();
    if n == 0 {
        return Err(MappingError::NotSquare);
    }
    for (i, row) in sim.iter().enumerate() {
        if row.len() != n {
            return Err(MappingError::NotSquare);
        }
        for (j, &s) in row.iter().enumerate() {
            if !s.is_finite() {
                return Err(MappingError::NonFinite(i, j));
            }
        }
    }
    let cost: Vec<Vec<f64>> = sim
        .iter()
        .map(|row| row.iter().map(|s| 1.0 - s).collect())
        .collect();
    let (_, u, v) = hungarian_min_cost(&cost);

    // Edges usable by some optimal assignment have zero reduced cost.
    let scale: f64 = cost
        .iter()
        .flat_map(|r| r.iter())
        .fold(1.0f64, |m, &c| m.max(c.abs()));
    let tol = 1e-9 * scale;
    let adm: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| cost[i][j] - u[i] - v[j] <= tol).collect())
        .collect();

    // Lexicographic canonicalization: fix the smallest feasible column per row.
    let mut fixed: Vec<Option<usize>> = vec![None; n];
    for row in 0..n {
        let mut chosen = None;
        for col in 0..n {
            if !adm[row][col] || fixed.iter().flatten().any(|&c| c == col) {
                continue;
            }
            fixed[row] = Some(col);
            if can_complete_matching(&adm, &fixed) {
                chosen = Some(col);
                break;
            }
            fixed[row] = None;
        }
        match chosen {
            Some(_) => {}
            None => {
                // Numerically over-tight admissible set; should not happen, but
                // fall back to the raw optimal assignment.
                let (assignment, _, _) = hungarian_min_cost(&cost);
                return Ok(assignment);
            }
        }
    }
    Ok(fixed.into_iter().map(|c| c.expect("fixed")).collect())
}

/// Pair up clusters from the assignment and similarity matrix, all retained.
pub fn build_mapping(
    a_id: &str,
    b_id: &str,
    assignment: &[usize],
    sim: &[Vec<f64>],
    discard_fraction: f64,
) -> ClusterMapping {
    let matches = assignment
        .iter()
        .enumerate()
        .map(|(a, &b)| MatchEntry {
            a,
            b,
            similarity: sim[a][b],
            retained: true,
        })
        .collect();
    ClusterMapping {
        pair: (a_id.to_string(), b_id.to_string()),
        matches,
        discard_fraction,
    }
}

/// Mark the `floor(fraction * k)` lowest-similarity matches as not retained
/// (similarity ties discard the higher first-manuscript cluster id first).
/// At least one match always stays retained.
pub fn discard_low_similarity(mut mapping: ClusterMapping, fraction: f64) -> ClusterMapping {
    let k = mapping.matches.len();
    mapping.discard_fraction = fraction;
    for m in &mut mapping.matches {
        m.retained = true;
    }
    if k == 0 {
        return mapping;
    }
    let discard = ((fraction * k as f64).floor() as usize).min(k - 1);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| {
        mapping.matches[x]
            .similarity
            .partial_cmp(&mapping.matches[y].similarity)
            .expect("finite similarities")
            .then(mapping.matches[y].a.cmp(&mapping.matches[x].a))
    });
    for &idx in order.iter().take(discard) {
        mapping.matches[idx].retained = false;
    }
    mapping
}

/// The frequency-difference distance: the average of `|f_a - f_b|` over the
/// matched clusters, where the divisor `n` is the retained match count (or k,
/// under [`NConvention::All`]). Frequencies stay relative to all glyphs of
/// each manuscript even when matches were discarded.
pub fn manuscript_distance(
    mapping: &ClusterMapping,
    fa: &ClusterFrequencies,
    fb: &ClusterFrequencies,
    convention: NConvention,
) -> Result<f64, MappingError> {
    let k = mapping.matches.len();
    if fa.freq.len() != k {
        return Err(MappingError::FrequencyLength {
            expected: k,
            got: fa.freq.len(),
        });
    }
    if fb.freq.len() != k {
        return Err(MappingError::FrequencyLength {
            expected: k,
            got: fb.freq.len(),
        });
    }
    let retained = mapping.retained_count();
    if retained == 0 {
        return Err(MappingError::EmptyRetained);
    }
    let sum: f64 = mapping
        .matches
        .iter()
        .filter(|m| m.retained)
        .map(|m| (fa.freq[m.a] - fb.freq[m.b]).abs())
        .sum();
    let n = match convention {
        NConvention::Retained => retained,
        NConvention::All => k,
    };
    Ok(sum / n as f64)
}

/// Full pairwise distance computation over all unordered manuscript pairs.
/// Returns the symmetric zero-diagonal matrix and the per-pair mappings.
pub fn pairwise_distances(
    clusterings: &[Clustering],
    frequencies: &[ClusterFrequencies],
    fraction: f64,
    convention: NConvention,
) -> Result<(DistanceMatrix, Vec<ClusterMapping>), MappingError> {
    let n = clusterings.len();
    if n < 2 {
        return Err(MappingError::TooFewManuscripts(n));
    }
    let k = clusterings[0].k;
    for c in clusterings {
        if c.k != k {
            return Err(MappingError::KMismatch(k, c.k));
        }
    }
    let labels: Vec<String> = clusterings.iter().map(|c| c.manuscript_id.clone()).collect();
    let mut values = vec![0.0f64; n * n];
    let mut mappings = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let sim = centroid_similarity_matrix(&clusterings[i], &clusterings[j])?;
            let assignment = hungarian_match(&sim)?;
            let mapping = discard_low_similarity(
                build_mapping(&labels[i], &labels[j], &assignment, &sim, fraction),
                fraction,
            );
            let d = manuscript_distance(&mapping, &frequencies[i], &frequencies[j], convention)?;
            values[i * n + j] = d;
            values[j * n + i] = d;
            mappings.push(mapping);
        }
    }
    Ok((DistanceMatrix::new(labels, values)?, mappings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Brute-force assignment oracle: enumerate all permutations.
    pub(crate) fn brute_force_min_cost(cost: &[Vec<f64>]) -> (Vec<usize>, f64) {
        fn permutations(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for rest in permutations(n - 1) {
                for pos in 0..n {
                    let mut p = rest.clone();
                    p.insert(pos, n - 1);
                    out.push(p);
                }
            }
            out
        }
        let n = cost.len();
        let mut best: Option<(Vec<usize>, f64)> = None;
        for perm in permutations(n) {
            let total: f64 = (0..n).map(|i| cost[i][perm[i]]).sum();
            let better = match &best {
                None => true,
                Some((bp, bt)) => total < *bt || (total == *bt && perm < *bp),
            };
            if better {
                best = Some((perm, total));
            }
        }
        best.expect("n >= 1")
    }

    fn freq(ms: &str, f: Vec<f64>) -> ClusterFrequencies {
        ClusterFrequencies {
            manuscript_id: ms.to_string(),
            freq: f,
        }
    }

    fn clustering_with(ms: &str, centroids: Vec<Vec<f64>>, counts: Vec<usize>) -> Clustering {
        let total: usize = counts.iter().sum();
        Clustering {
            manuscript_id: ms.to_string(),
            k: centroids.len(),
            assignment: vec![0; total],
            centroids,
            counts,
            seed: 0,
            sse_trace: vec![],
        }
    }

    #[test]
    fn cosine_basics() {
        assert!((cosine_similarity(&[1.0, 0.0], &[1.0, 0.0]) - 1.0).abs() < 1e-12);
        assert!((cosine_similarity(&[1.0, 0.0], &[0.0, 1.0])).abs() < 1e-12);
        assert!((cosine_similarity(&[1.0, 2.0], &[2.0, 4.0]) - 1.0).abs() < 1e-12);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]), 0.0);
    }

    #[test]
    fn hungarian_identity_dominant() {
        let sim = vec![vec![0.9, 0.1], vec![0.2, 0.8]];
        let assignment = hungarian_match(&sim).unwrap();
        assert_eq!(assignment, vec![0, 1]);
        let total: f64 = assignment.iter().enumerate().map(|(i, &j)| sim[i][j]).sum();
        assert!((total - 1.7).abs() < 1e-12);
    }

    #[test]
    fn hungarian_all_equal_gives_identity() {
        let sim = vec![vec![0.5; 4]; 4];
        assert_eq!(hungarian_match(&sim).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn hungarian_k1() {
        assert_eq!(hungarian_match(&[vec![0.3]]).unwrap(), vec![0]);
    }

    #[test]
    fn hungarian_rejects_bad_input() {
        assert!(matches!(
            hungarian_match(&[vec![0.1, 0.2]]),
            Err(MappingError::NotSquare)
        ));
        assert!(matches!(
            hungarian_match(&[vec![f64::NAN]]),
            Err(MappingError::NonFinite(0, 0))
        ));
    }

    #[test]
    fn hungarian_matches_brute_force_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..60 {
            let k = 2 + (trial % 6);
            let sim: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..k).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
                .collect();
            let cost: Vec<Vec<f64>> = sim
                .iter()
                .map(|r| r.iter().map(|s| 1.0 - s).collect())
                .collect();
            let assignment = hungarian_match(&sim).unwrap();
            let total: f64 = (0..k).map(|i| cost[i][assignment[i]]).sum();
            let (_, best) = brute_force_min_cost(&cost);
            assert!(
                (total - best).abs() < 1e-9,
                "k={k} trial={trial}: {total} vs {best}"
            );
        }
    }

    #[test]
    fn hungarian_ties_resolve_lexicographically() {
        // Two optimal assignments; {0->1, 1->0} and {0->0, 1->1} tie on cost.
        let sim = vec![vec![0.6, 0.6], vec![0.6, 0.6]];
        assert_eq!(hungarian_match(&sim).unwrap(), vec![0, 1]);
        // Structured tie: rows prefer distinct columns overall but row 0 has
        // two equally good options; the smaller column wins.
        let sim = vec![
            vec![0.9, 0.9, 0.1],
            vec![0.9, 0.9, 0.1],
            vec![0.1, 0.1, 0.9],
        ];
        assert_eq!(hungarian_match(&sim).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn centroid_similarity_shape_and_errors() {
        let a = clustering_with("a", vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![2, 2]);
        let b = clustering_with("b", vec![vec![2.0, 0.0], vec![0.0, 3.0]], vec![1, 3]);
        let sim = centroid_similarity_matrix(&a, &b).unwrap();
        assert!((sim[0][0] - 1.0).abs() < 1e-12);
        assert!(sim[0][1].abs() < 1e-12);
        assert!((sim[1][1] - 1.0).abs() < 1e-12);

        let c = clustering_with("c", vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]], vec![1, 1]);
        assert!(matches!(
            centroid_similarity_matrix(&a, &c),
            Err(MappingError::DimensionMismatch(2, 3))
        ));
    }

    #[test]
    fn discard_fraction_zero_keeps_all() {
        let sim = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let mapping = build_mapping("a", "b", &[0, 1], &sim, 0.0);
        let m = discard_low_similarity(mapping, 0.0);
        assert_eq!(m.retained_count(), 2);
    }

    #[test]
    fn discard_ten_percent_of_ten_keeps_nine() {
        let sim: Vec<Vec<f64>> = (0..10)
            .map(|i| (0..10).map(|j| if i == j { 0.5 + i as f64 * 0.04 } else { 0.0 }).collect())
            .collect();
        let assignment: Vec<usize> = (0..10).collect();
        let m = discard_low_similarity(build_mapping("a", "b", &assignment, &sim, 0.1), 0.1);
        assert_eq!(m.retained_count(), 9);
        // The weakest match (cluster 0, similarity 0.5) is the discarded one.
        assert!(!m.matches[0].retained);
    }

    #[test]
    fn discard_floor_rule_k3_half() {
        let sim = vec![
            vec![0.9, 0.0, 0.0],
            vec![0.0, 0.8, 0.0],
            vec![0.0, 0.0, 0.7],
        ];
        let m = discard_low_similarity(build_mapping("a", "b", &[0, 1, 2], &sim, 0.5), 0.5);
        // floor(1.5) = 1 discarded, 2 retained.
        assert_eq!(m.retained_count(), 2);
        assert!(!m.matches[2].retained);
    }

    #[test]
    fn discard_tie_drops_higher_a_index_first() {
        let sim = vec![
            vec![0.5, 0.0, 0.0],
            vec![0.0, 0.5, 0.0],
            vec![0.0, 0.0, 0.9],
        ];
        let m = discard_low_similarity(build_mapping("a", "b", &[0, 1, 2], &sim, 0.4), 0.4);
        assert_eq!(m.retained_count(), 2);
        assert!(m.matches[0].retained);
        assert!(!m.matches[1].retained, "higher tied index discarded first");
    }

    #[test]
    fn distance_identical_is_zero() {
        let sim = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let m = discard_low_similarity(build_mapping("a", "b", &[0, 1], &sim, 0.0), 0.0);
        let f = freq("a", vec![0.5, 0.5]);
        let d = manuscript_distance(&m, &f, &f, NConvention::Retained).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn distance_hand_computed_quarter() {
        let sim = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let m = discard_low_similarity(build_mapping("a", "b", &[0, 1], &sim, 0.0), 0.0);
        let fa = freq("a", vec![0.5, 0.5]);
        let fb = freq("b", vec![0.25, 0.75]);
        let d = manuscript_distance(&m, &fa, &fb, NConvention::Retained).unwrap();
        assert!((d - 0.25).abs() < 1e-12);
    }

    #[test]
    fn distance_with_discard_hand_computed() {
        // Retain the two best-similarity matches {0->0, 1->1}:
        // (|0.6-0.5| + |0.3-0.3|) / 2 = 0.05.
        let sim = vec![
            vec![0.9, 0.0, 0.0],
            vec![0.0, 0.8, 0.0],
            vec![0.0, 0.0, 0.1],
        ];
        let m = discard_low_similarity(build_mapping("a", "b", &[0, 1, 2], &sim, 0.34), 0.34);
        assert_eq!(m.retained_count(), 2);
        let fa = freq("a", vec![0.6, 0.3, 0.1]);
        let fb = freq("b", vec![0.5, 0.3, 0.2]);
        let d = manuscript_distance(&m, &fa, &fb, NConvention::Retained).unwrap();
        assert!((d - 0.05).abs() < 1e-12);
        // Under the `all` convention the same sum is divided by k = 3.
        let d_all = manuscript_distance(&m, &fa, &fb, NConvention::All).unwrap();
        assert!((d_all - 0.1 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn pairwise_symmetric_zero_diagonal() {
        let a = clustering_with("a", vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![3, 1]);
        let b = clustering_with("b", vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1, 1]);
        let c = clustering_with("c", vec![vec![1.0, 0.1], vec![0.1, 1.0]], vec![1, 4]);
        let fs = vec![
            freq("a", vec![0.75, 0.25]),
            freq("b", vec![0.5, 0.5]),
            freq("c", vec![0.2, 0.8]),
        ];
        let (m, mappings) =
            pairwise_distances(&[a, b, c], &fs, 0.0, NConvention::Retained).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(mappings.len(), 3);
        for i in 0..3 {
            assert_eq!(m.get(i, i), 0.0);
            for j in 0..3 {
                assert_eq!(m.get(i, j), m.get(j, i));
            }
        }
        // Three manuscripts give three distinct off-diagonal pair values.
        let pair_values: Vec<f64> = m.upper_triangle().iter().map(|&(_, _, v)| v).collect();
        assert_eq!(pair_values.len(), 3);
        assert!(pair_values[0] != pair_values[1] && pair_values[1] != pair_values[2]);
        // Four manuscripts give six.
        let d = clustering_with("d", vec![vec![0.6, 0.8], vec![0.8, 0.6]], vec![2, 3]);
        let a2 = clustering_with("a", vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![3, 1]);
        let b2 = clustering_with("b", vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1, 1]);
        let c2 = clustering_with("c", vec![vec![1.0, 0.1], vec![0.1, 1.0]], vec![1, 4]);
        let fs4 = vec![
            freq("a", vec![0.75, 0.25]),
            freq("b", vec![0.5, 0.5]),
            freq("c", vec![0.2, 0.8]),
            freq("d", vec![0.4, 0.6]),
        ];
        let (m4, mappings4) =
            pairwise_distances(&[a2, b2, c2, d], &fs4, 0.0, NConvention::Retained).unwrap();
        assert_eq!(m4.upper_triangle().len(), 6);
        assert_eq!(mappings4.len(), 6);
        // Duplicate manuscript pair distance is zero.
        let a2 = clustering_with("a", vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![3, 1]);
        let a3 = clustering_with("a2", vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![3, 1]);
        let fs2 = vec![freq("a", vec![0.75, 0.25]), freq("a2", vec![0.75, 0.25])];
        let (m2, _) = pairwise_distances(&[a2, a3], &fs2, 0.0, NConvention::Retained).unwrap();
        assert_eq!(m2.get(0, 1), 0.0);
    }

    #[test]
    fn pairwise_rejects_single_manuscript() {
        let a = clustering_with("a", vec![vec![1.0]], vec![1]);
        let fs = vec![freq("a", vec![1.0])];
        assert!(matches!(
            pairwise_distances(&[a], &fs, 0.0, NConvention::Retained),
            Err(MappingError::TooFewManuscripts(1))
        ));
    }

    #[test]
    fn distance_symmetric_and_bounded_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for trial in 0..40 {
            let k = 2 + trial % 5;
            let dim = 3;
            let rand_clustering = |id: &str, rng: &mut ChaCha8Rng| {
                let centroids: Vec<Vec<f64>> = (0..k)
                    .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
                    .collect();
                let counts: Vec<usize> = (0..k).map(|_| 1 + rng.random_range(0..9usize)).collect();
                clustering_with(id, centroids, counts)
            };
            let a = rand_clustering("a", &mut rng);
            let b = rand_clustering("b", &mut rng);
            let fa = crate::clustering::cluster_frequencies(&a).unwrap();
            let fb = crate::clustering::cluster_frequencies(&b).unwrap();

            let sim_ab = centroid_similarity_matrix(&a, &b).unwrap();
            let asg_ab = hungarian_match(&sim_ab).unwrap();
            let map_ab =
                discard_low_similarity(build_mapping("a", "b", &asg_ab, &sim_ab, 0.1), 0.1);
            let d_ab = manuscript_distance(&map_ab, &fa, &fb, NConvention::Retained).unwrap();

            let sim_ba = centroid_similarity_matrix(&b, &a).unwrap();
            let asg_ba = hungarian_match(&sim_ba).unwrap();
            let map_ba =
                discard_low_similarity(build_mapping("b", "a", &asg_ba, &sim_ba, 0.1), 0.1);
            let d_ba = manuscript_distance(&map_ba, &fb, &fa, NConvention::Retained).unwrap();

            assert!((d_ab - d_ba).abs() < 1e-9, "trial {trial}: {d_ab} vs {d_ba}");
            assert!((0.0..=1.0).contains(&d_ab));
        }
    }

    #[test]
    fn distance_invariant_under_cluster_relabeling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let k = 4;
        let centroids: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..3).map(|_| rng.random::<f64>()).collect())
            .collect();
        let counts = vec![2usize, 5, 1, 4];
        let a = clustering_with("a", centroids.clone(), counts.clone());
        let b_centroids: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..3).map(|_| rng.random::<f64>()).collect())
            .collect();
        let b_counts = vec![3usize, 3, 4, 2];
        let b = clustering_with("b", b_centroids.clone(), b_counts.clone());

        // Permute b's cluster ids.
        let perm = [2usize, 0, 3, 1];
        let b_perm = clustering_with(
            "b",
            perm.iter().map(|&i| b_centroids[i].clone()).collect(),
            perm.iter().map(|&i| b_counts[i]).collect(),
        );

        let fa = crate::clustering::cluster_frequencies(&a).unwrap();
        let fb = crate::clustering::cluster_frequencies(&b).unwrap();
        let fb_perm = crate::clustering::cluster_frequencies(&b_perm).unwrap();

        let d = |x: &Clustering, fx: &ClusterFrequencies| {
            let sim = centroid_similarity_matrix(&a, x).unwrap();
            let asg = hungarian_match(&sim).unwrap();
            let m = discard_low_similarity(build_mapping("a", "b", &asg, &sim, 0.1), 0.1);
            manuscript_distance(&m, &fa, fx, NConvention::Retained).unwrap()
        };
        assert!((d(&b, &fb) - d(&b_perm, &fb_perm)).abs() < 1e-12);
    }

    #[test]
    fn csv_roundtrip() {
        let m = DistanceMatrix::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![0.0, 0.25, 0.5, 0.25, 0.0, 0.125, 0.5, 0.125, 0.0],
        )
        .unwrap();
        let csv = m.to_csv();
        let back = DistanceMatrix::from_csv(&csv).unwrap();
        assert_eq!(back.labels, m.labels);
        for (x, y) in back.values.iter().zip(m.values.iter()) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn bad_matrices_rejected() {
        assert!(DistanceMatrix::new(vec!["a".into()], vec![1.0]).is_err());
        assert!(DistanceMatrix::new(
            vec!["a".into(), "b".into()],
            vec![0.0, 1.0, 2.0, 0.0]
        )
        .is_err());
        assert!(DistanceMatrix::new(
            vec!["a".into(), "b".into()],
            vec![0.0, -1.0, -1.0, 0.0]
        )
        .is_err());
    }
}
