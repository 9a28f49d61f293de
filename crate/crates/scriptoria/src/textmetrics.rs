//! Text-distance evaluation: Levenshtein, CER under configurable
//! normalization, diacritics-only CER, edit-alignment confusion statistics,
//! model-similarity trees, letter distributions and Spearman rank reports.
//!
//! All text is NFC-normalized on ingest; Church Slavonic sources mix
//! precomposed and combining forms, and category-Mn stripping is only
//! well-defined on a fixed normal form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::UnicodeNormalization;

use crate::mapping::DistanceMatrix;
use crate::stemma::{upgma, PhyloTree, StemmaError};

#[derive(Debug, Error)]
pub enum TextMetricsError {
    #[error("normalized reference text is empty")]
    EmptyReference,
    #[error("reference contains no combining marks")]
    NoCombiningMarks,
    #[error("input lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("rank vector has zero variance")]
    ZeroVariance,
    #[error("distance matrices have different labels")]
    LabelMismatch,
    #[error("need at least 2 systems, got {0}")]
    TooFewSystems(usize),
    #[error(transparent)]
    Tree(#[from] StemmaError),
}

/// Switches for the text normalization applied before distance computation.
/// The default setting turns all three on: lowercased, all spaces and line
/// breaks removed, and combining marks removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationOptions {
    pub lowercase: bool,
    pub strip_whitespace: bool,
    /// Remove Unicode nonspacing marks (general category Mn).
    pub strip_combining: bool,
}

impl Default for NormalizationOptions {
    fn default() -> Self {
        Self {
            lowercase: true,
            strip_whitespace: true,
            strip_combining: true,
        }
    }
}

impl NormalizationOptions {
    pub fn none() -> Self {
        Self {
            lowercase: false,
            strip_whitespace: false,
            strip_combining: false,
        }
    }
}

fn is_combining_mark(c: char) -> bool {
    get_general_category(c) == GeneralCategory::NonspacingMark
}

/// NFC-normalize, then apply lowercase, whitespace removal and combining-mark
/// removal in that order. Idempotent.
pub fn normalize_text(s: &str, opts: &NormalizationOptions) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.nfc() {
        let lowered: Vec<char> = if opts.lowercase {
            c.to_lowercase().collect()
        } else {
            vec![c]
        };
        for lc in lowered {
            if opts.strip_whitespace && lc.is_whitespace() {
                continue;
            }
            if opts.strip_combining && is_combining_mark(lc) {
                continue;
            }
            out.push(lc);
        }
    }
    // Lowercasing can reorder or re-expose composable sequences; a final NFC
    // pass keeps the function idempotent.
    out.nfc().collect()
}

/// Unit-cost edit distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Character error rate: `levenshtein(norm(ref), norm(hyp)) / |norm(ref)|`.
/// May exceed 1 when the hypothesis is much longer than the reference.
pub fn cer(
    reference: &str,
    hypothesis: &str,
    opts: &NormalizationOptions,
) -> Result<f64, TextMetricsError> {
    let r = normalize_text(reference, opts);
    let h = normalize_text(hypothesis, opts);
    let len = r.chars().count();
    if len == 0 {
        return Err(TextMetricsError::EmptyReference);
    }
    Ok(levenshtein(&r, &h) as f64 / len as f64)
}

fn combining_marks_of(s: &str) -> String {
    s.nfc().filter(|&c| is_combining_mark(c)).collect()
}

/// CER computed solely on the subsequences of combining marks (category Mn)
/// of both texts, order preserved.
pub fn diacritics_cer(reference: &str, hypothesis: &str) -> Result<f64, TextMetricsError> {
    let r = combining_marks_of(reference);
    let h = combining_marks_of(hypothesis);
    let len = r.chars().count();
    if len == 0 {
        return Err(TextMetricsError::NoCombiningMarks);
    }
    Ok(levenshtein(&r, &h) as f64 / len as f64)
}

/// Counted substitution, insertion and deletion events from one edit
/// alignment. The total over all three equals the Levenshtein distance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfusionStats {
    /// (reference char, hypothesis char) -> count.
    pub substitutions: BTreeMap<(char, char), u64>,
    /// Hypothesis char inserted -> count.
    pub insertions: BTreeMap<char, u64>,
    /// Reference char deleted -> count.
    pub deletions: BTreeMap<char, u64>,
}

impl ConfusionStats {
    pub fn total_ops(&self) -> u64 {
        self.substitutions.values().sum::<u64>()
            + self.insertions.values().sum::<u64>()
            + self.deletions.values().sum::<u64>()
    }

    pub fn is_empty(&self) -> bool {
        self.substitutions.is_empty() && self.insertions.is_empty() && self.deletions.is_empty()
    }
}

/// Align `reference` against `hypothesis` and count edit operations. At cost
/// ties the backtrace prefers substitution over deletion over insertion.
pub fn edit_alignment(reference: &str, hypothesis: &str) -> ConfusionStats {
    let r: Vec<char> = reference.chars().collect();
    let h: Vec<char> = hypothesis.chars().collect();
    let (m, n) = (r.len(), h.len());
    let width = n + 1;
    let mut dp = vec![0u32; (m + 1) * width];
    for (j, cell) in dp.iter_mut().enumerate().take(width) {
        *cell = j as u32;
    }
    for i in 1..=m {
        dp[i * width] = i as u32;
        for j in 1..=n {
            let sub = dp[(i - 1) * width + (j - 1)] + u32::from(r[i - 1] != h[j - 1]);
            let del = dp[(i - 1) * width + j] + 1;
            let ins = dp[i * width + (j - 1)] + 1;
            dp[i * width + j] = sub.min(del).min(ins);
        }
    }

    let mut stats = ConfusionStats::default();
    let (mut i, mut j) = (m, n);
    while i > 0 || j > 0 {
        let cur = dp[i * width + j];
        if i > 0 && j > 0 {
            let cost = u32::from(r[i - 1] != h[j - 1]);
            if dp[(i - 1) * width + (j - 1)] + cost == cur {
                if cost == 1 {
                    *stats.substitutions.entry((r[i - 1], h[j - 1])).or_insert(0) += 1;
                }
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && dp[(i - 1) * width + j] + 1 == cur {
            *stats.deletions.entry(r[i - 1]).or_insert(0) += 1;
            i -= 1;
            continue;
        }
        *stats.insertions.entry(h[j - 1]).or_insert(0) += 1;
        j -= 1;
    }
    stats
}

/// Canonically sorted key sets shared by all systems under comparison, so
/// their confusion vectors line up component by component.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    pub substitutions: Vec<(char, char)>,
    pub insertions: Vec<char>,
    pub deletions: Vec<char>,
}

impl Vocabulary {
    pub fn union(stats: &[&ConfusionStats]) -> Self {
        let mut subs = BTreeSet::new();
        let mut ins = BTreeSet::new();
        let mut del = BTreeSet::new();
        for s in stats {
            subs.extend(s.substitutions.keys().copied());
            ins.extend(s.insertions.keys().copied());
            del.extend(s.deletions.keys().copied());
        }
        Self {
            substitutions: subs.into_iter().collect(),
            insertions: ins.into_iter().collect(),
            deletions: del.into_iter().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.substitutions.len() + self.insertions.len() + self.deletions.len()
    }
}

/// Concatenated counts (substitution pairs, insertions, deletions) in
/// vocabulary order, L2-normalized; the zero vector when there are no errors.
pub fn confusion_vector(stats: &ConfusionStats, vocabulary: &Vocabulary) -> Vec<f64> {
    let mut v = Vec::with_capacity(vocabulary.dim());
    for key in &vocabulary.substitutions {
        v.push(*stats.substitutions.get(key).unwrap_or(&0) as f64);
    }
    for key in &vocabulary.insertions {
        v.push(*stats.insertions.get(key).unwrap_or(&0) as f64);
    }
    for key in &vocabulary.deletions {
        v.push(*stats.deletions.get(key).unwrap_or(&0) as f64);
    }
    let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in &mut v {
            *x /= norm;
        }
    }
    v
}

/// UPGMA tree over systems from the pairwise cosine distance of their
/// confusion vectors. Identical vectors get distance 0 even when both are
/// zero (two error-free systems are maximally similar, not dissimilar).
pub fn model_similarity_tree(
    vectors: &[Vec<f64>],
    labels: &[String],
) -> Result<PhyloTree, TextMetricsError> {
    if vectors.len() < 2 {
        return Err(TextMetricsError::TooFewSystems(vectors.len()));
    }
    if vectors.len() != labels.len() {
        return Err(TextMetricsError::LengthMismatch(
            vectors.len(),
            labels.len(),
        ));
    }
    let n = vectors.len();
    let mut values = vec![0.0f64; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = if vectors[i] == vectors[j] {
                0.0
            } else {
                (1.0 - crate::mapping::cosine_similarity(&vectors[i], &vectors[j])).max(0.0)
            };
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    let m = DistanceMatrix::new(labels.to_vec(), values)
        .map_err(|e| StemmaError::Parse(e.to_string()))?;
    Ok(upgma(&m)?)
}

/// Relative character frequencies of a normalized text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LetterDistribution {
    pub freq: BTreeMap<char, f64>,
}

pub fn letter_distribution(
    text: &str,
    opts: &NormalizationOptions,
) -> Result<LetterDistribution, TextMetricsError> {
    let normalized = normalize_text(text, opts);
    let total = normalized.chars().count();
    if total == 0 {
        return Err(TextMetricsError::EmptyReference);
    }
    let mut counts: BTreeMap<char, usize> = BTreeMap::new();
    for c in normalized.chars() {
        *counts.entry(c).or_insert(0) += 1;
    }
    Ok(LetterDistribution {
        freq: counts
            .into_iter()
            .map(|(c, n)| (c, n as f64 / total as f64))
            .collect(),
    })
}

/// `(1/n) * sum over the union alphabet of |p(c) - q(c)|`, with `n` the union
/// size and missing letters at frequency 0. Symmetric, in [0, 1].
pub fn distribution_distance(p: &LetterDistribution, q: &LetterDistribution) -> f64 {
    let union: BTreeSet<char> = p.freq.keys().chain(q.freq.keys()).copied().collect();
    if union.is_empty() {
        return 0.0;
    }
    let sum: f64 = union
        .iter()
        .map(|c| (p.freq.get(c).unwrap_or(&0.0) - q.freq.get(c).unwrap_or(&0.0)).abs())
        .sum();
    sum / union.len() as f64
}

/// Midranks: average rank for tied values, 1-based.
fn midranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson correlation of midranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, TextMetricsError> {
    if x.len() != y.len() {
        return Err(TextMetricsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(TextMetricsError::TooShort {
            needed: 2,
            got: x.len(),
        });
    }
    let rx = midranks(x);
    let ry = midranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for i in 0..x.len() {
        let a = rx[i] - mx;
        let b = ry[i] - my;
        num += a * b;
        dx += a * a;
        dy += b * b;
    }
    if dx == 0.0 || dy == 0.0 {
        return Err(TextMetricsError::ZeroVariance);
    }
    Ok(num / (dx * dy).sqrt())
}

/// One unordered pair in a [`RankReport`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairRank {
    pub label_a: String,
    pub label_b: String,
    pub test_value: f64,
    pub test_rank: f64,
    pub gold_value: f64,
    pub gold_rank: f64,
}

/// Paired comparison of a test distance matrix against a gold standard:
/// per-pair values with midranks plus the Spearman correlation of the two
/// rankings (`None` when fewer than two pairs exist or ranks are constant).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankReport {
    pub pairs: Vec<PairRank>,
    pub spearman: Option<f64>,
}

impl RankReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pair,test_value,test_rank,gold_value,gold_rank\n");
        for p in &self.pairs {
            let _ = writeln!(
                out,
                "{}--{},{:.6},{},{:.6},{}",
                p.label_a, p.label_b, p.test_value, p.test_rank, p.gold_value, p.gold_rank
            );
        }
        match self.spearman {
            Some(r) => {
                let _ = writeln!(out, "spearman,{r:.6},,,");
            }
            None => {
                let _ = writeln!(out, "spearman,n/a,,,");
            }
        }
        out
    }
}

/// Compare a test matrix against a gold matrix over identical labels.
pub fn rank_report(
    gold: &DistanceMatrix,
    test: &DistanceMatrix,
) -> Result<RankReport, TextMetricsError> {
    if gold.labels != test.labels {
        return Err(TextMetricsError::LabelMismatch);
    }
    let gold_vals: Vec<(usize, usize, f64)> = gold.upper_triangle();
    let test_vals: Vec<(usize, usize, f64)> = test.upper_triangle();
    let g: Vec<f64> = gold_vals.iter().map(|&(_, _, v)| v).collect();
    let t: Vec<f64> = test_vals.iter().map(|&(_, _, v)| v).collect();
    let g_ranks = midranks(&g);
    let t_ranks = midranks(&t);
    let pairs = gold_vals
        .iter()
        .enumerate()
        .map(|(idx, &(i, j, gv))| PairRank {
            label_a: gold.labels[i].clone(),
            label_b: gold.labels[j].clone(),
            test_value: t[idx],
            test_rank: t_ranks[idx],
            gold_value: gv,
            gold_rank: g_ranks[idx],
        })
        .collect();
    let rho = match spearman(&t, &g) {
        Ok(r) => Some(r),
        Err(TextMetricsError::TooShort { .. }) | Err(TextMetricsError::ZeroVariance) => None,
        Err(e) => return Err(e),
    };
    Ok(RankReport {
        pairs,
        spearman: rho,
    })
}
