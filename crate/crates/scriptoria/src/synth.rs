//! Synthetic textual traditions with known gold distances.
//!
//! A seed text over a small alphabet is copied along a random tree; each copy
//! applies a random number of character edits. Witness texts come with their
//! exact pairwise Levenshtein matrix, and can be rendered as clean page
//! images from fixed per-letter template bitmaps (disjoint glyphs, uniform
//! spacing), giving the visual pipeline a ground truth to be checked against.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::RasterImage;
use crate::mapping::DistanceMatrix;
use crate::textmetrics::levenshtein;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("need at least 2 witnesses, got {0}")]
    TooFewWitnesses(usize),
    #[error("alphabet size must be in 2..={max}, got {got}")]
    BadAlphabet { got: usize, max: usize },
    #[error("text length {len} too short for alphabet of {alphabet} letters")]
    TextTooShort { len: usize, alphabet: usize },
    #[error("edit range is empty: {0}..={1}")]
    BadEditRange(usize, usize),
}

/// Per-letter glyph templates on a 5x7 cell grid. Every template is a single
/// connected shape with ink in the first and last row and the first and last
/// column, so all rendered glyphs have identical tight boxes and survive a
/// 3x3 morphological opening unchanged (each ink cell is rendered as a 3x3
/// pixel block).
const TEMPLATES: [[&str; 7]; 12] = [
    ["#####", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"],
    ["####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."],
    ["#####", "#....", "#....", "#....", "#....", "#....", "#####"],
    ["####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####."],
    ["#####", "#....", "#....", "####.", "#....", "#....", "#####"],
    ["#####", "#....", "#....", "####.", "#....", "#....", "#...."],
    ["#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"],
    ["#####", "..#..", "..#..", "..#..", "..#..", "..#..", "#####"],
    ["#....", "#....", "#....", "#....", "#....", "#....", "#####"],
    ["#####", "#...#", "#...#", "#...#", "#...#", "#...#", "#####"],
    ["#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."],
    ["#...#", "#...#", "#...#", "#...#", "#...#", "#...#", "#####"],
];

/// Pixels per template cell.
const CELL: u32 = 3;
/// Template grid size in cells.
const GRID_W: u32 = 5;
const GRID_H: u32 = 7;
/// Rendered glyph size in pixels.
pub const GLYPH_W: u32 = GRID_W * CELL;
pub const GLYPH_H: u32 = GRID_H * CELL;

const GAP_X: u32 = 6;
const GAP_Y: u32 = 8;
const MARGIN: u32 = 12;

/// Largest alphabet the renderer supports.
pub const MAX_ALPHABET: usize = TEMPLATES.len();

/// The letters used for an alphabet of the given size: 'a', 'b', ...
pub fn alphabet(size: usize) -> Vec<char> {
    (0..size).map(|i| (b'a' + i as u8) as char).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub seed: u64,
    /// Number of mutated copies generated from the seed text.
    pub witnesses: usize,
    pub alphabet_size: usize,
    /// Seed text length in characters.
    pub text_len: usize,
    /// Edits applied per copy, drawn uniformly from this inclusive range.
    pub edits_min: usize,
    pub edits_max: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            seed: 42,
            witnesses: 8,
            alphabet_size: 10,
            text_len: 600,
            edits_min: 8,
            edits_max: 80,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthWitness {
    pub id: String,
    pub text: String,
}

/// A generated tradition: witness texts plus their exact pairwise
/// Levenshtein distance matrix.
#[derive(Debug, Clone)]
pub struct SynthTradition {
    pub params: SynthParams,
    pub witnesses: Vec<SynthWitness>,
    pub gold: DistanceMatrix,
}

fn random_text(rng: &mut ChaCha8Rng, letters: &[char], len: usize) -> String {
    (0..len)
        .map(|_| letters[rng.random_range(0..letters.len())])
        .collect()
}

fn covers_alphabet(text: &[char], letters: &[char]) -> bool {
    letters.iter().all(|l| text.contains(l))
}

/// Apply `edits` random substitutions (60%), insertions (20%) and deletions
/// (20%). Each copy event draws a scribal profile of two favored letters;
/// substitution and insertion targets are biased toward them, the way real
/// copyists apply orthographic preferences consistently rather than at
/// random. The copy is redrawn until it still contains every alphabet
/// letter, so downstream clustering with k = alphabet size stays well-posed.
fn mutate(rng: &mut ChaCha8Rng, parent: &str, letters: &[char], edits: usize) -> String {
    for _attempt in 0..200 {
        let favored = [
            letters[rng.random_range(0..letters.len())],
            letters[rng.random_range(0..letters.len())],
        ];
        let pick = |rng: &mut ChaCha8Rng| -> char {
            if rng.random::<f64>() < 0.7 {
                favored[rng.random_range(0..2)]
            } else {
                letters[rng.random_range(0..letters.len())]
            }
        };
        let mut chars: Vec<char> = parent.chars().collect();
        for _ in 0..edits {
            match rng.random_range(0..10u32) {
                0..=5 => {
                    let pos = rng.random_range(0..chars.len());
                    chars[pos] = pick(rng);
                }
                6..=7 => {
                    let pos = rng.random_range(0..=chars.len());
                    let c = pick(rng);
                    chars.insert(pos, c);
                }
                _ => {
                    if chars.len() > 1 {
                        let pos = rng.random_range(0..chars.len());
                        chars.remove(pos);
                    }
                }
            }
        }
        if covers_alphabet(&chars, letters) {
            return chars.into_iter().collect();
        }
    }
    // Pathologically small texts: give up on coverage rather than loop.
    parent.to_string()
}

/// Generate a tradition: a covered seed text, then `witnesses` copies. Each
/// copy descends from the most recent text with probability 0.65 and from a
/// uniformly chosen earlier one otherwise, giving traditions a mix of long
/// descent chains and side branches, so copies accumulate divergence at
/// clearly different depths.
pub fn generate(params: &SynthParams) -> Result<SynthTradition, SynthError> {
    if params.witnesses < 2 {
        return Err(SynthError::TooFewWitnesses(params.witnesses));
    }
    if params.alphabet_size < 2 || params.alphabet_size > MAX_ALPHABET {
        return Err(SynthError::BadAlphabet {
            got: params.alphabet_size,
            max: MAX_ALPHABET,
        });
    }
    if params.text_len < 4 * params.alphabet_size {
        return Err(SynthError::TextTooShort {
            len: params.text_len,
            alphabet: params.alphabet_size,
        });
    }
    if params.edits_min > params.edits_max {
        return Err(SynthError::BadEditRange(params.edits_min, params.edits_max));
    }

    let letters = alphabet(params.alphabet_size);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let seed_text = loop {
        let t = random_text(&mut rng, &letters, params.text_len);
        let chars: Vec<char> = t.chars().collect();
        if covers_alphabet(&chars, &letters) {
            break t;
        }
    };

    let mut pool: Vec<String> = vec![seed_text];
    let mut witnesses = Vec::with_capacity(params.witnesses);
    for i in 0..params.witnesses {
        let parent_idx = if rng.random::<f64>() < 0.65 {
            pool.len() - 1
        } else {
            rng.random_range(0..pool.len())
        };
        let parent = pool[parent_idx].clone();
        let edits = rng.random_range(params.edits_min..=params.edits_max);
        let text = mutate(&mut rng, &parent, &letters, edits);
        pool.push(text.clone());
        witnesses.push(SynthWitness {
            id: format!("w{:02}", i + 1),
            text,
        });
    }

    let n = witnesses.len();
    let mut values = vec![0.0f64; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = levenshtein(&witnesses[i].text, &witnesses[j].text) as f64;
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    let labels = witnesses.iter().map(|w| w.id.clone()).collect();
    let gold = DistanceMatrix::new(labels, values).expect("symmetric by construction");

    Ok(SynthTradition {
        params: params.clone(),
        witnesses,
        gold,
    })
}

/// Render a witness text as a clean grayscale page: black template glyphs on
/// white, `cols` glyphs per line, uniform spacing with inter-glyph gaps wider
/// than the default opening kernel. Returns the page image; glyph reading
/// order equals text order.
pub fn render_page(text: &str, cols: usize) -> RasterImage {
    assert!(cols >= 1, "cols must be >= 1");
    let chars: Vec<char> = text.chars().collect();
    let rows = chars.len().div_ceil(cols).max(1);
    let width = 2 * MARGIN + cols as u32 * GLYPH_W + (cols as u32 - 1) * GAP_X;
    let height = 2 * MARGIN + rows as u32 * GLYPH_H + (rows as u32 - 1) * GAP_Y;
    let mut data = vec![255u8; width as usize * height as usize];

    for (i, &c) in chars.iter().enumerate() {
        let template = &TEMPLATES[(c as u8 - b'a') as usize];
        let col = (i % cols) as u32;
        let row = (i / cols) as u32;
        let x0 = MARGIN + col * (GLYPH_W + GAP_X);
        let y0 = MARGIN + row * (GLYPH_H + GAP_Y);
        for (cy, line) in template.iter().enumerate() {
            for (cx, cell) in line.chars().enumerate() {
                if cell != '#' {
                    continue;
                }
                for py in 0..CELL {
                    for px in 0..CELL {
                        let x = x0 + cx as u32 * CELL + px;
                        let y = y0 + cy as u32 * CELL + py;
                        data[y as usize * width as usize + x as usize] = 0;
                    }
                }
            }
        }
    }
    RasterImage::new(width, height, 1, data).expect("valid dimensions")
}

/// Default glyph column count used when rendering pages.
pub const DEFAULT_COLS: usize = 28;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::embed_patch;
    use crate::imaging::{segment_page, SegmentParams};
    use crate::mapping::cosine_similarity;

    #[test]
    fn templates_are_well_formed() {
        for (i, t) in TEMPLATES.iter().enumerate() {
            assert_eq!(t.len(), 7);
            for row in t {
                assert_eq!(row.len(), 5, "template {i}");
            }
            // Ink in first/last row and first/last column keeps tight boxes
            // uniform across letters.
            assert!(t[0].contains('#') && t[6].contains('#'), "template {i}");
            assert!(t.iter().any(|r| r.starts_with('#')), "template {i}");
            assert!(t.iter().any(|r| r.ends_with('#')), "template {i}");
        }
    }

    #[test]
    fn templates_embed_distinctly() {
        let page = render_page(&alphabet(MAX_ALPHABET).iter().collect::<String>(), 12);
        let crops = segment_page(&page, &SegmentParams::default(), "t", 0).unwrap();
        assert_eq!(crops.len(), MAX_ALPHABET);
        let vectors: Vec<Vec<f64>> = crops
            .iter()
            .map(|c| embed_patch(c, 32).unwrap().values)
            .collect();
        for i in 0..vectors.len() {
            for j in i + 1..vectors.len() {
                let sim = cosine_similarity(&vectors[i], &vectors[j]);
                assert!(sim < 0.995, "templates {i} and {j} too similar: {sim}");
            }
        }
    }

    #[test]
    fn rendered_page_segments_back_to_text() {
        let text = "abcdefghij".repeat(5);
        let page = render_page(&text, 12);
        let crops = segment_page(&page, &SegmentParams::default(), "t", 0).unwrap();
        assert_eq!(crops.len(), text.chars().count());
        // Reading order recovers the text: map each crop back to its letter
        // by nearest template embedding.
        // Single-letter reference pages are tiny, so lift the relative
        // max-area filter when segmenting them.
        let loose = SegmentParams {
            max_area_frac: 1.0,
            ..SegmentParams::default()
        };
        let letter_vectors: Vec<(char, Vec<f64>)> = alphabet(10)
            .into_iter()
            .map(|c| {
                let p = render_page(&c.to_string(), 1);
                let cr = segment_page(&p, &loose, "l", 0).unwrap();
                (c, embed_patch(&cr[0], 32).unwrap().values)
            })
            .collect();
        let recovered: String = crops
            .iter()
            .map(|crop| {
                let v = embed_patch(crop, 32).unwrap().values;
                letter_vectors
                    .iter()
                    .max_by(|(_, a), (_, b)| {
                        cosine_similarity(&v, a)
                            .partial_cmp(&cosine_similarity(&v, b))
                            .unwrap()
                    })
                    .map(|(c, _)| *c)
                    .unwrap()
            })
            .collect();
        assert_eq!(recovered, text);
    }

    #[test]
    fn two_template_page_clusters_with_perfect_purity() {
        let text = "abbababbaabbabab".repeat(3);
        let page = render_page(&text, 16);
        let crops = segment_page(&page, &SegmentParams::default(), "t", 0).unwrap();
        assert_eq!(crops.len(), text.chars().count());
        let vectors: Vec<_> = crops
            .iter()
            .map(|c| crate::embedding::embed_patch(c, 32).unwrap())
            .collect();
        let clustering =
            crate::clustering::Clustering::fit("t", &vectors, 2, 42, 300, 1e-6).unwrap();
        let labels: Vec<char> = text.chars().collect();
        let purity = crate::clustering::cluster_purity(&clustering, &labels).unwrap();
        assert_eq!(purity, 1.0);
    }

    #[test]
    fn generation_is_deterministic_and_covered() {
        let params = SynthParams::default();
        let a = generate(&params).unwrap();
        let b = generate(&params).unwrap();
        assert_eq!(a.witnesses.len(), 8);
        for (x, y) in a.witnesses.iter().zip(b.witnesses.iter()) {
            assert_eq!(x.id, y.id);
            assert_eq!(x.text, y.text);
        }
        assert_eq!(a.gold.values, b.gold.values);
        let letters = alphabet(params.alphabet_size);
        for w in &a.witnesses {
            let chars: Vec<char> = w.text.chars().collect();
            assert!(covers_alphabet(&chars, &letters), "{} missing letters", w.id);
        }
    }

    #[test]
    fn different_seeds_differ() {
        let a = generate(&SynthParams::default()).unwrap();
        let b = generate(&SynthParams {
            seed: 43,
            ..SynthParams::default()
        })
        .unwrap();
        assert_ne!(a.witnesses[0].text, b.witnesses[0].text);
    }

    #[test]
    fn gold_matrix_is_positive_off_diagonal() {
        let t = generate(&SynthParams::default()).unwrap();
        for (i, j, v) in t.gold.upper_triangle() {
            assert!(v > 0.0, "witnesses {i} and {j} are identical");
        }
    }

    #[test]
    fn parameter_validation() {
        let bad = SynthParams {
            witnesses: 1,
            ..SynthParams::default()
        };
        assert!(matches!(generate(&bad), Err(SynthError::TooFewWitnesses(1))));
        let bad = SynthParams {
            alphabet_size: 13,
            ..SynthParams::default()
        };
        assert!(matches!(generate(&bad), Err(SynthError::BadAlphabet { .. })));
        let bad = SynthParams {
            text_len: 10,
            ..SynthParams::default()
        };
        assert!(matches!(generate(&bad), Err(SynthError::TextTooShort { .. })));
        let bad = SynthParams {
            edits_min: 9,
            edits_max: 3,
            ..SynthParams::default()
        };
        assert!(matches!(generate(&bad), Err(SynthError::BadEditRange(9, 3))));
    }
}
