//! Glyph feature vectors.
//!
//! Two routes produce the fixed-dimension vectors consumed by clustering:
//! a built-in letterbox patch embedder over the binary crops, and import of
//! externally computed vectors (e.g. CNN features) from a sidecar file with
//! one `glyph_id v1 .. vD` record per line.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::GlyphCrop;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("patch size must be >= 4, got {0}")]
    PatchTooSmall(u32),
    #[error("failed to read embedding file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("embedding file line {line}: cannot parse record")]
    Parse { line: usize },
    #[error("embedding file is missing glyph {id}")]
    MissingGlyph { id: String },
    #[error("glyph {id} appears more than once in the embedding file")]
    DuplicateGlyph { id: String },
    #[error("glyph {id} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        id: String,
        expected: usize,
        got: usize,
    },
    #[error("glyph {id} has a non-finite value at position {position}")]
    NonFinite { id: String, position: usize },
}

/// Fixed-dimension real feature vector for one glyph.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub manuscript_id: String,
    /// Reading-order index of the glyph this vector describes.
    pub index: usize,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn glyph_id(&self) -> String {
        crate::imaging::glyph_id(&self.manuscript_id, self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "method")]
pub enum EmbeddingMethod {
    /// Letterbox the binary patch into an SxS grid and flatten it.
    Patch,
    /// Load vectors computed elsewhere from a sidecar file.
    External { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    #[serde(flatten)]
    pub method: EmbeddingMethod,
    /// Letterbox side length S; the patch embedding has dimension S^2.
    pub patch_size: u32,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            method: EmbeddingMethod::Patch,
            patch_size: 32,
        }
    }
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        if self.patch_size < 4 {
            return Err(EmbeddingError::PatchTooSmall(self.patch_size));
        }
        Ok(())
    }
}

/// Bilinear resize of a single-channel f64 buffer.
fn resize_bilinear(src: &[f64], sw: usize, sh: usize, dw: usize, dh: usize) -> Vec<f64> {
    let mut out = vec![0.0; dw * dh];
    let sx_ratio = sw as f64 / dw as f64;
    let sy_ratio = sh as f64 / dh as f64;
    for dy in 0..dh {
        let fy = ((dy as f64 + 0.5) * sy_ratio - 0.5).clamp(0.0, (sh - 1) as f64);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(sh - 1);
        let wy = fy - y0 as f64;
        for dx in 0..dw {
            let fx = ((dx as f64 + 0.5) * sx_ratio - 0.5).clamp(0.0, (sw - 1) as f64);
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(sw - 1);
            let wx = fx - x0 as f64;
            let top = src[y0 * sw + x0] * (1.0 - wx) + src[y0 * sw + x1] * wx;
            let bot = src[y1 * sw + x0] * (1.0 - wx) + src[y1 * sw + x1] * wx;
            out[dy * dw + dx] = top * (1.0 - wy) + bot * wy;
        }
    }
    out
}

/// Letterbox patch embedding.
///
/// The tight foreground box of the crop is scaled (aspect preserved, bilinear,
/// foreground 1.0 / background 0.0) into an SxS square, centered with
/// background fill, flattened row-major and L2-normalized. An all-background
/// crop embeds as the zero vector of length S^2.
///
/// Working from the tight foreground box makes the embedding invariant to
/// where the glyph sits inside its padded crop.
pub fn embed_patch(crop: &GlyphCrop, patch_size: u32) -> Result<FeatureVector, EmbeddingError> {
    if patch_size < 4 {
        return Err(EmbeddingError::PatchTooSmall(patch_size));
    }
    let s = patch_size as usize;
    let p = &crop.patch;
    let (w, h) = (p.width as usize, p.height as usize);

    let mut min_x = w;
    let mut min_y = h;
    let mut max_x = 0usize;
    let mut max_y = 0usize;
    let mut any = false;
    for y in 0..h {
        for x in 0..w {
            if p.mask[y * w + x] {
                any = true;
                min_x = min_x.min(x);
                max_x = max_x.max(x);
                min_y = min_y.min(y);
                max_y = max_y.max(y);
            }
        }
    }
    if !any {
        return Ok(FeatureVector {
            manuscript_id: crop.manuscript_id.clone(),
            index: crop.index,
            values: vec![0.0; s * s],
        });
    }

    let tw = max_x - min_x + 1;
    let th = max_y - min_y + 1;
    let mut tight = vec![0.0f64; tw * th];
    for y in 0..th {
        for x in 0..tw {
            if p.mask[(min_y + y) * w + (min_x + x)] {
                tight[y * tw + x] = 1.0;
            }
        }
    }

    let scale = s as f64 / tw.max(th) as f64;
    let dw = ((tw as f64 * scale).round() as usize).clamp(1, s);
    let dh = ((th as f64 * scale).round() as usize).clamp(1, s);
    let resized = resize_bilinear(&tight, tw, th, dw, dh);

    let off_x = (s - dw) / 2;
    let off_y = (s - dh) / 2;
    let mut values = vec![0.0f64; s * s];
    for y in 0..dh {
        for x in 0..dw {
            values[(off_y + y) * s + (off_x + x)] = resized[y * dw + x];
        }
    }

    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in &mut values {
            *v /= norm;
        }
    }
    Ok(FeatureVector {
        manuscript_id: crop.manuscript_id.clone(),
        index: crop.index,
        values,
    })
}

/// Embed every crop with the configured method. Each glyph gets exactly one
/// vector, in crop order; any problem is an error rather than a dropped glyph.
pub fn embed_all(
    crops: &[GlyphCrop],
    cfg: &EmbeddingConfig,
) -> Result<Vec<FeatureVector>, EmbeddingError> {
    cfg.validate()?;
    match &cfg.method {
        EmbeddingMethod::Patch => crops
            .iter()
            .map(|c| embed_patch(c, cfg.patch_size))
            .collect(),
        EmbeddingMethod::External { path } => load_external_embeddings(path, crops),
    }
}

/// Load externally computed vectors for `crops` from a sidecar file.
///
/// Format: one record per line, `glyph_id` then D decimal floats, single-space
/// separated. Every crop must be covered exactly once; all vectors must share
/// one dimension and contain only finite values. Records for glyphs outside
/// `crops` are ignored, so one file may cover several manuscripts.
pub fn load_external_embeddings(
    path: &Path,
    crops: &[GlyphCrop],
) -> Result<Vec<FeatureVector>, EmbeddingError> {
    let text = fs::read_to_string(path).map_err(|source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut by_id: HashMap<String, Vec<f64>> = HashMap::new();
    for (line_no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(' ');
        let id = parts
            .next()
            .filter(|s| !s.is_empty())
            .ok_or(EmbeddingError::Parse { line: line_no + 1 })?
            .to_string();
        let mut values = Vec::new();
        for (pos, tok) in parts.enumerate() {
            let v: f64 = tok
                .parse()
                .map_err(|_| EmbeddingError::Parse { line: line_no + 1 })?;
            if !v.is_finite() {
                return Err(EmbeddingError::NonFinite {
                    id,
                    position: pos,
                });
            }
            values.push(v);
        }
        if values.is_empty() {
            return Err(EmbeddingError::Parse { line: line_no + 1 });
        }
        if by_id.insert(id.clone(), values).is_some() {
            return Err(EmbeddingError::DuplicateGlyph { id });
        }
    }

    let mut out = Vec::with_capacity(crops.len());
    let mut dim: Option<usize> = None;
    for crop in crops {
        let id = crop.glyph_id();
        let values = by_id
            .get(&id)
            .cloned()
            .ok_or_else(|| EmbeddingError::MissingGlyph { id: id.clone() })?;
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(EmbeddingError::DimensionMismatch {
                    id,
                    expected: d,
                    got: values.len(),
                })
            }
            _ => {}
        }
        out.push(FeatureVector {
            manuscript_id: crop.manuscript_id.clone(),
            index: crop.index,
            values,
        });
    }
    Ok(out)
}

/// Write vectors in the sidecar format read by [`load_external_embeddings`].
/// Floats are printed in shortest round-trip form, so write/load is lossless.
pub fn format_embeddings(vectors: &[FeatureVector]) -> String {
    let mut out = String::new();
    for v in vectors {
        out.push_str(&v.glyph_id());
        for x in &v.values {
            write!(out, " {x}").expect("string write");
        }
        out.push('\n');
    }
    out
}
