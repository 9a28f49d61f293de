//! Image-native stemmatology toolkit.
//!
//! `scriptoria` builds stemmata (copy-history trees) of manuscript witnesses
//! from page images alone, without transcription. The pipeline:
//!
//! 1. [`imaging`] — binarize pages and segment them into glyph crops
//!    (Otsu threshold, morphological opening, connected components,
//!    reading-order sort).
//! 2. [`embedding`] — turn glyph crops into fixed-length feature vectors
//!    (built-in letterbox patch embedder, or import of externally computed
//!    vectors, e.g. from a CNN).
//! 3. [`clustering`] — per-manuscript k-means over glyph vectors, exposing
//!    centroids and relative cluster frequencies.
//! 4. [`mapping`] — match clusters across manuscript pairs by centroid
//!    cosine similarity (optimal one-to-one assignment), discard the worst
//!    matches, and average frequency differences into a distance matrix.
//! 5. [`stemma`] — neighbor joining and UPGMA over distance matrices,
//!    serialized as Newick.
//!
//! [`textmetrics`] provides the evaluation side: Levenshtein, CER under
//! configurable normalization, diacritics-only CER, edit-alignment confusion
//! statistics, letter-distribution distances, Spearman rank correlation and
//! rank reports comparing a distance matrix against a gold standard.
//!
//! [`synth`] generates synthetic textual traditions with known gold distances
//! and renders them as clean page images, so the whole pipeline can be
//! validated end to end without real manuscript data. [`pipeline`] wires the
//! stages together behind file-based inputs and outputs; the `scriptoria`
//! binary is a thin CLI over it.
//!
//! Each major capability has a runnable example under `examples/`.

pub mod clustering;
pub mod embedding;
pub mod imaging;
pub mod mapping;
pub mod pipeline;
pub mod stemma;
pub mod synth;
pub mod textmetrics;

pub use clustering::{ClusterFrequencies, Clustering};
pub use embedding::{EmbeddingConfig, EmbeddingMethod, FeatureVector};
pub use imaging::{BinaryImage, BoundingBox, GlyphCrop, RasterImage, SegmentParams};
pub use mapping::{ClusterMapping, DistanceMatrix, NConvention};
pub use stemma::PhyloTree;
pub use textmetrics::{ConfusionStats, LetterDistribution, NormalizationOptions};
