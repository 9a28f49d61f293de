//! File-based pipeline orchestration.
//!
//! Every stage reads its inputs from plain files and writes plain files, so
//! stages can be re-run, inspected or replaced individually (for instance,
//! hand-corrected crops can be dropped into a crops directory and the rest of
//! the pipeline continues from there). Identical manifests and seeds produce
//! byte-identical outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::{cluster_frequencies, ClusterFrequencies, Clustering, ClusteringError};
use crate::embedding::{embed_all, EmbeddingConfig, EmbeddingError, FeatureVector};
use crate::imaging::{
    segment_page, BinaryImage, BoundingBox, GlyphCrop, ImagingError, RasterImage, SegmentParams,
};
use crate::mapping::{pairwise_distances, DistanceMatrix, MappingError, NConvention};
use crate::stemma::{neighbor_joining, to_newick, upgma, StemmaError};
use crate::synth::{generate, render_page, SynthError, SynthParams, DEFAULT_COLS};
use crate::textmetrics::{
    cer, levenshtein, normalize_text, rank_report, NormalizationOptions, RankReport,
    TextMetricsError,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Clustering(#[from] ClusteringError),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Stemma(#[from] StemmaError),
    #[error(transparent)]
    TextMetrics(#[from] TextMetricsError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{stage} failed for {failed} of {total} manuscripts:\n{summary}")]
    PartialFailure {
        stage: String,
        failed: usize,
        total: usize,
        summary: String,
    },
    #[error("failed to encode image {path}: {source}")]
    ImageEncode {
        path: String,
        source: image::ImageError,
    },
}

impl PipelineError {
    /// CLI exit code: 1 for input problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            // Bad k or iteration settings are caller mistakes, not numerics.
            PipelineError::Clustering(
                ClusteringError::KTooSmall(_)
                | ClusteringError::KTooLarge { .. }
                | ClusteringError::NoIterations
                | ClusteringError::BadTolerance,
            ) => 1,
            PipelineError::Clustering(_)
            | PipelineError::Mapping(_)
            | PipelineError::Stemma(_)
            | PipelineError::TextMetrics(_) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PipelineError::Io { .. } => "io",
            PipelineError::Json { .. } => "json",
            PipelineError::Manifest(_) => "manifest",
            PipelineError::Imaging(_) => "imaging",
            PipelineError::Embedding(_) => "embedding",
            PipelineError::Clustering(_) => "clustering",
            PipelineError::Mapping(_) => "mapping",
            PipelineError::Stemma(_) => "stemma",
            PipelineError::TextMetrics(_) => "textmetrics",
            PipelineError::Synth(_) => "synth",
            PipelineError::PartialFailure { .. } => "partial-failure",
            PipelineError::ImageEncode { .. } => "image-encode",
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn json_err(path: &Path) -> impl FnOnce(serde_json::Error) -> PipelineError + '_ {
    move |source| PipelineError::Json {
        path: path.display().to_string(),
        source,
    }
}

/// One witness in the corpus manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManuscriptEntry {
    #[serde(rename = "manuscript_id", alias = "id")]
    pub id: String,
    pub image_paths: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_transcript_path: Option<PathBuf>,
}

/// Run parameters shared by all stages; everything is overridable from the
/// CLI and echoed into run records.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunParams {
    /// Cluster count, uniform across all manuscripts in a run.
    pub k: Option<usize>,
    pub seed: u64,
    pub discard_fraction: f64,
    pub n_convention: NConvention,
    pub embedding: EmbeddingConfig,
    pub imaging: SegmentParams,
    pub max_iter: usize,
    pub tol: f64,
    /// Worker threads for per-manuscript stages; outputs do not depend on it.
    pub jobs: usize,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            k: None,
            seed: 42,
            discard_fraction: 0.1,
            n_convention: NConvention::Retained,
            embedding: EmbeddingConfig::default(),
            imaging: SegmentParams::default(),
            max_iter: 300,
            tol: 1e-6,
            jobs: 1,
        }
    }
}

/// Corpus manifest: the declarative input of a run. Relative paths are
/// resolved against the manifest file's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub manuscripts: Vec<ManuscriptEntry>,
    #[serde(default)]
    pub params: RunParams,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl CorpusManifest {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut manifest: CorpusManifest =
            serde_json::from_str(&text).map_err(json_err(path))?;
        manifest.base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.manuscripts.is_empty() {
            return Err(PipelineError::Manifest("no manuscripts listed".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for m in &self.manuscripts {
            if !seen.insert(&m.id) {
                return Err(PipelineError::Manifest(format!(
                    "duplicate manuscript id {}",
                    m.id
                )));
            }
            if m.id.is_empty() || m.id.contains(['/', ',', ':', ';', '(', ')']) {
                return Err(PipelineError::Manifest(format!(
                    "manuscript id {:?} contains reserved characters",
                    m.id
                )));
            }
        }
        if !(0.0..1.0).contains(&self.params.discard_fraction) {
            return Err(PipelineError::Manifest(format!(
                "discard_fraction must be in [0, 1), got {}",
                self.params.discard_fraction
            )));
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

/// Reproducibility record written next to every stage output: full manifest
/// snapshot, stage name, tool version and a timestamp.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub tool: String,
    pub version: String,
    pub stage: String,
    pub unix_time: u64,
    pub manifest: CorpusManifestSnapshot,
}

/// The manifest as embedded in run records (without the load-time base dir).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusManifestSnapshot {
    pub manuscripts: Vec<ManuscriptEntry>,
    pub params: RunParams,
}

fn write_run_record(
    dir: &Path,
    stage: &str,
    manifest: &CorpusManifest,
) -> Result<(), PipelineError> {
    let record = RunRecord {
        tool: "scriptoria".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        stage: stage.into(),
        unix_time: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        manifest: CorpusManifestSnapshot {
            manuscripts: manifest.manuscripts.clone(),
            params: manifest.params.clone(),
        },
    };
    let path = dir.join(format!("run_record_{stage}.json"));
    let text = serde_json::to_string_pretty(&record).map_err(json_err(&path))?;
    fs::write(&path, text).map_err(io_err(&path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let text = serde_json::to_string_pretty(value).map_err(json_err(path))?;
    fs::write(path, text).map_err(io_err(path))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, PipelineError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(json_err(path))
}

/// Run a per-manuscript closure over `count` items with up to `jobs` worker
/// threads. Results are ordered by item index, so output never depends on
/// scheduling.
fn run_per_manuscript<T, F>(count: usize, jobs: usize, f: F) -> Vec<Result<T, PipelineError>>
where
    T: Send,
    F: Fn(usize) -> Result<T, PipelineError> + Sync,
{
    let jobs = jobs.max(1).min(count.max(1));
    if jobs <= 1 {
        return (0..count).map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<T, PipelineError>>>> =
        Mutex::new((0..count).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= count {
                    break;
                }
                let r = f(i);
                if let Some(slot) = results.lock().expect("poisoned").get_mut(i) {
                    *slot = Some(r);
                }
            });
        }
    });
    results
        .into_inner()
        .expect("poisoned")
        .into_iter()
        .map(|r| r.expect("all items processed"))
        .collect()
}

fn collect_failures<T>(
    stage: &str,
    ids: &[String],
    results: Vec<Result<T, PipelineError>>,
) -> Result<Vec<T>, PipelineError> {
    let total = results.len();
    let mut ok = Vec::with_capacity(total);
    let mut failures = Vec::new();
    for (id, r) in ids.iter().zip(results) {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => failures.push(format!("  {id}: {e}")),
        }
    }
    if failures.is_empty() {
        Ok(ok)
    } else {
        Err(PipelineError::PartialFailure {
            stage: stage.into(),
            failed: failures.len(),
            total,
            summary: failures.join("\n"),
        })
    }
}

// ---------------------------------------------------------------------------
// Stage files
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CropRecord {
    pub index: usize,
    pub page: usize,
    pub file: String,
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
    pub line: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CropsFile {
    pub manuscript_id: String,
    pub params: SegmentParams,
    pub crops: Vec<CropRecord>,
}

fn write_binary_png(path: &Path, img: &BinaryImage) -> Result<(), PipelineError> {
    let data: Vec<u8> = img.mask.iter().map(|&m| if m { 0u8 } else { 255 }).collect();
    let buf = image::GrayImage::from_raw(img.width, img.height, data).expect("sized buffer");
    buf.save(path).map_err(|source| PipelineError::ImageEncode {
        path: path.display().to_string(),
        source,
    })
}

fn write_gray_png(path: &Path, img: &RasterImage) -> Result<(), PipelineError> {
    let buf = image::GrayImage::from_raw(img.width, img.height, img.data.clone())
        .expect("sized buffer");
    buf.save(path).map_err(|source| PipelineError::ImageEncode {
        path: path.display().to_string(),
        source,
    })
}

fn read_binary_png(path: &Path) -> Result<BinaryImage, PipelineError> {
    let raster = RasterImage::from_path(path)?;
    let gray = crate::imaging::to_grayscale(&raster)?;
    let mask = gray.data.iter().map(|&p| p < 128).collect();
    Ok(BinaryImage::new(gray.width, gray.height, mask)?)
}

/// Segment every manuscript into crops + `crops.json`. Manuscripts fail
/// independently; a summary error is returned after all have been attempted.
pub fn run_segment(manifest: &CorpusManifest, out_dir: &Path) -> Result<Vec<usize>, PipelineError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let params = &manifest.params.imaging;
    let ids: Vec<String> = manifest.manuscripts.iter().map(|m| m.id.clone()).collect();

    let results = run_per_manuscript(manifest.manuscripts.len(), manifest.params.jobs, |mi| {
        let entry = &manifest.manuscripts[mi];
        if entry.image_paths.is_empty() {
            return Err(PipelineError::Manifest(format!(
                "manuscript {} lists no images",
                entry.id
            )));
        }
        let ms_dir = out_dir.join(&entry.id);
        let crop_dir = ms_dir.join("crops");
        fs::create_dir_all(&crop_dir).map_err(io_err(&crop_dir))?;

        let mut records = Vec::new();
        let mut start_index = 0usize;
        for (page, rel) in entry.image_paths.iter().enumerate() {
            let path = manifest.resolve(rel);
            let img = RasterImage::from_path(&path)?;
            let crops = segment_page(&img, params, &entry.id, start_index)?;
            start_index += crops.len();
            for crop in &crops {
                let file = format!("{}.png", crop.glyph_id());
                write_binary_png(&crop_dir.join(&file), &crop.patch)?;
                records.push(CropRecord {
                    index: crop.index,
                    page,
                    file,
                    x: crop.bbox.x,
                    y: crop.bbox.y,
                    w: crop.bbox.w,
                    h: crop.bbox.h,
                    line: crop.line,
                });
            }
        }
        let crops_file = CropsFile {
            manuscript_id: entry.id.clone(),
            params: params.clone(),
            crops: records,
        };
        write_json(&ms_dir.join("crops.json"), &crops_file)?;
        Ok(crops_file.crops.len())
    });

    write_run_record(out_dir, "segment", manifest)?;
    collect_failures("segment", &ids, results)
}

/// Reload the crops of one manuscript from a segment-stage output directory.
pub fn load_crops(out_dir: &Path, manuscript_id: &str) -> Result<Vec<GlyphCrop>, PipelineError> {
    let ms_dir = out_dir.join(manuscript_id);
    let crops_file: CropsFile = read_json(&ms_dir.join("crops.json"))?;
    let mut crops = Vec::with_capacity(crops_file.crops.len());
    for rec in &crops_file.crops {
        let patch = read_binary_png(&ms_dir.join("crops").join(&rec.file))?;
        crops.push(GlyphCrop {
            manuscript_id: crops_file.manuscript_id.clone(),
            index: rec.index,
            bbox: BoundingBox {
                x: rec.x,
                y: rec.y,
                w: rec.w,
                h: rec.h,
            },
            line: rec.line,
            patch,
        });
    }
    crops.sort_by_key(|c| c.index);
    Ok(crops)
}

/// Embed every manuscript's crops and write `embeddings.txt` sidecars.
pub fn run_embed(manifest: &CorpusManifest, out_dir: &Path) -> Result<Vec<usize>, PipelineError> {
    let cfg = &manifest.params.embedding;
    let ids: Vec<String> = manifest.manuscripts.iter().map(|m| m.id.clone()).collect();
    let results = run_per_manuscript(manifest.manuscripts.len(), manifest.params.jobs, |mi| {
        let entry = &manifest.manuscripts[mi];
        let crops = load_crops(out_dir, &entry.id)?;
        let mut cfg = cfg.clone();
        if let crate::embedding::EmbeddingMethod::External { path } = &cfg.method {
            cfg.method = crate::embedding::EmbeddingMethod::External {
                path: manifest.resolve(path),
            };
        }
        let vectors = embed_all(&crops, &cfg)?;
        let text = crate::embedding::format_embeddings(&vectors);
        let path = out_dir.join(&entry.id).join("embeddings.txt");
        fs::write(&path, text).map_err(io_err(&path))?;
        Ok(vectors.len())
    });
    write_run_record(out_dir, "embed", manifest)?;
    collect_failures("embed", &ids, results)
}

/// Reload embedding sidecars written by [`run_embed`]. Vectors come back in
/// glyph-index order.
pub fn load_embeddings(
    out_dir: &Path,
    manuscript_id: &str,
) -> Result<Vec<FeatureVector>, PipelineError> {
    let path = out_dir.join(manuscript_id).join("embeddings.txt");
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let mut vectors = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(' ');
        let id = parts
            .next()
            .ok_or(EmbeddingError::Parse { line: line_no + 1 })
            .map_err(PipelineError::from)?;
        let (ms, idx) = id
            .rsplit_once('_')
            .ok_or(EmbeddingError::Parse { line: line_no + 1 })
            .map_err(PipelineError::from)?;
        let index: usize = idx
            .parse()
            .map_err(|_| PipelineError::from(EmbeddingError::Parse { line: line_no + 1 }))?;
        let values: Result<Vec<f64>, _> = parts.map(|t| t.parse::<f64>()).collect();
        let values =
            values.map_err(|_| PipelineError::from(EmbeddingError::Parse { line: line_no + 1 }))?;
        vectors.push(FeatureVector {
            manuscript_id: ms.to_string(),
            index,
            values,
        });
    }
    vectors.sort_by_key(|v| v.index);
    Ok(vectors)
}

/// `clusters.json` payload: the clustering plus the iteration parameters it
/// was produced with. Reads back as a plain [`Clustering`].
#[derive(Serialize)]
struct ClustersFile<'a> {
    #[serde(flatten)]
    clustering: &'a Clustering,
    max_iter: usize,
    tol: f64,
}

/// Cluster every manuscript's vectors with the run's uniform k and write
/// `clusters.json`. With `snapshots`, crop images are also copied into
/// `cluster_<i>/` directories for manual inspection.
pub fn run_cluster(
    manifest: &CorpusManifest,
    out_dir: &Path,
    snapshots: bool,
) -> Result<Vec<Clustering>, PipelineError> {
    let k = manifest
        .params
        .k
        .ok_or_else(|| PipelineError::Manifest("k is required for clustering".into()))?;
    let ids: Vec<String> = manifest.manuscripts.iter().map(|m| m.id.clone()).collect();
    let results = run_per_manuscript(manifest.manuscripts.len(), manifest.params.jobs, |mi| {
        let entry = &manifest.manuscripts[mi];
        let vectors = load_embeddings(out_dir, &entry.id)?;
        let clustering = Clustering::fit(
            &entry.id,
            &vectors,
            k,
            manifest.params.seed,
            manifest.params.max_iter,
            manifest.params.tol,
        )?;
        write_json(
            &out_dir.join(&entry.id).join("clusters.json"),
            &ClustersFile {
                clustering: &clustering,
                max_iter: manifest.params.max_iter,
                tol: manifest.params.tol,
            },
        )?;
        if snapshots {
            let crops_file: CropsFile =
                read_json(&out_dir.join(&entry.id).join("crops.json"))?;
            for (pos, rec) in crops_file.crops.iter().enumerate() {
                let cluster = clustering.assignment[pos];
                let dir = out_dir.join(&entry.id).join(format!("cluster_{cluster}"));
                fs::create_dir_all(&dir).map_err(io_err(&dir))?;
                let from = out_dir.join(&entry.id).join("crops").join(&rec.file);
                let to = dir.join(&rec.file);
                fs::copy(&from, &to).map_err(io_err(&from))?;
            }
        }
        Ok(clustering)
    });
    write_run_record(out_dir, "cluster", manifest)?;
    collect_failures("cluster", &ids, results)
}

/// Compute the pairwise distance matrix from persisted `clusters.json` files
/// and write `distances.csv` plus one `mapping_<A>_<B>.json` per pair.
pub fn run_distances(
    manifest: &CorpusManifest,
    out_dir: &Path,
) -> Result<DistanceMatrix, PipelineError> {
    let mut clusterings = Vec::with_capacity(manifest.manuscripts.len());
    for entry in &manifest.manuscripts {
        let c: Clustering = read_json(&out_dir.join(&entry.id).join("clusters.json"))?;
        clusterings.push(c);
    }
    let frequencies: Result<Vec<ClusterFrequencies>, ClusteringError> =
        clusterings.iter().map(cluster_frequencies).collect();
    let frequencies = frequencies?;
    let (matrix, mappings) = pairwise_distances(
        &clusterings,
        &frequencies,
        manifest.params.discard_fraction,
        manifest.params.n_convention,
    )?;
    let csv_path = out_dir.join("distances.csv");
    fs::write(&csv_path, matrix.to_csv()).map_err(io_err(&csv_path))?;
    for mapping in &mappings {
        let path = out_dir.join(format!("mapping_{}_{}.json", mapping.pair.0, mapping.pair.1));
        write_json(&path, mapping)?;
    }
    write_run_record(out_dir, "distances", manifest)?;
    Ok(matrix)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeMethod {
    NeighborJoining,
    Upgma,
}

/// Build a tree from a distances CSV and write the Newick file
/// (`stemma_nj.nwk` or `tree_upgma.nwk`). Returns the output path.
pub fn run_tree(
    distances_csv: &Path,
    method: TreeMethod,
    out_dir: &Path,
) -> Result<PathBuf, PipelineError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let matrix = DistanceMatrix::from_csv_path(distances_csv)?;
    let (tree, name) = match method {
        TreeMethod::NeighborJoining => (neighbor_joining(&matrix)?, "stemma_nj.nwk"),
        TreeMethod::Upgma => (upgma(&matrix)?, "tree_upgma.nwk"),
    };
    let path = out_dir.join(name);
    fs::write(&path, to_newick(&tree) + "\n").map_err(io_err(&path))?;
    Ok(path)
}

/// Per-page CER rows plus the final mean row, formatted as CSV.
pub fn run_eval_cer(
    gold_paths: &[PathBuf],
    hyp_paths: &[PathBuf],
    opts: &NormalizationOptions,
) -> Result<String, PipelineError> {
    if gold_paths.len() != hyp_paths.len() || gold_paths.is_empty() {
        return Err(PipelineError::Manifest(format!(
            "need matching nonempty gold/hypothesis lists, got {} and {}",
            gold_paths.len(),
            hyp_paths.len()
        )));
    }
    let mut out = String::from("page,gold,hypothesis,cer\n");
    let mut sum = 0.0;
    for (i, (g, h)) in gold_paths.iter().zip(hyp_paths).enumerate() {
        let gold = fs::read_to_string(g).map_err(io_err(g))?;
        let hyp = fs::read_to_string(h).map_err(io_err(h))?;
        let value = cer(&gold, &hyp, opts)?;
        sum += value;
        out.push_str(&format!(
            "{},{},{},{:.4}\n",
            i + 1,
            g.display(),
            h.display(),
            value
        ));
    }
    out.push_str(&format!("mean,,,{:.4}\n", sum / gold_paths.len() as f64));
    Ok(out)
}

/// Gold Levenshtein distance matrix from the manifest's transcripts, using
/// the default normalization.
pub fn gold_matrix_from_transcripts(
    manifest: &CorpusManifest,
) -> Result<DistanceMatrix, PipelineError> {
    let opts = NormalizationOptions::default();
    let mut texts = Vec::with_capacity(manifest.manuscripts.len());
    for entry in &manifest.manuscripts {
        let p = entry.gold_transcript_path.as_ref().ok_or_else(|| {
            PipelineError::Manifest(format!("manuscript {} has no gold transcript", entry.id))
        })?;
        let path = manifest.resolve(p);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        texts.push(normalize_text(&text, &opts));
    }
    let n = texts.len();
    let mut values = vec![0.0f64; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = levenshtein(&texts[i], &texts[j]) as f64;
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    let labels = manifest.manuscripts.iter().map(|m| m.id.clone()).collect();
    Ok(DistanceMatrix::new(labels, values)?)
}

/// Compare a test distance matrix against a gold matrix; writes
/// `rank_report.csv` into `out_dir` and returns the report.
pub fn run_eval_rank(
    gold: &DistanceMatrix,
    test: &DistanceMatrix,
    out_dir: &Path,
) -> Result<RankReport, PipelineError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let report = rank_report(gold, test)?;
    let path = out_dir.join("rank_report.csv");
    fs::write(&path, report.to_csv()).map_err(io_err(&path))?;
    Ok(report)
}

/// Generate a synthetic tradition on disk: witness texts, rendered pages,
/// the gold distance matrix and a ready-to-run corpus manifest.
pub fn run_synth(params: &SynthParams, out_dir: &Path) -> Result<CorpusManifest, PipelineError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let tradition = generate(params)?;

    let mut manuscripts = Vec::with_capacity(tradition.witnesses.len());
    for w in &tradition.witnesses {
        let text_path = out_dir.join(format!("{}.txt", w.id));
        fs::write(&text_path, &w.text).map_err(io_err(&text_path))?;
        let page = render_page(&w.text, DEFAULT_COLS);
        let png_path = out_dir.join(format!("{}.png", w.id));
        write_gray_png(&png_path, &page)?;
        manuscripts.push(ManuscriptEntry {
            id: w.id.clone(),
            image_paths: vec![PathBuf::from(format!("{}.png", w.id))],
            gold_transcript_path: Some(PathBuf::from(format!("{}.txt", w.id))),
        });
    }

    let gold_path = out_dir.join("gold_distances.csv");
    fs::write(&gold_path, tradition.gold.to_csv()).map_err(io_err(&gold_path))?;

    let manifest = CorpusManifest {
        manuscripts,
        params: RunParams {
            k: Some(params.alphabet_size),
            seed: params.seed,
            ..RunParams::default()
        },
        base_dir: out_dir.to_path_buf(),
    };
    let manifest_path = out_dir.join("corpus.json");
    write_json(&manifest_path, &manifest)?;
    write_run_record(out_dir, "synth", &manifest)?;
    Ok(manifest)
}

/// Convenience wrapper: run segment, embed, cluster and distances in order.
pub fn run_full_pipeline(
    manifest: &CorpusManifest,
    out_dir: &Path,
) -> Result<DistanceMatrix, PipelineError> {
    run_segment(manifest, out_dir)?;
    run_embed(manifest, out_dir)?;
    run_cluster(manifest, out_dir, false)?;
    run_distances(manifest, out_dir)
}
