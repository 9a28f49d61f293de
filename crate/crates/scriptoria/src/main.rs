//! Thin command-line front end over [`scriptoria::pipeline`].

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use scriptoria::embedding::EmbeddingMethod;
use scriptoria::mapping::{DistanceMatrix, NConvention};
use scriptoria::pipeline::{
    self, CorpusManifest, PipelineError, TreeMethod,
};
use scriptoria::synth::SynthParams;
use scriptoria::textmetrics::NormalizationOptions;

#[derive(Parser)]
#[command(
    name = "scriptoria",
    version,
    about = "Image-native stemmatology: from page images to a distance matrix and stemma"
)]
struct Cli {
    /// Emit errors as machine-readable JSON on stderr.
    #[arg(long, global = true)]
    error_json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment page images into ordered glyph crops.
    Segment(StageArgs),
    /// Turn glyph crops into feature vectors.
    Embed(StageArgs),
    /// Cluster each manuscript's vectors with a uniform k.
    Cluster(ClusterArgs),
    /// Match clusters across pairs and compute the distance matrix.
    Distances(StageArgs),
    /// Build a tree from a distance matrix CSV.
    Tree(TreeArgs),
    /// Character error rate over gold/hypothesis text file pairs.
    EvalCer(EvalCerArgs),
    /// Rank agreement of a test distance matrix against a gold standard.
    EvalRank(EvalRankArgs),
    /// Generate a synthetic tradition with known gold distances.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum NConventionArg {
    Retained,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmbeddingArg {
    Patch,
    External,
}

#[derive(Clone, Copy, ValueEnum)]
enum TreeMethodArg {
    Nj,
    Upgma,
}

/// Flag overrides applied on top of the manifest's parameters.
#[derive(Args)]
struct Overrides {
    /// Cluster count (uniform across manuscripts).
    #[arg(long)]
    k: Option<usize>,
    /// Seed for k-means++ initialization.
    #[arg(long)]
    seed: Option<u64>,
    /// Fraction of worst cluster matches to discard.
    #[arg(long)]
    discard_fraction: Option<f64>,
    /// Divisor convention for the frequency-difference distance.
    #[arg(long, value_enum)]
    n_convention: Option<NConventionArg>,
    /// Embedding method.
    #[arg(long, value_enum)]
    embedding: Option<EmbeddingArg>,
    /// Sidecar file for externally computed embeddings.
    #[arg(long)]
    external_path: Option<PathBuf>,
    /// Letterbox side length for the patch embedding.
    #[arg(long)]
    patch_size: Option<u32>,
    /// Morphological opening kernel side (odd).
    #[arg(long)]
    kernel: Option<u32>,
    /// Minimum component area in px^2.
    #[arg(long)]
    min_area: Option<u64>,
    /// Maximum component area as a fraction of the page area.
    #[arg(long)]
    max_area_frac: Option<f64>,
    /// Minimum bounding-box side in px.
    #[arg(long)]
    min_side: Option<u32>,
    /// Crop padding in px.
    #[arg(long)]
    padding: Option<u32>,
    /// Reading-order Y-bin height (default: median box height).
    #[arg(long)]
    bin_height: Option<f64>,
    /// Treat bright pixels as ink instead of dark ones.
    #[arg(long)]
    ink_is_light: bool,
    /// Worker threads for per-manuscript stages.
    #[arg(long)]
    jobs: Option<usize>,
}

impl Overrides {
    fn apply(&self, manifest: &mut CorpusManifest) {
        let p = &mut manifest.params;
        if let Some(k) = self.k {
            p.k = Some(k);
        }
        if let Some(seed) = self.seed {
            p.seed = seed;
        }
        if let Some(f) = self.discard_fraction {
            p.discard_fraction = f;
        }
        if let Some(c) = self.n_convention {
            p.n_convention = match c {
                NConventionArg::Retained => NConvention::Retained,
                NConventionArg::All => NConvention::All,
            };
        }
        if let Some(m) = self.embedding {
            p.embedding.method = match m {
                EmbeddingArg::Patch => EmbeddingMethod::Patch,
                EmbeddingArg::External => EmbeddingMethod::External {
                    path: self.external_path.clone().unwrap_or_default(),
                },
            };
        } else if let Some(path) = &self.external_path {
            p.embedding.method = EmbeddingMethod::External { path: path.clone() };
        }
        if let Some(s) = self.patch_size {
            p.embedding.patch_size = s;
        }
        if let Some(v) = self.kernel {
            p.imaging.kernel = v;
        }
        if let Some(v) = self.min_area {
            p.imaging.min_area = v;
        }
        if let Some(v) = self.max_area_frac {
            p.imaging.max_area_frac = v;
        }
        if let Some(v) = self.min_side {
            p.imaging.min_side = v;
        }
        if let Some(v) = self.padding {
            p.imaging.padding = v;
        }
        if let Some(v) = self.bin_height {
            p.imaging.bin_height = Some(v);
        }
        if self.ink_is_light {
            p.imaging.ink_is_dark = false;
        }
        if let Some(j) = self.jobs {
            p.jobs = j;
        }
    }
}

#[derive(Args)]
struct StageArgs {
    /// Corpus manifest (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory shared by all stages of a run.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    stage: StageArgs,
    /// Also copy crops into per-cluster directories for manual inspection.
    #[arg(long)]
    snapshots: bool,
}

#[derive(Args)]
struct TreeArgs {
    /// Distance matrix CSV (as written by `distances`).
    #[arg(long)]
    distances: PathBuf,
    /// Tree construction method.
    #[arg(long, value_enum, default_value = "nj")]
    method: TreeMethodArg,
    /// Output directory for the Newick file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalCerArgs {
    /// Gold transcript files, one per page.
    #[arg(long, num_args = 1.., required = true)]
    gold: Vec<PathBuf>,
    /// Hypothesis files, aligned with --gold.
    #[arg(long, num_args = 1.., required = true)]
    hyp: Vec<PathBuf>,
    /// Keep letter case.
    #[arg(long)]
    keep_case: bool,
    /// Keep spaces and line breaks.
    #[arg(long)]
    keep_whitespace: bool,
    /// Keep combining marks (diacritics).
    #[arg(long)]
    keep_combining: bool,
    /// Also write the CSV to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalRankArgs {
    /// Test distance matrix CSV.
    #[arg(long)]
    test: PathBuf,
    /// Gold distance matrix CSV.
    #[arg(long, conflicts_with = "config")]
    gold_matrix: Option<PathBuf>,
    /// Corpus manifest with gold transcripts (gold = Levenshtein matrix).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for rank_report.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for texts, pages, gold distances and manifest.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Number of mutated witnesses.
    #[arg(long, default_value_t = 8)]
    witnesses: usize,
    /// Alphabet size (2..=12); also the natural k for clustering.
    #[arg(long, default_value_t = 10)]
    alphabet: usize,
    /// Seed text length in characters.
    #[arg(long, default_value_t = 600)]
    length: usize,
    #[arg(long, default_value_t = 8)]
    edits_min: usize,
    #[arg(long, default_value_t = 80)]
    edits_max: usize,
}

fn load_manifest(args: &StageArgs) -> Result<CorpusManifest, PipelineError> {
    let mut manifest = CorpusManifest::load(&args.config)?;
    args.overrides.apply(&mut manifest);
    manifest.validate()?;
    Ok(manifest)
}

fn run(cli: &Cli) -> Result<(), PipelineError> {
    match &cli.command {
        Command::Segment(args) => {
            let manifest = load_manifest(args)?;
            let counts = pipeline::run_segment(&manifest, &args.out)?;
            for (m, n) in manifest.manuscripts.iter().zip(counts) {
                println!("{}: {} glyphs", m.id, n);
            }
        }
        Command::Embed(args) => {
            let manifest = load_manifest(args)?;
            let counts = pipeline::run_embed(&manifest, &args.out)?;
            for (m, n) in manifest.manuscripts.iter().zip(counts) {
                println!("{}: {} vectors", m.id, n);
            }
        }
        Command::Cluster(args) => {
            let manifest = load_manifest(&args.stage)?;
            let clusterings = pipeline::run_cluster(&manifest, &args.stage.out, args.snapshots)?;
            for c in clusterings {
                let final_sse = c.sse_trace.last().copied().unwrap_or(0.0);
                println!("{}: k={} sse={final_sse:.6}", c.manuscript_id, c.k);
            }
        }
        Command::Distances(args) => {
            let manifest = load_manifest(args)?;
            let matrix = pipeline::run_distances(&manifest, &args.out)?;
            print!("{}", matrix.to_csv());
        }
        Command::Tree(args) => {
            let method = match args.method {
                TreeMethodArg::Nj => TreeMethod::NeighborJoining,
                TreeMethodArg::Upgma => TreeMethod::Upgma,
            };
            let path = pipeline::run_tree(&args.distances, method, &args.out)?;
            let newick = std::fs::read_to_string(&path).unwrap_or_default();
            print!("{newick}");
            eprintln!("wrote {}", path.display());
        }
        Command::EvalCer(args) => {
            let opts = NormalizationOptions {
                lowercase: !args.keep_case,
                strip_whitespace: !args.keep_whitespace,
                strip_combining: !args.keep_combining,
            };
            let csv = pipeline::run_eval_cer(&args.gold, &args.hyp, &opts)?;
            if let Some(out) = &args.out {
                std::fs::write(out, &csv).map_err(|source| PipelineError::Io {
                    path: out.display().to_string(),
                    source,
                })?;
            }
            print!("{csv}");
        }
        Command::EvalRank(args) => {
            let test = DistanceMatrix::from_csv_path(&args.test)?;
            let gold = match (&args.gold_matrix, &args.config) {
                (Some(path), _) => DistanceMatrix::from_csv_path(path)?,
                (None, Some(config)) => {
                    let manifest = CorpusManifest::load(config)?;
                    pipeline::gold_matrix_from_transcripts(&manifest)?
                }
                (None, None) => {
                    return Err(PipelineError::Manifest(
                        "eval-rank needs --gold-matrix or --config".into(),
                    ))
                }
            };
            let report = pipeline::run_eval_rank(&gold, &test, &args.out)?;
            print!("{}", report.to_csv());
        }
        Command::Synth(args) => {
            let params = SynthParams {
                seed: args.seed,
                witnesses: args.witnesses,
                alphabet_size: args.alphabet,
                text_len: args.length,
                edits_min: args.edits_min,
                edits_max: args.edits_max,
            };
            let manifest = pipeline::run_synth(&params, &args.out)?;
            println!(
                "wrote {} witnesses, gold_distances.csv and corpus.json to {}",
                manifest.manuscripts.len(),
                args.out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if cli.error_json {
                let payload = serde_json::json!({
                    "kind": e.kind(),
                    "message": e.to_string(),
                    "exit_code": e.exit_code(),
                });
                eprintln!("{payload}");
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
