//! The whole pipeline, page images to stemma, through the file-based stages.
//!
//! Generates a synthetic tradition, runs segment -> embed -> cluster ->
//! distances -> tree on its page images, and compares the resulting visual
//! distance ranking against the gold Levenshtein ranking.
//!
//! Run with: cargo run --example end_to_end

use scriptoria::mapping::DistanceMatrix;
use scriptoria::pipeline::{
    gold_matrix_from_transcripts, run_full_pipeline, run_synth, run_tree, TreeMethod,
};
use scriptoria::synth::SynthParams;
use scriptoria::textmetrics::rank_report;

fn main() {
    let base = std::env::temp_dir().join("scriptoria-demo-e2e");
    let corpus_dir = base.join("corpus");
    let run_dir = base.join("run");

    let params = SynthParams {
        witnesses: 6,
        ..SynthParams::default()
    };
    let manifest = run_synth(&params, &corpus_dir).unwrap();
    println!("corpus: {} witnesses in {}", manifest.manuscripts.len(), corpus_dir.display());

    let matrix = run_full_pipeline(&manifest, &run_dir).unwrap();
    println!("\nvisual distance matrix:\n{}", matrix.to_csv());

    let nj_path = run_tree(&run_dir.join("distances.csv"), TreeMethod::NeighborJoining, &run_dir)
        .unwrap();
    let stemma = std::fs::read_to_string(&nj_path).unwrap();
    println!("stemma (neighbor joining): {stemma}");

    let gold = gold_matrix_from_transcripts(&manifest).unwrap();
    let report = rank_report(&gold, &matrix).unwrap();
    println!("rank agreement with gold Levenshtein distances:");
    for p in &report.pairs {
        println!(
            "  {}--{}: visual rank {:>4.1}, gold rank {:>4.1}",
            p.label_a, p.label_b, p.test_rank, p.gold_rank
        );
    }
    if let Some(rho) = report.spearman {
        println!("spearman: {rho:.4}");
    }

    // The gold matrix itself yields the reference stemma for comparison.
    let gold_csv = corpus_dir.join("gold_distances.csv");
    let gold_nj = run_tree(&gold_csv, TreeMethod::NeighborJoining, &corpus_dir).unwrap();
    println!(
        "reference stemma from gold distances: {}",
        std::fs::read_to_string(&gold_nj).unwrap()
    );
    let _ = DistanceMatrix::from_csv_path(&gold_csv).unwrap();
}
