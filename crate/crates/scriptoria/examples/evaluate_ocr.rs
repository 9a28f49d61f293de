//! Evaluate OCR outputs: CER, diacritics-only CER, confusion statistics and
//! a model-similarity tree.
//!
//! Three toy "OCR systems" read the same Church Slavonic line with different
//! error profiles; the example scores each against the gold transcription
//! and clusters the systems by their confusion vectors.
//!
//! Run with: cargo run --example evaluate_ocr

use scriptoria::stemma::to_newick;
use scriptoria::textmetrics::{
    cer, confusion_vector, diacritics_cer, edit_alignment, model_similarity_tree,
    NormalizationOptions, Vocabulary,
};

fn main() {
    let gold = "гд\u{0483}и слово твое́ пребывает";
    let systems = [
        ("modernizer", "гди слово твое пребывает"),
        ("visual-confuser", "гд\u{0483}и слобо твоé превыbusает"),
        ("visual-confuser-2", "гд\u{0483}и слобо твое́ превываетъ"),
    ];

    let defaults = NormalizationOptions::default();
    let raw = NormalizationOptions::none();

    println!("gold: {gold}\n");
    let mut stats = Vec::new();
    for (name, hyp) in &systems {
        let normalized = cer(gold, hyp, &defaults).unwrap();
        let unnormalized = cer(gold, hyp, &raw).unwrap();
        let marks = diacritics_cer(gold, hyp).unwrap();
        println!("{name}:");
        println!("  CER normalized {normalized:.4}  raw {unnormalized:.4}  diacritics-only {marks:.4}");
        let s = edit_alignment(gold, hyp);
        println!(
            "  {} substitutions, {} insertions, {} deletions",
            s.substitutions.values().sum::<u64>(),
            s.insertions.values().sum::<u64>(),
            s.deletions.values().sum::<u64>()
        );
        for ((r, h), n) in &s.substitutions {
            println!("    {r:?} -> {h:?} x{n}");
        }
        stats.push(s);
    }

    // Systems with similar error profiles cluster together.
    let refs: Vec<&_> = stats.iter().collect();
    let vocab = Vocabulary::union(&refs);
    let vectors: Vec<Vec<f64>> = stats.iter().map(|s| confusion_vector(s, &vocab)).collect();
    let labels: Vec<String> = systems.iter().map(|(n, _)| n.to_string()).collect();
    let tree = model_similarity_tree(&vectors, &labels).unwrap();
    println!("\nmodel similarity tree (UPGMA over confusion vectors):");
    println!("  {}", to_newick(&tree));
}
