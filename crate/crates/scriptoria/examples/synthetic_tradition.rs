//! Generate a synthetic textual tradition on disk.
//!
//! Writes witness texts, rendered page images, the gold Levenshtein distance
//! matrix and a ready-to-run corpus manifest, i.e. everything the `segment`,
//! `cluster`, `distances` and `eval-rank` commands need.
//!
//! Run with: cargo run --example synthetic_tradition

use scriptoria::pipeline::run_synth;
use scriptoria::synth::SynthParams;

fn main() {
    let out = std::env::temp_dir().join("scriptoria-demo-tradition");
    let params = SynthParams {
        witnesses: 6,
        ..SynthParams::default()
    };
    let manifest = run_synth(&params, &out).unwrap();

    println!("wrote a {}-witness tradition to {}", manifest.manuscripts.len(), out.display());
    for m in &manifest.manuscripts {
        println!(
            "  {}: page {:?}, transcript {:?}",
            m.id,
            m.image_paths[0],
            m.gold_transcript_path.as_ref().unwrap()
        );
    }

    let gold = std::fs::read_to_string(out.join("gold_distances.csv")).unwrap();
    println!("\ngold Levenshtein distances:\n{gold}");
    println!("next steps:");
    let dir = out.display();
    println!("  scriptoria segment   --config {dir}/corpus.json --out {dir}/run");
    println!("  scriptoria embed     --config {dir}/corpus.json --out {dir}/run");
    println!("  scriptoria cluster   --config {dir}/corpus.json --out {dir}/run");
    println!("  scriptoria distances --config {dir}/corpus.json --out {dir}/run");
    println!("  scriptoria tree      --distances {dir}/run/distances.csv --out {dir}/run");
}
