//! Match clusters across manuscripts and compute the distance matrix.
//!
//! Runs the visual pipeline in memory over a synthetic tradition: segment,
//! embed, cluster per witness, then centroid cosine similarity, optimal
//! one-to-one assignment, 10% discard and the frequency-difference distance
//! for every pair.
//!
//! Run with: cargo run --example pairwise_distances

use scriptoria::clustering::{cluster_frequencies, Clustering};
use scriptoria::embedding::{embed_all, EmbeddingConfig};
use scriptoria::imaging::{segment_page, SegmentParams};
use scriptoria::mapping::{pairwise_distances, NConvention};
use scriptoria::synth::{generate, render_page, SynthParams, DEFAULT_COLS};

fn main() {
    let params = SynthParams {
        witnesses: 4,
        ..SynthParams::default()
    };
    let tradition = generate(&params).unwrap();

    let mut clusterings = Vec::new();
    let mut frequencies = Vec::new();
    for w in &tradition.witnesses {
        let page = render_page(&w.text, DEFAULT_COLS);
        let crops = segment_page(&page, &SegmentParams::default(), &w.id, 0).unwrap();
        let vectors = embed_all(&crops, &EmbeddingConfig::default()).unwrap();
        let c = Clustering::fit(&w.id, &vectors, params.alphabet_size, 42, 300, 1e-6).unwrap();
        println!("{}: {} glyphs in {} clusters", w.id, vectors.len(), c.k);
        frequencies.push(cluster_frequencies(&c).unwrap());
        clusterings.push(c);
    }

    let (matrix, mappings) =
        pairwise_distances(&clusterings, &frequencies, 0.1, NConvention::Retained).unwrap();

    println!("\nfirst pair mapping ({} -- {}):", mappings[0].pair.0, mappings[0].pair.1);
    for m in &mappings[0].matches {
        println!(
            "  cluster {} -> {}  similarity {:.4}  {}",
            m.a,
            m.b,
            m.similarity,
            if m.retained { "retained" } else { "discarded" }
        );
    }

    println!("\ndistance matrix:");
    print!("{}", matrix.to_csv());

    println!("\npairs sorted by visual distance:");
    let mut pairs = matrix.upper_triangle();
    pairs.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
    for (i, j, d) in pairs {
        println!("  {} -- {}  {:.6}", matrix.labels[i], matrix.labels[j], d);
    }
}
