//! Cluster one manuscript's glyphs with seeded k-means.
//!
//! Segments a synthetic page, embeds the crops, runs k-means with k equal to
//! the alphabet size, and reports cluster counts, relative frequencies, the
//! SSE trace and the purity against the known text.
//!
//! Run with: cargo run --example cluster_glyphs

use scriptoria::clustering::{cluster_frequencies, cluster_purity, Clustering};
use scriptoria::embedding::{embed_all, EmbeddingConfig};
use scriptoria::imaging::{segment_page, SegmentParams};
use scriptoria::synth::{generate, render_page, SynthParams, DEFAULT_COLS};

fn main() {
    let tradition = generate(&SynthParams::default()).unwrap();
    let witness = &tradition.witnesses[0];
    let page = render_page(&witness.text, DEFAULT_COLS);
    let crops = segment_page(&page, &SegmentParams::default(), &witness.id, 0).unwrap();
    let vectors = embed_all(&crops, &EmbeddingConfig::default()).unwrap();
    println!(
        "witness {}: {} glyphs from a {}-letter alphabet",
        witness.id,
        vectors.len(),
        tradition.params.alphabet_size
    );

    let k = tradition.params.alphabet_size;
    let clustering = Clustering::fit(&witness.id, &vectors, k, 42, 300, 1e-6).unwrap();
    println!("k = {k}, seed 42, converged in {} iterations", clustering.sse_trace.len());
    println!("SSE trace: {:?}", clustering.sse_trace);

    let freq = cluster_frequencies(&clustering).unwrap();
    println!("cluster sizes and frequencies:");
    for (i, (count, f)) in clustering.counts.iter().zip(&freq.freq).enumerate() {
        println!("  cluster {i}: {count:>3} glyphs  freq {f:.4}");
    }

    // On these clean pages reading order equals text order, so the text
    // itself labels every glyph.
    let labels: Vec<char> = witness.text.chars().collect();
    let purity = cluster_purity(&clustering, &labels).unwrap();
    println!("purity against the true letters: {purity:.4}");
}
