//! Turn glyph crops into fixed-length feature vectors.
//!
//! Shows the built-in letterbox patch embedding: same letter -> identical
//! vector, different letters -> clearly separated, and the sidecar format
//! used to import externally computed vectors instead.
//!
//! Run with: cargo run --example embed_glyphs

use scriptoria::embedding::{embed_all, format_embeddings, EmbeddingConfig};
use scriptoria::imaging::{segment_page, SegmentParams};
use scriptoria::mapping::cosine_similarity;
use scriptoria::synth::render_page;

fn main() {
    let page = render_page(&"ab".repeat(10), 10);
    let crops = segment_page(&page, &SegmentParams::default(), "demo", 0).unwrap();
    assert_eq!(crops.len(), 20);

    let cfg = EmbeddingConfig::default();
    let vectors = embed_all(&crops, &cfg).unwrap();
    println!(
        "embedded {} crops at patch size {} -> dimension {}",
        vectors.len(),
        cfg.patch_size,
        vectors[0].values.len()
    );

    let norm: f64 = vectors[0].values.iter().map(|v| v * v).sum::<f64>().sqrt();
    println!("L2 norm of each vector: {norm:.6}");
    println!(
        "cosine(a, a) = {:.6}  (identical glyphs embed identically)",
        cosine_similarity(&vectors[0].values, &vectors[2].values)
    );
    println!(
        "cosine(a, b) = {:.6}  (different letters separate)",
        cosine_similarity(&vectors[0].values, &vectors[1].values)
    );

    // The sidecar format: one `glyph_id v1 .. vD` record per line. Files in
    // this shape can be produced by any external embedder (e.g. a CNN with
    // its classification head removed) and loaded with --embedding external.
    let sidecar = format_embeddings(&vectors[..1]);
    let preview: String = sidecar.chars().take(60).collect();
    println!("sidecar record preview: {preview}...");
}
