//! Build stemma trees from a distance matrix.
//!
//! Neighbor joining gives the unrooted stemma topology; UPGMA gives a rooted
//! ultrametric dendrogram. Both serialize to canonical Newick. On an
//! additive matrix, NJ recovers the generating tree exactly.
//!
//! Run with: cargo run --example build_trees

use scriptoria::mapping::DistanceMatrix;
use scriptoria::stemma::{neighbor_joining, robinson_foulds, to_newick, upgma, PhyloTree};

fn main() {
    // Path distances of the tree ((A:1,B:2):1.5, C:3, (D:2,E:1):0.5).
    let labels: Vec<String> = ["A", "B", "C", "D", "E"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: [[f64; 5]; 5] = [
        [0.0, 3.0, 5.5, 5.0, 4.0],
        [3.0, 0.0, 6.5, 6.0, 5.0],
        [5.5, 6.5, 0.0, 5.5, 4.5],
        [5.0, 6.0, 5.5, 0.0, 3.0],
        [4.0, 5.0, 4.5, 3.0, 0.0],
    ];
    let values: Vec<f64> = rows.iter().flatten().copied().collect();
    let matrix = DistanceMatrix::new(labels, values).unwrap();

    let nj = neighbor_joining(&matrix).unwrap();
    println!("neighbor joining (unrooted):");
    println!("  {}", to_newick(&nj));

    let dendrogram = upgma(&matrix).unwrap();
    println!("UPGMA (rooted, ultrametric):");
    println!("  {}", to_newick(&dendrogram));

    // The Newick output parses back to the same canonical form.
    let reparsed = PhyloTree::from_newick(&to_newick(&nj)).unwrap();
    println!(
        "round-trip parse identical: {}",
        to_newick(&reparsed) == to_newick(&nj)
    );
    println!(
        "NJ vs source topology Robinson-Foulds distance: {}",
        robinson_foulds(
            &PhyloTree::from_newick("((A:1,B:2):1.5,C:3,(D:2,E:1):0.5);").unwrap(),
            &nj
        )
        .unwrap()
    );
}
