//! Rank agreement between two distance matrices over the same witnesses.
//!
//! The perfect-case validation: letter-distribution distances of synthetic
//! witness texts are compared against their gold Levenshtein matrix. The
//! rank report shows each pair's value and rank under both measures plus the
//! Spearman correlation, and makes rank inversions visible at a glance.
//!
//! Run with: cargo run --example rank_correlation

use scriptoria::mapping::DistanceMatrix;
use scriptoria::synth::{generate, SynthParams};
use scriptoria::textmetrics::{
    distribution_distance, letter_distribution, rank_report, NormalizationOptions,
};

fn main() {
    let tradition = generate(&SynthParams::default()).unwrap();
    let opts = NormalizationOptions::default();
    let distributions: Vec<_> = tradition
        .witnesses
        .iter()
        .map(|w| letter_distribution(&w.text, &opts).unwrap())
        .collect();

    let n = tradition.witnesses.len();
    let mut values = vec![0.0f64; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = distribution_distance(&distributions[i], &distributions[j]);
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    let labels: Vec<String> = tradition.witnesses.iter().map(|w| w.id.clone()).collect();
    let letter_matrix = DistanceMatrix::new(labels, values).unwrap();

    let report = rank_report(&tradition.gold, &letter_matrix).unwrap();
    println!("pair        letter-dist rank | gold-lev rank");
    for p in &report.pairs {
        let marker = if p.test_rank != p.gold_rank { "  <- rank differs" } else { "" };
        println!(
            "{}--{}  {:>9.5} {:>5.1} | {:>8.0} {:>5.1}{marker}",
            p.label_a, p.label_b, p.test_value, p.test_rank, p.gold_value, p.gold_rank
        );
    }
    match report.spearman {
        Some(rho) => println!("\nspearman rank correlation: {rho:.4}"),
        None => println!("\nspearman rank correlation: not applicable"),
    }
}
