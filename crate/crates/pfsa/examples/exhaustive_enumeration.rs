//! Enumerate entire construction trees for tiny datasets and compare the
//! exhaustive minimum with the pruned proof-mode search.
//!
//! ```bash
//! cargo run --release --example exhaustive_enumeration
//! ```

use pfsa::baselines::exhaustive_search;
use pfsa::{induce, Dataset, DatasetFormat, SearchOptions, WgCriterion};

fn main() {
    println!(
        "{:<12}{:>12}{:>10}{:>14}{:>14}",
        "dataset", "tree nodes", "leaves", "best (nits)", "prove nodes"
    );
    for text in ["A", "AB", "AB/AAB", "AA/AB/BA", "ABC/CBA"] {
        let data = Dataset::parse(text, DatasetFormat::SlashSeparated).unwrap();
        let oracle = exhaustive_search(&data, &WgCriterion, 10_000_000).unwrap();
        let proved = induce(&data, &WgCriterion, &SearchOptions::prove()).unwrap();
        assert!((oracle.mml.total_nits() - proved.mml.total_nits()).abs() < 1e-9);
        println!(
            "{text:<12}{:>12}{:>10}{:>14.4}{:>14}",
            oracle.nodes_examined,
            oracle.completed_pfsa,
            oracle.mml.total_nits(),
            proved.nodes_examined,
        );
    }
    println!("\nPruned proof mode returns the same minimum on every dataset.");
}
