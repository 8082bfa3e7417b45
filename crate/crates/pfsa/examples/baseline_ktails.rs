//! The canonical prefix tree and the k-tails merging baseline, scored
//! against the guided search.
//!
//! ```bash
//! cargo run --release --example baseline_ktails
//! ```

use pfsa::baselines::{build_prefix_tree, k_tails_reduce};
use pfsa::mml::Criterion;
use pfsa::{induce, Dataset, DatasetFormat, SearchOptions, WgCriterion};

fn main() {
    let data = Dataset::parse(
        "CAAAB/BBAAB/CAAB/BBAB/CAB/BBB/CB",
        DatasetFormat::SlashSeparated,
    )
    .unwrap();
    let tree = build_prefix_tree(&data);
    println!(
        "canonical prefix tree: {} states, {} arcs, cost {:.5}bits\n",
        tree.num_states(),
        tree.num_arcs(),
        WgCriterion.score(&tree, &data).unwrap().total_bits()
    );

    println!("{:<6}{:>8}{:>8}{:>16}", "k", "states", "arcs", "cost (bits)");
    for k in 0..=5 {
        let merged = k_tails_reduce(&tree, k);
        let cost = WgCriterion.score(&merged, &data).unwrap();
        println!(
            "{k:<6}{:>8}{:>8}{:>16.5}",
            merged.num_states(),
            merged.num_arcs(),
            cost.total_bits()
        );
        for s in data.sentences() {
            assert!(merged.accepts(s));
        }
    }

    let best = induce(&data, &WgCriterion, &SearchOptions::prove()).unwrap();
    println!(
        "\nguided search (proven optimal): {} states, cost {:.5}bits",
        best.machine.num_states(),
        best.mml.total_bits()
    );
    println!(
        "k-tails happens to find the same machine here at k = 2, but the user\n\
         must guess k: every other setting costs more, and nothing in the\n\
         method says which k to trust."
    );
}
