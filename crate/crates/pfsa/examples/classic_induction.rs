//! Induce a machine from the classic seven-sentence dataset and prove it
//! optimal.
//!
//! ```bash
//! cargo run --release --example classic_induction
//! ```

use pfsa::{induce, Dataset, DatasetFormat, SearchOptions, WgCriterion};

fn main() {
    let data = Dataset::parse(
        "CAAAB/BBAAB/CAAB/BBAB/CAB/BBB/CB",
        DatasetFormat::SlashSeparated,
    )
    .unwrap();
    println!(
        "dataset: {} sentences, {} transitions, alphabet {:?} + delimiter\n",
        data.num_sentences(),
        data.total_transitions(),
        data.alphabet().tokens()
    );

    let result = induce(&data, &WgCriterion, &SearchOptions::prove()).unwrap();
    print!("{}", pfsa::report::render_induction_report(&result));

    println!(
        "\nThe best-first search proved optimality after {} nodes; the full\n\
         construction tree for this dataset holds tens of millions.",
        result.nodes_examined
    );
    for i in 0..data.num_sentences() {
        assert!(result.machine.accepts(data.sentence(i)));
    }
    println!("Every training sentence is accepted.");
}
