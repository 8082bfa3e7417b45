//! Serialize machines: the line-based text format and Graphviz DOT.
//!
//! ```bash
//! cargo run --release --example export_dot > machine.dot
//! dot -Tsvg machine.dot -o machine.svg   # if graphviz is installed
//! ```

use pfsa::{induce, Dataset, DatasetFormat, Pfsa, SearchOptions, WgCriterion};

fn main() {
    let data = Dataset::parse(
        "CAAAB/BBAAB/CAAB/BBAB/CAB/BBB/CB",
        DatasetFormat::SlashSeparated,
    )
    .unwrap();
    let result = induce(&data, &WgCriterion, &SearchOptions::prove()).unwrap();

    // Text form round-trips through the parser.
    let text = result.machine.to_text();
    eprintln!("machine text format:\n{text}");
    assert_eq!(Pfsa::parse(&text).unwrap(), result.machine);

    // DOT goes to stdout; delimiter arcs are dashed.
    print!("{}", result.machine.to_dot());
}
