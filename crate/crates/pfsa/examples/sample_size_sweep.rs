//! Recovery quality versus sample size: one fixed 10-state machine,
//! re-induced at growing coverage targets. As the sample grows the MML
//! ratio settles to 1.000 and the machine is recovered exactly.
//!
//! ```bash
//! cargo run --release --example sample_size_sweep
//! ```

use pfsa::benchmark::{gen_random_pfsa, run_size_sweep, GeneratorParams};
use pfsa::{SearchOptions, WgCriterion};

fn main() {
    let machine = gen_random_pfsa(&GeneratorParams {
        num_states: 10,
        num_tokens: 4,
        density: 2.6,
        delimiter_mass: 0.5,
        seed: 10,
    })
    .unwrap();
    println!(
        "generator: {} states, {} arcs\n",
        machine.num_states(),
        machine.num_arcs()
    );

    let mut search = SearchOptions::stochastic(55);
    search.budget.max_nodes = Some(300_000);
    let points = run_size_sweep(
        &machine,
        4,
        &[1, 2, 4, 8],
        1,
        &search,
        &WgCriterion,
    )
    .unwrap();
    print!("{}", pfsa::report::render_sweep_report(&points));
    println!("\nA ratio of 1.000 means the induced machine costs exactly as much as");
    println!("the generating machine on the same sample.");
}
