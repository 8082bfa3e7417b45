//! Tiered stochastic search on a machine too large to prove optimal.
//!
//! Generates a random 8-state machine, samples it to coverage, and runs
//! the stochastic engine with and without the compatibility cull under
//! the same node budget.
//!
//! ```bash
//! cargo run --release --example stochastic_search
//! ```

use pfsa::benchmark::{gen_random_pfsa, mml_ratio, sample_until_coverage, GeneratorParams};
use pfsa::{induce, SearchOptions, WgCriterion};

fn main() {
    let params = GeneratorParams {
        num_states: 8,
        num_tokens: 4,
        density: 2.4,
        delimiter_mass: 0.5,
        seed: 2,
    };
    let machine = gen_random_pfsa(&params).unwrap();
    let data = sample_until_coverage(&machine, 1, 12).unwrap();
    println!(
        "generator: {} states, {} arcs; sample: {} sentences, {} transitions\n",
        machine.num_states(),
        machine.num_arcs(),
        data.num_sentences(),
        data.total_transitions()
    );

    for compat in [true, false] {
        let mut opts = SearchOptions::stochastic(7);
        opts.compat_test = compat;
        opts.budget.max_nodes = Some(200_000);
        let result = induce(&data, &WgCriterion, &opts).unwrap();
        let ratio = mml_ratio(&result.machine, &machine, &data, &WgCriterion).unwrap();
        println!(
            "compatibility cull {}: cost {:.5}bits, {} states, ratio {:.3}{}, \
             examined {}, created {}, completed {}",
            if compat { "on " } else { "off" },
            result.mml.total_bits(),
            result.machine.num_states(),
            ratio,
            if result.machine.is_isomorphic(&machine) {
                " (recovered the generator exactly)"
            } else {
                ""
            },
            result.nodes_examined,
            result.nodes_created,
            result.completed_pfsa,
        );
    }
}
