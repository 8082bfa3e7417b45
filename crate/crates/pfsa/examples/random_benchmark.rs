//! A desk-scale run of the random-machine benchmark: generate machines,
//! sample each to arc coverage, induce with the guided search and k-tails,
//! and judge by MML ratio (1.0 exact, above 1.2 poor).
//!
//! ```bash
//! cargo run --release --example random_benchmark
//! ```

use pfsa::benchmark::{run_benchmark, BenchAlgorithm, BenchConfig, GeneratorParams};
use pfsa::{SearchOptions, WgCriterion};

fn main() {
    let mut igs = SearchOptions::stochastic(0);
    igs.budget.max_nodes = Some(150_000);

    let config = BenchConfig {
        trials: 10,
        generator: GeneratorParams {
            num_states: 5,
            num_tokens: 3,
            density: 2.5,
            delimiter_mass: 0.4,
            seed: 0,
        },
        min_per_arc: 40,
        algorithms: vec![
            ("igs".into(), BenchAlgorithm::Igs(igs)),
            ("ktails".into(), BenchAlgorithm::KTails { k: 3 }),
        ],
        seed: 7101,
        threads: 2,
    };
    let report = run_benchmark(&config, &WgCriterion).unwrap();
    print!("{}", pfsa::report::render_bench_report(&report));
}
