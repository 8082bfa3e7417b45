//! Induction of deterministic probabilistic finite state automata (PFSA)
//! from positive samples of behaviour, scored by minimum message length.
//!
//! A PFSA here is a deterministic automaton whose arcs carry transition
//! counts. Every sentence of a dataset ends with an implicit delimiter
//! symbol whose arc always returns to the start state. The induction
//! problem is: given only sentences the machine produced, recover the
//! machine. Candidates are compared by the two-part message length of the
//! hypothesis plus the data given the hypothesis; the shortest message
//! wins.
//!
//! The search engine enumerates partial machines in a construction tree.
//! Each partial machine carries *dangling arcs* (arcs with known data
//! traversals but no destination yet); expanding a node fixes one dangling
//! arc to every possible destination. Because the partial message length
//! is a monotone lower bound on every descendant, subtrees that already
//! cost more than the best complete machine are discarded outright, which
//! shrinks the search by orders of magnitude relative to exhaustive
//! enumeration. On top of the bound sit a final-cost estimator driven by a
//! reference curve, a distribution-compatibility cull, tiered stochastic
//! node selection, and a memory-capped frontier.
//!
//! # Modules
//!
//! - [`automaton`]: alphabets, datasets, machines, tracing, count
//!   refitting, canonical forms, text and DOT serialization.
//! - [`mml`]: multistate distribution message lengths, the scoring
//!   criterion, and the compatibility test.
//! - [`search`]: the construction tree and the guided search engine.
//! - [`baselines`]: prefix trees, k-tails merging, and the exhaustive
//!   enumerator used as a correctness oracle.
//! - [`benchmark`]: random machine generation, coverage sampling, MML
//!   ratios, and the benchmark harness.
//! - [`report`]: aligned text reports and JSON result documents.
//! - [`cli`]: the `pfsa` command line tool.
//!
//! # Getting started
//!
//! ```
//! use pfsa::{Dataset, DatasetFormat, SearchOptions, WgCriterion};
//!
//! let data = Dataset::parse("CAAAB/BBAAB/CAAB/BBAB/CAB/BBB/CB",
//!                           DatasetFormat::SlashSeparated).unwrap();
//! let result = pfsa::induce(&data, &WgCriterion, &SearchOptions::prove()).unwrap();
//! assert!(result.proven_optimal);
//! assert!(result.machine.accepts(data.sentence(0)));
//! ```
//!
//! Each major capability has a runnable example under `examples/`:
//!
//! ```bash
//! cargo run --release --example classic_induction
//! cargo run --release --example stochastic_search
//! cargo run --release --example exhaustive_enumeration
//! cargo run --release --example baseline_ktails
//! cargo run --release --example random_benchmark
//! cargo run --release --example sample_size_sweep
//! cargo run --release --example export_dot
//! ```

pub mod automaton;
pub mod baselines;
pub mod benchmark;
pub mod cli;
pub mod error;
pub mod mml;
pub mod report;
pub mod search;

pub use automaton::{Alphabet, Dataset, DatasetFormat, Pfsa, PfsaArc, StateId, SymbolId};
pub use error::{Error, Result};
pub use mml::{
    compatible, data_cost, distribution_ml, structure_cost, ClassDistribution, Criterion,
    MmlBreakdown, WgCriterion,
};
pub use search::{
    build_root, estimate_final_mml, expand_node, induce, select_dangling_arc, ConstructionTree,
    Cursor, ExpansionOrder, InductionResult, MuTable, ReferenceCurve, SearchMode, SearchNode,
    SearchOptions,
};
