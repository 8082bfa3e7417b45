//! The induction engine: null-model seeding plus the three search modes.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Instant;

use ordered_float::OrderedFloat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::automaton::Dataset;
use crate::error::{Error, Result};
use crate::mml::{Criterion, MmlBreakdown};

use super::node::{build_root, expand_node, expand_single, select_dangling_arc};
use super::tree::ConstructionTree;
use super::{
    estimate_final_mml, InductionResult, ReferenceCurve, SearchMode, SearchOptions,
};

struct BestModel {
    machine: crate::automaton::Pfsa,
    mml: MmlBreakdown,
}

struct Engine<'a> {
    data: &'a Dataset,
    criterion: &'a dyn Criterion,
    opts: &'a SearchOptions,
    started: Instant,
    deadline: Option<Instant>,
    tree: ConstructionTree,
    best: BestModel,
    best_total: f64,
    curve: ReferenceCurve,
    nodes_examined: u64,
    nodes_created: u64,
    completed_pfsa: u64,
    /// Set when the frontier drained; cleared by budget or timeout aborts.
    exhausted: bool,
}

/// Induces the minimum-message-length machine for a dataset.
///
/// The best-so-far bound is seeded by running the forced 1-state
/// construction path (every destination the start state) through the
/// normal expansion machinery; those nodes are charged against the node
/// budget like any other. A zero budget therefore fails with
/// [`Error::NoModelFound`] before any machine is scored.
pub fn induce(
    data: &Dataset,
    criterion: &dyn Criterion,
    opts: &SearchOptions,
) -> Result<InductionResult> {
    opts.validate()?;
    let started = Instant::now();
    let deadline = opts.budget.timeout.map(|t| started + t);
    let max_nodes = opts.budget.max_nodes;

    // --- Seed the bound with the 1-state machine. ---
    let mut nodes_examined: u64 = 0;
    let charge = |n: &mut u64| -> bool {
        if max_nodes.is_some_and(|b| *n >= b) {
            return false;
        }
        *n += 1;
        true
    };
    if !charge(&mut nodes_examined) {
        return Err(Error::NoModelFound);
    }
    let root = build_root(data, criterion);
    let mut curve_points = vec![(root.fraction_encoded(), root.partial_mml())];
    let mut node = root.clone();
    while !node.is_complete() {
        if !charge(&mut nodes_examined) || deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(Error::NoModelFound);
        }
        let arc = select_dangling_arc(&node, opts.expansion_order)?;
        node = expand_single(&node, arc, 0, data, criterion);
        curve_points.push((node.fraction_encoded(), node.partial_mml()));
    }
    let null_machine = node.extract_pfsa(data.alphabet())?;
    let null_mml = criterion.score(&null_machine, data)?;
    let curve = ReferenceCurve::new(curve_points)?;
    let best_total = null_mml.total_nits();
    let best = BestModel {
        machine: null_machine,
        mml: null_mml,
    };

    let mut engine = Engine {
        data,
        criterion,
        opts,
        started,
        deadline,
        tree: ConstructionTree::new(root),
        best,
        best_total,
        curve,
        nodes_examined,
        nodes_created: 1, // the root
        completed_pfsa: 1, // the seed machine
        exhausted: false,
    };
    match opts.mode {
        SearchMode::Prove => engine.run_prove(),
        SearchMode::Greedy => engine.run_greedy(),
        SearchMode::Stochastic => engine.run_stochastic(),
    }?;
    Ok(engine.into_result())
}

type MinHeap = BinaryHeap<Reverse<(OrderedFloat<f64>, usize)>>;

impl<'a> Engine<'a> {
    fn over_budget(&self) -> bool {
        self.opts
            .budget
            .max_nodes
            .is_some_and(|b| self.nodes_examined >= b)
            || self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    /// Expands one frontier node and returns the ids of the children that
    /// joined the frontier. Complete children update the best model and the
    /// reference curve instead.
    fn expand_frontier(&mut self, id: usize) -> Result<Vec<usize>> {
        let Some(node) = self.tree.take_payload(id) else {
            return Ok(Vec::new());
        };
        // Lazy prune: the bound may have improved since insertion.
        if node.partial_mml() >= self.best_total {
            return Ok(Vec::new());
        }
        let arc = select_dangling_arc(&node, self.opts.expansion_order)?;
        let result = expand_node(
            &node,
            arc,
            self.data,
            self.criterion,
            self.opts.compat_test,
            Some(self.best_total),
        )?;
        self.nodes_examined += result.considered;
        self.completed_pfsa += result.completed_seen;
        let mut inserted = Vec::with_capacity(result.children.len());
        for mut child in result.children {
            if child.is_complete() {
                let leaf =
                    self.tree
                        .insert_closed(id, child.fraction_encoded(), child.partial_mml());
                self.nodes_created += 1;
                let machine = child.extract_pfsa(self.data.alphabet())?;
                let mml = self.criterion.score(&machine, self.data)?;
                debug_assert!(
                    (mml.total_nits() - child.partial_mml()).abs() <= 1e-9,
                    "complete partial must equal the full score"
                );
                if mml.total_nits() < self.best_total {
                    self.best_total = mml.total_nits();
                    self.best = BestModel { machine, mml };
                    self.curve = ReferenceCurve::new(self.tree.ancestry_points(leaf))?;
                }
            } else {
                child.set_estimate(estimate_final_mml(&child, Some(&self.curve)));
                inserted.push(self.tree.insert_child(id, child));
                self.nodes_created += 1;
            }
        }
        Ok(inserted)
    }

    /// Best-first by partial MML; exhausts the tree unless aborted.
    fn run_prove(&mut self) -> Result<()> {
        let mut heap: MinHeap = BinaryHeap::new();
        heap.push(Reverse((OrderedFloat(self.tree.partial(0)), 0)));
        while let Some(Reverse((partial, id))) = heap.pop() {
            if partial.0 >= self.best_total {
                // Everything still queued bounds at least as high.
                self.exhausted = true;
                return Ok(());
            }
            if self.over_budget() {
                return Ok(());
            }
            for child in self.expand_frontier(id)? {
                heap.push(Reverse((OrderedFloat(self.tree.partial(child)), child)));
            }
        }
        self.exhausted = true;
        Ok(())
    }

    /// Switched-heuristic greedy: `switch_ratio.0` selections by lowest
    /// estimate, then `switch_ratio.1` by lowest partial MML, repeating.
    fn run_greedy(&mut self) -> Result<()> {
        let mut by_estimate: MinHeap = BinaryHeap::new();
        let mut by_partial: MinHeap = BinaryHeap::new();
        by_estimate.push(Reverse((OrderedFloat(self.tree.estimate(0)), 0)));
        by_partial.push(Reverse((OrderedFloat(self.tree.partial(0)), 0)));
        let (by_est, by_part) = self.opts.switch_ratio;
        let cycle = (by_est + by_part) as u64;
        let mut step: u64 = 0;
        loop {
            if self.over_budget() {
                return Ok(());
            }
            let pick_estimate = step % cycle < by_est as u64;
            step += 1;
            // Pop the next live node from the preferred heap, falling back
            // to the other; stale entries (already expanded) are skipped.
            let id = loop {
                let popped = if pick_estimate {
                    by_estimate.pop().or_else(|| by_partial.pop())
                } else {
                    by_partial.pop().or_else(|| by_estimate.pop())
                };
                match popped {
                    Some(Reverse((_, id))) => {
                        if self.tree.payload(id).is_some() {
                            break Some(id);
                        }
                    }
                    None => break None,
                }
            };
            let Some(id) = id else {
                self.exhausted = true;
                return Ok(());
            };
            for child in self.expand_frontier(id)? {
                by_estimate.push(Reverse((OrderedFloat(self.tree.estimate(child)), child)));
                by_partial.push(Reverse((OrderedFloat(self.tree.partial(child)), child)));
            }
        }
    }

    /// Tiered stochastic walks with the frontier capped at `node_cap`.
    fn run_stochastic(&mut self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
        loop {
            if self.over_budget() {
                return Ok(());
            }
            let Some(id) = self.tree.select_node_tiered(&mut rng, &self.opts.mu_table)
            else {
                self.exhausted = true;
                return Ok(());
            };
            self.expand_frontier(id)?;
            self.tree.cull_frontier(self.opts.node_cap);
        }
    }

    fn into_result(self) -> InductionResult {
        InductionResult {
            machine: self.best.machine,
            mml: self.best.mml,
            nodes_examined: self.nodes_examined,
            nodes_created: self.nodes_created,
            completed_pfsa: self.completed_pfsa,
            proven_optimal: self.opts.mode == SearchMode::Prove
                && !self.opts.compat_test
                && self.exhausted,
            elapsed: self.started.elapsed(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::DatasetFormat;
    use crate::mml::WgCriterion;
    use crate::search::SearchBudget;

    fn induce_with(data: &Dataset, opts: &SearchOptions) -> InductionResult {
        induce(data, &WgCriterion, opts).unwrap()
    }

    #[test]
    fn single_sentence_yields_null_machine_in_every_mode() {
        let d = Dataset::parse("A", DatasetFormat::SlashSeparated).unwrap();
        for opts in [
            SearchOptions::prove(),
            SearchOptions::greedy(),
            SearchOptions::stochastic(5),
        ] {
            let r = induce_with(&d, &opts);
            assert_eq!(r.machine.num_states(), 1);
            assert!((r.mml.total_nits() - 3.178053830347946).abs() < 1e-9);
            assert!(r.machine.accepts(d.sentence(0)));
        }
    }

    #[test]
    fn prove_mode_is_marked_optimal() {
        let d = Dataset::parse("AB/AAB", DatasetFormat::SlashSeparated).unwrap();
        let r = induce_with(&d, &SearchOptions::prove());
        assert!(r.proven_optimal);
        assert!(r.completed_pfsa >= 1);
        for s in d.sentences() {
            assert!(r.machine.accepts(s));
        }
        // compat on forfeits the proof flag
        let mut opts = SearchOptions::prove();
        opts.compat_test = true;
        assert!(!induce_with(&d, &opts).proven_optimal);
    }

    #[test]
    fn zero_budget_means_no_model() {
        let d = Dataset::parse("AB", DatasetFormat::SlashSeparated).unwrap();
        let mut opts = SearchOptions::prove();
        opts.budget = SearchBudget {
            max_nodes: Some(0),
            timeout: None,
        };
        assert!(matches!(
            induce(&d, &WgCriterion, &opts),
            Err(Error::NoModelFound)
        ));
    }

    #[test]
    fn budget_abort_still_returns_seed_model() {
        let d = Dataset::parse("CAAAB/BBAAB/CAAB/BBAB/CAB/BBB/CB", DatasetFormat::SlashSeparated)
            .unwrap();
        let mut opts = SearchOptions::prove();
        // Enough for the seed path but nothing else.
        opts.budget = SearchBudget {
            max_nodes: Some(6),
            timeout: None,
        };
        let r = induce_with(&d, &opts);
        assert!(!r.proven_optimal);
        assert_eq!(r.machine.num_states(), 1);
    }

    #[test]
    fn tight_frontier_cap_still_yields_accepting_machine() {
        // A dataset big enough that the frontier overflows the minimum cap
        // and culling runs mid-search; the survivors must still complete.
        let m = crate::benchmark::gen_random_pfsa(&crate::benchmark::GeneratorParams {
            num_states: 6,
            num_tokens: 3,
            density: 2.5,
            delimiter_mass: 0.4,
            seed: 42,
        })
        .unwrap();
        let d = crate::benchmark::sample_until_coverage(&m, 1, 8).unwrap();
        let mut opts = SearchOptions::stochastic(3);
        opts.node_cap = 1000;
        opts.budget.max_nodes = Some(60_000);
        let a = induce_with(&d, &opts);
        assert!(a.nodes_created > opts.node_cap as u64, "cap was never stressed");
        for s in d.sentences() {
            assert!(a.machine.accepts(s));
        }
        let b = induce_with(&d, &opts);
        assert_eq!(a.nodes_examined, b.nodes_examined);
        assert!(a.machine.is_isomorphic_strict(&b.machine));
    }

    #[test]
    fn deterministic_across_runs() {
        let d = Dataset::parse("CAAAB/BBAAB/CAAB/BBAB/CAB/BBB/CB", DatasetFormat::SlashSeparated)
            .unwrap();
        for opts in [
            SearchOptions::prove(),
            SearchOptions::greedy(),
            SearchOptions::stochastic(1234),
        ] {
            let a = induce_with(&d, &opts);
            let b = induce_with(&d, &opts);
            assert_eq!(a.nodes_examined, b.nodes_examined);
            assert_eq!(a.nodes_created, b.nodes_created);
            assert_eq!(a.completed_pfsa, b.completed_pfsa);
            assert_eq!(a.mml.total_nits(), b.mml.total_nits());
            assert!(a.machine.is_isomorphic_strict(&b.machine));
        }
    }

    #[test]
    fn modes_agree_on_the_classic_dataset() {
        let d = Dataset::parse("CAAAB/BBAAB/CAAB/BBAB/CAB/BBB/CB", DatasetFormat::SlashSeparated)
            .unwrap();
        let proved = induce_with(&d, &SearchOptions::prove());
        assert!(proved.proven_optimal);
        let greedy = induce_with(&d, &SearchOptions::greedy());
        let stoch = induce_with(&d, &SearchOptions::stochastic(7));
        // Greedy and stochastic cannot beat a proven optimum.
        assert!(greedy.mml.total_nits() >= proved.mml.total_nits() - 1e-9);
        assert!(stoch.mml.total_nits() >= proved.mml.total_nits() - 1e-9);
        for s in d.sentences() {
            assert!(proved.machine.accepts(s));
            assert!(greedy.machine.accepts(s));
            assert!(stoch.machine.accepts(s));
        }
    }
}
