//! Baseline inducers and the exhaustive correctness oracle.
//!
//! [`build_prefix_tree`] produces the canonical trie of a dataset, the
//! machine that assumes nothing beyond the data. [`k_tails_reduce`] merges
//! states of any deterministic machine whose producible strings up to
//! length `k` agree, resolving nondeterminism by recursively merging
//! conflicting destinations. [`exhaustive_search`] enumerates the entire
//! construction tree without pruning and is the ground truth the guided
//! search is checked against.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use crate::automaton::{Dataset, Pfsa, PfsaArc, StateId, SymbolId};
use crate::error::{Error, Result};
use crate::mml::{Criterion, MmlBreakdown};
use crate::search::{
    build_root, expand_node, select_dangling_arc, ExpansionOrder, InductionResult,
};

/// Builds the canonical prefix-tree machine: shared prefixes share states,
/// each sentence end adds or increments a delimiter arc back to the root,
/// and counts are traversal tallies.
pub fn build_prefix_tree(data: &Dataset) -> Pfsa {
    let delim = data.alphabet().delimiter_id();
    let mut num_states: u32 = 1;
    let mut arcs: BTreeMap<(StateId, SymbolId), PfsaArc> = BTreeMap::new();
    for sentence in data.sentences() {
        let mut state = 0u32;
        for &tok in sentence {
            match arcs.get_mut(&(state, tok)) {
                Some(arc) => {
                    arc.count += 1;
                    state = arc.dest;
                }
                None => {
                    let fresh = num_states;
                    num_states += 1;
                    arcs.insert((state, tok), PfsaArc { dest: fresh, count: 1 });
                    state = fresh;
                }
            }
        }
        arcs.entry((state, delim))
            .and_modify(|a| a.count += 1)
            .or_insert(PfsaArc { dest: 0, count: 1 });
    }
    Pfsa::new(data.alphabet().clone(), num_states, arcs)
        .expect("prefix tree construction satisfies all machine invariants")
}

/// Per-state sets of producible strings of length at most `k`.
///
/// Strings are sequences over tokens plus the delimiter; a delimiter
/// terminates a string and is included in its length, so `k = 0` gives
/// `{""}` for every state. All producible prefixes are included.
fn tail_sets(machine: &Pfsa, k: u32) -> Vec<BTreeSet<Vec<SymbolId>>> {
    let delim = machine.alphabet().delimiter_id();
    let n = machine.num_states() as usize;
    let mut tails: Vec<BTreeSet<Vec<SymbolId>>> =
        vec![BTreeSet::from([Vec::new()]); n];
    for _ in 0..k {
        let mut next = vec![BTreeSet::from([Vec::new()]); n];
        for state in 0..machine.num_states() {
            for (sym, arc) in machine.arcs_from(state) {
                if sym == delim {
                    next[state as usize].insert(vec![delim]);
                } else {
                    for tail in &tails[arc.dest as usize] {
                        let mut s = Vec::with_capacity(tail.len() + 1);
                        s.push(sym);
                        s.extend_from_slice(tail);
                        next[state as usize].insert(s);
                    }
                }
            }
        }
        tails = next;
    }
    tails
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: u32) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = x;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller id as representative so the start state wins
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Repeatedly merges state pairs with equal `k`-tail sets, folding away any
/// nondeterminism the merges introduce, until no two states agree. Counts
/// are summed on merge; the result accepts everything the input accepted.
pub fn k_tails_reduce(machine: &Pfsa, k: u32) -> Pfsa {
    let mut current = machine.clone();
    loop {
        let tails = tail_sets(&current, k);
        let mut groups: BTreeMap<&BTreeSet<Vec<SymbolId>>, Vec<StateId>> = BTreeMap::new();
        for state in 0..current.num_states() {
            groups.entry(&tails[state as usize]).or_default().push(state);
        }
        let mut uf = UnionFind::new(current.num_states());
        let mut merged_any = false;
        for members in groups.values() {
            for &other in &members[1..] {
                uf.union(members[0], other);
                merged_any = true;
            }
        }
        if !merged_any {
            return current;
        }

        // Determinize: conflicting destinations of a merged class are
        // themselves merged, repeated until stable.
        loop {
            let mut conflict: Option<(u32, u32)> = None;
            let mut seen: BTreeMap<(u32, SymbolId), u32> = BTreeMap::new();
            'scan: for (&(src, sym), arc) in current.arcs() {
                let key = (uf.find(src), sym);
                let dest = uf.find(arc.dest);
                if let Some(&prev) = seen.get(&key) {
                    if prev != dest {
                        conflict = Some((prev, dest));
                        break 'scan;
                    }
                } else {
                    seen.insert(key, dest);
                }
            }
            match conflict {
                Some((a, b)) => uf.union(a, b),
                None => break,
            }
        }

        // Rebuild with classes relabeled: the start state's class first,
        // remaining classes in ascending representative order.
        let mut reps: BTreeSet<u32> =
            (0..current.num_states()).map(|s| uf.find(s)).collect();
        let root = uf.find(0);
        reps.remove(&root);
        let mut relabel: BTreeMap<u32, u32> = BTreeMap::from([(root, 0)]);
        for rep in reps {
            let next = relabel.len() as u32;
            relabel.insert(rep, next);
        }
        let mut arcs: BTreeMap<(StateId, SymbolId), PfsaArc> = BTreeMap::new();
        for (&(src, sym), arc) in current.arcs() {
            let key = (relabel[&uf.find(src)], sym);
            let dest = relabel[&uf.find(arc.dest)];
            arcs.entry(key)
                .and_modify(|a| {
                    debug_assert_eq!(a.dest, dest, "determinization left a conflict");
                    a.count += arc.count;
                })
                .or_insert(PfsaArc {
                    dest,
                    count: arc.count,
                });
        }
        current = Pfsa::new(current.alphabet().clone(), relabel.len() as u32, arcs)
            .expect("merged machine satisfies all machine invariants");
    }
}

/// The k-tails inducer: canonical prefix tree, then merge.
pub fn ktails(data: &Dataset, k: u32) -> Pfsa {
    k_tails_reduce(&build_prefix_tree(data), k)
}

/// Enumerates the entire construction tree without pruning or culling and
/// returns the machine with the globally minimum message length.
///
/// `node_budget` bounds the nodes visited; exceeding it fails with
/// [`Error::EnumerationBudget`] carrying the partial counts.
pub fn exhaustive_search(
    data: &Dataset,
    criterion: &dyn Criterion,
    node_budget: u64,
) -> Result<InductionResult> {
    let started = Instant::now();
    let mut nodes: u64 = 1;
    let mut leaves: u64 = 0;
    let mut best: Option<(Pfsa, MmlBreakdown)> = None;
    let mut stack = vec![build_root(data, criterion)];
    if nodes > node_budget {
        return Err(Error::EnumerationBudget { nodes, leaves });
    }
    while let Some(node) = stack.pop() {
        if node.is_complete() {
            leaves += 1;
            let machine = node.extract_pfsa(data.alphabet())?;
            let mml = criterion.score(&machine, data)?;
            if best
                .as_ref()
                .is_none_or(|(_, b)| mml.total_nits() < b.total_nits())
            {
                best = Some((machine, mml));
            }
            continue;
        }
        let arc = select_dangling_arc(&node, ExpansionOrder::MostTransitions)?;
        let result = expand_node(&node, arc, data, criterion, false, None)?;
        nodes += result.considered;
        if nodes > node_budget {
            return Err(Error::EnumerationBudget { nodes, leaves });
        }
        stack.extend(result.children);
    }
    let (machine, mml) = best.expect("every construction tree has at least one leaf");
    Ok(InductionResult {
        machine,
        mml,
        nodes_examined: nodes,
        nodes_created: nodes,
        completed_pfsa: leaves,
        proven_optimal: true,
        elapsed: started.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::DatasetFormat;
    use crate::mml::WgCriterion;
    use crate::search::{induce, SearchOptions};

    fn parse(text: &str) -> Dataset {
        Dataset::parse(text, DatasetFormat::SlashSeparated).unwrap()
    }

    #[test]
    fn prefix_tree_of_two_sentences() {
        let d = parse("AB/AAB");
        let delim = d.alphabet().delimiter_id();
        let m = build_prefix_tree(&d);
        assert_eq!(m.num_states(), 5);
        assert_eq!(m.num_arcs(), 6);
        assert_eq!(m.arc(0, 0).unwrap(), &PfsaArc { dest: 1, count: 2 });
        assert_eq!(m.arc(1, 1).unwrap(), &PfsaArc { dest: 2, count: 1 });
        assert_eq!(m.arc(1, 0).unwrap(), &PfsaArc { dest: 3, count: 1 });
        assert_eq!(m.arc(3, 1).unwrap(), &PfsaArc { dest: 4, count: 1 });
        assert_eq!(m.arc(2, delim).unwrap(), &PfsaArc { dest: 0, count: 1 });
        assert_eq!(m.arc(4, delim).unwrap(), &PfsaArc { dest: 0, count: 1 });
        for s in d.sentences() {
            assert!(m.accepts(s));
        }
    }

    #[test]
    fn prefix_tree_single_sentence() {
        let d = parse("A");
        let m = build_prefix_tree(&d);
        assert_eq!(m.num_states(), 2);
        assert_eq!(m.num_arcs(), 2);
    }

    #[test]
    fn prefix_tree_refit_is_identity() {
        let d = parse("CAAAB/BBAAB/CAAB/BBAB/CAB/BBB/CB");
        let m = build_prefix_tree(&d);
        assert_eq!(m.fit_counts(&d).unwrap(), m);
        assert_eq!(m.total_count(), d.total_transitions());
    }

    #[test]
    fn zero_tails_collapse_to_one_state() {
        for text in ["AB/AAB", "CAAAB/BBAAB/CAAB/BBAB/CAB/BBB/CB", "A"] {
            let d = parse(text);
            let m = ktails(&d, 0);
            assert_eq!(m.num_states(), 1);
            for s in d.sentences() {
                assert!(m.accepts(s));
            }
            // merging preserves every traversal
            assert_eq!(m.total_count(), d.total_transitions());
        }
    }

    #[test]
    fn three_tails_keep_distinct_suffixes_apart() {
        // Hand computation: of the 5 prefix-tree states only the two
        // delimiter-only leaves share 3-tail sets, leaving 4 states.
        let d = parse("AB/AAB");
        let m = ktails(&d, 3);
        assert_eq!(m.num_states(), 4);
        for s in d.sentences() {
            assert!(m.accepts(s));
        }
    }

    #[test]
    fn merged_machines_accept_training_data_for_every_k() {
        let d = parse("CAAAB/BBAAB/CAAB/BBAB/CAB/BBB/CB");
        let tree = build_prefix_tree(&d);
        for k in 0..=6 {
            let m = k_tails_reduce(&tree, k);
            assert!(m.num_states() <= tree.num_states());
            for s in d.sentences() {
                assert!(m.accepts(s), "k={k} rejected a training sentence");
            }
        }
    }

    #[test]
    fn exhaustive_counts_tiny_trees() {
        let d = parse("AB");
        let r = exhaustive_search(&d, &WgCriterion, 10_000).unwrap();
        assert_eq!(r.completed_pfsa, 5, "AB has exactly five complete machines");
        assert_eq!(r.nodes_examined, 13);
        assert!(r.proven_optimal);

        let d = parse("A");
        let r = exhaustive_search(&d, &WgCriterion, 10_000).unwrap();
        assert_eq!(r.completed_pfsa, 2);
    }

    #[test]
    fn exhaustive_budget_is_enforced() {
        let d = parse("CAAAB/BBAAB/CAAB/BBAB/CAB/BBB/CB");
        match exhaustive_search(&d, &WgCriterion, 500) {
            Err(Error::EnumerationBudget { nodes, .. }) => assert!(nodes > 500),
            other => panic!("expected a budget error, got {other:?}"),
        }
    }

    #[test]
    fn prove_mode_matches_the_oracle_on_small_data() {
        for text in ["AB", "A", "AB/AAB", "AA/AB/BA", "ABC/CBA"] {
            let d = parse(text);
            let oracle = exhaustive_search(&d, &WgCriterion, 5_000_000).unwrap();
            let proved = induce(&d, &WgCriterion, &SearchOptions::prove()).unwrap();
            assert!(proved.proven_optimal);
            assert!(
                (oracle.mml.total_nits() - proved.mml.total_nits()).abs() < 1e-9,
                "{text}: oracle {} vs proved {}",
                oracle.mml.total_nits(),
                proved.mml.total_nits()
            );
            assert!(proved.nodes_examined <= oracle.nodes_examined);
        }
    }

    #[test]
    fn structured_machine_beats_null_on_classic_dataset() {
        let d = parse("CAAAB/BBAAB/CAAB/BBAB/CAB/BBB/CB");
        let proved = induce(&d, &WgCriterion, &SearchOptions::prove()).unwrap();
        let null = ktails(&d, 0);
        let null_mml = WgCriterion.score(&null, &d).unwrap();
        assert!(proved.mml.total_nits() < null_mml.total_nits());
        assert!(proved.machine.num_states() > 1);
    }
}
