//! The materialized construction tree used by the search engine.
//!
//! Interior entries are expanded nodes (payload consumed); frontier
//! entries still hold their [`SearchNode`] payload and are candidates for
//! expansion. Every entry keeps the (fraction encoded, partial MML) pair
//! and the estimate it was inserted with, so reference curves can be
//! rebuilt from any node's ancestry and walks can compare children without
//! touching payloads.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;
use rand::Rng;

use super::{MuTable, SearchNode};

struct TreeEntry {
    parent: Option<usize>,
    children: Vec<usize>,
    /// Unexpanded payload nodes in this subtree, including this entry.
    live: u64,
    fraction: f64,
    partial: f64,
    estimate: f64,
    payload: Option<Box<SearchNode>>,
}

/// Arena-backed construction tree.
pub struct ConstructionTree {
    entries: Vec<TreeEntry>,
    frontier: usize,
    // Max-heap over (estimate, id) for eviction; entries whose payload is
    // gone are skipped lazily.
    evict: BinaryHeap<(OrderedFloat<f64>, Reverse<usize>)>,
}

impl ConstructionTree {
    pub fn new(root: SearchNode) -> Self {
        let entry = TreeEntry {
            parent: None,
            children: Vec::new(),
            live: 1,
            fraction: root.fraction_encoded(),
            partial: root.partial_mml(),
            estimate: root.estimate(),
            payload: Some(Box::new(root)),
        };
        let mut evict = BinaryHeap::new();
        evict.push((OrderedFloat(entry.estimate), Reverse(0)));
        ConstructionTree {
            entries: vec![entry],
            frontier: 1,
            evict,
        }
    }

    pub fn root(&self) -> usize {
        0
    }

    /// Number of unexpanded (payload-carrying) nodes.
    pub fn frontier_len(&self) -> usize {
        self.frontier
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn payload(&self, id: usize) -> Option<&SearchNode> {
        self.entries[id].payload.as_deref()
    }

    pub fn estimate(&self, id: usize) -> f64 {
        self.entries[id].estimate
    }

    pub fn partial(&self, id: usize) -> f64 {
        self.entries[id].partial
    }

    /// Inserts an unexpanded child into the frontier.
    pub fn insert_child(&mut self, parent: usize, node: SearchNode) -> usize {
        let id = self.entries.len();
        self.entries.push(TreeEntry {
            parent: Some(parent),
            children: Vec::new(),
            live: 1,
            fraction: node.fraction_encoded(),
            partial: node.partial_mml(),
            estimate: node.estimate(),
            payload: Some(Box::new(node)),
        });
        self.entries[parent].children.push(id);
        self.bump_live(parent, 1);
        self.frontier += 1;
        self.evict
            .push((OrderedFloat(self.entries[id].estimate), Reverse(id)));
        id
    }

    /// Records a closed leaf (a complete machine) so its ancestry can seed
    /// a reference curve. Closed leaves are never selected or evicted.
    pub fn insert_closed(&mut self, parent: usize, fraction: f64, partial: f64) -> usize {
        let id = self.entries.len();
        self.entries.push(TreeEntry {
            parent: Some(parent),
            children: Vec::new(),
            live: 0,
            fraction,
            partial,
            estimate: partial,
            payload: None,
        });
        self.entries[parent].children.push(id);
        id
    }

    /// Removes and returns a frontier payload, marking the entry expanded.
    pub fn take_payload(&mut self, id: usize) -> Option<SearchNode> {
        let node = self.entries[id].payload.take()?;
        self.entries[id].live -= 1;
        if let Some(parent) = self.entries[id].parent {
            self.bump_live_signed(parent);
        }
        self.frontier -= 1;
        Some(*node)
    }

    fn bump_live(&mut self, mut id: usize, delta: u64) {
        loop {
            self.entries[id].live += delta;
            match self.entries[id].parent {
                Some(p) => id = p,
                None => break,
            }
        }
    }

    fn bump_live_signed(&mut self, mut id: usize) {
        loop {
            self.entries[id].live -= 1;
            match self.entries[id].parent {
                Some(p) => id = p,
                None => break,
            }
        }
    }

    /// Tiered stochastic node selection: draws `mu` from the table, then
    /// walks from the root picking the lowest-estimate live child with
    /// probability `mu` (uniformly at random otherwise) until it reaches an
    /// unexpanded node.
    pub fn select_node_tiered<R: Rng>(&self, rng: &mut R, mu_table: &MuTable) -> Option<usize> {
        if self.frontier == 0 {
            return None;
        }
        let mu = mu_table.draw(rng);
        let mut id = 0;
        if self.entries[0].live == 0 {
            return None;
        }
        loop {
            let entry = &self.entries[id];
            if entry.payload.is_some() {
                return Some(id);
            }
            let live: Vec<usize> = entry
                .children
                .iter()
                .copied()
                .filter(|&c| self.entries[c].live > 0)
                .collect();
            debug_assert!(!live.is_empty(), "live count says a payload exists below");
            id = if rng.random::<f64>() < mu {
                live.iter()
                    .copied()
                    .min_by_key(|&c| OrderedFloat(self.entries[c].estimate))
                    .unwrap()
            } else {
                live[rng.random_range(0..live.len())]
            };
        }
    }

    /// Evicts the highest-estimate frontier nodes until at most `node_cap`
    /// remain. Returns the number evicted. Expanded interiors and recorded
    /// complete leaves are never evicted.
    pub fn cull_frontier(&mut self, node_cap: usize) -> usize {
        let mut evicted = 0;
        while self.frontier > node_cap {
            match self.evict.pop() {
                Some((_, Reverse(id))) => {
                    if self.entries[id].payload.is_some() {
                        self.take_payload(id);
                        evicted += 1;
                    }
                }
                None => break,
            }
        }
        evicted
    }

    /// (fraction encoded, partial MML) pairs from the root down to `id`.
    pub fn ancestry_points(&self, id: usize) -> Vec<(f64, f64)> {
        let mut points = Vec::new();
        let mut cur = Some(id);
        while let Some(i) = cur {
            points.push((self.entries[i].fraction, self.entries[i].partial));
            cur = self.entries[i].parent;
        }
        points.reverse();
        points
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{Dataset, DatasetFormat};
    use crate::mml::WgCriterion;
    use crate::search::{build_root, expand_node, select_dangling_arc, ExpansionOrder};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tree_with_children() -> (Dataset, ConstructionTree, Vec<usize>) {
        let d = Dataset::parse("CAAAB/BBAAB/CAAB/BBAB/CAB/BBB/CB", DatasetFormat::SlashSeparated)
            .unwrap();
        let root = build_root(&d, &WgCriterion);
        let mut tree = ConstructionTree::new(root);
        let node = tree.take_payload(0).unwrap();
        let arc = select_dangling_arc(&node, ExpansionOrder::MostTransitions).unwrap();
        let res = expand_node(&node, arc, &d, &WgCriterion, false, None).unwrap();
        let ids: Vec<usize> = res
            .children
            .into_iter()
            .map(|ch| tree.insert_child(0, ch))
            .collect();
        (d, tree, ids)
    }

    #[test]
    fn live_counts_track_frontier() {
        let (_, mut tree, ids) = tree_with_children();
        assert_eq!(tree.frontier_len(), 2);
        tree.take_payload(ids[0]).unwrap();
        assert_eq!(tree.frontier_len(), 1);
        assert!(tree.payload(ids[0]).is_none());
    }

    #[test]
    fn tiered_walk_mu_one_follows_lowest_estimate() {
        let (_, tree, ids) = tree_with_children();
        let best = if tree.estimate(ids[0]) <= tree.estimate(ids[1]) {
            ids[0]
        } else {
            ids[1]
        };
        let greedy_only = MuTable::new(vec![(1.0, 1.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            assert_eq!(tree.select_node_tiered(&mut rng, &greedy_only), Some(best));
        }
    }

    #[test]
    fn tiered_walk_mu_zero_reaches_both_children() {
        let (_, tree, ids) = tree_with_children();
        let uniform_only = MuTable::new(vec![(0.0, 1.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen = [false, false];
        for _ in 0..64 {
            let picked = tree.select_node_tiered(&mut rng, &uniform_only).unwrap();
            seen[ids.iter().position(|&i| i == picked).unwrap()] = true;
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn cull_evicts_worst_estimates() {
        let (_, mut tree, ids) = tree_with_children();
        assert_eq!(tree.cull_frontier(2), 0, "at the cap evicts nothing");
        let worst = if tree.estimate(ids[0]) >= tree.estimate(ids[1]) {
            ids[0]
        } else {
            ids[1]
        };
        assert_eq!(tree.cull_frontier(1), 1);
        assert!(tree.payload(worst).is_none());
        assert_eq!(tree.frontier_len(), 1);
    }

    #[test]
    fn ancestry_points_run_root_to_leaf() {
        let (_, mut tree, ids) = tree_with_children();
        let closed = tree.insert_closed(ids[0], 1.0, 42.0);
        let points = tree.ancestry_points(closed);
        assert_eq!(points.len(), 3);
        assert_eq!(points[0].0, 0.0);
        assert_eq!(points.last().unwrap(), &(1.0, 42.0));
        tree.take_payload(ids[0]);
        tree.take_payload(ids[1]);
        assert_eq!(tree.frontier_len(), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(
            tree.select_node_tiered(&mut rng, &MuTable::default()),
            None
        );
    }
}
