//! The construction tree and the guided search engine.
//!
//! The engine enumerates partial machines ([`SearchNode`]) by repeatedly
//! fixing dangling arcs ([`expand_node`]). Three modes are provided:
//!
//! - `prove`: best-first by partial MML until the tree is exhausted; the
//!   returned machine is provably optimal when the compatibility cull is
//!   off.
//! - `greedy`: deterministic lowest-estimate-first expansion with a
//!   switched heuristic (a configurable ratio of estimate-driven to
//!   partial-driven selections).
//! - `stochastic`: tiered random root-to-frontier walks with a
//!   memory-capped frontier.
//!
//! All modes seed the best-so-far bound with the 1-state machine before
//! searching, so pruning is active from the first expansion.

mod engine;
mod node;
mod tree;

pub use engine::induce;
pub use node::{build_root, expand_node, select_dangling_arc, Cursor, ExpandResult, SearchNode};
pub use tree::ConstructionTree;

use std::time::Duration;

use rand::Rng;

use crate::error::{Error, Result};

/// Dangling-arc selection policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionOrder {
    /// The dangling arc with the most parked cursors (default).
    MostTransitions,
    /// The oldest dangling arc; provided for comparison runs.
    Fifo,
}

impl std::str::FromStr for ExpansionOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "most-transitions" => Ok(ExpansionOrder::MostTransitions),
            "fifo" => Ok(ExpansionOrder::Fifo),
            other => Err(Error::Domain(format!(
                "unknown expansion order {other:?} (expected \"most-transitions\" or \"fifo\")"
            ))),
        }
    }
}

/// Node selection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Prove,
    Greedy,
    Stochastic,
}

impl std::str::FromStr for SearchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prove" => Ok(SearchMode::Prove),
            "greedy" => Ok(SearchMode::Greedy),
            "stochastic" => Ok(SearchMode::Stochastic),
            other => Err(Error::Domain(format!(
                "unknown mode {other:?} (expected \"prove\", \"greedy\" or \"stochastic\")"
            ))),
        }
    }
}

/// Distribution over the greediness parameter `mu` used by tiered
/// stochastic selection: each walk draws one `mu` and then picks the
/// lowest-estimate child with probability `mu` at every step.
#[derive(Debug, Clone)]
pub struct MuTable {
    entries: Vec<(f64, f64)>,
}

impl MuTable {
    /// `entries` are `(mu, probability)` pairs; probabilities must sum to 1.
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("mu table is empty".into()));
        }
        let mut sum = 0.0;
        for &(mu, p) in &entries {
            if !(0.0..=1.0).contains(&mu) {
                return Err(Error::Domain(format!("mu {mu} outside [0, 1]")));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "mu table probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(MuTable { entries })
    }

    /// Parses `"mu:prob,mu:prob,..."`.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for part in spec.split(',') {
            let (mu, p) = part.split_once(':').ok_or_else(|| {
                Error::Domain(format!("bad mu table entry {part:?}, expected mu:prob"))
            })?;
            let mu: f64 = mu
                .trim()
                .parse()
                .map_err(|_| Error::Domain(format!("bad mu value {mu:?}")))?;
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|_| Error::Domain(format!("bad probability {p:?}")))?;
            entries.push((mu, p));
        }
        Self::new(entries)
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let roll: f64 = rng.random();
        let mut acc = 0.0;
        for &(mu, p) in &self.entries {
            acc += p;
            if roll < acc {
                return mu;
            }
        }
        self.entries.last().unwrap().0
    }
}

impl Default for MuTable {
    /// The default tier distribution: fully greedy half the time, mostly
    /// greedy often, occasionally exploratory or fully random.
    fn default() -> Self {
        MuTable::new(vec![(1.0, 0.50), (0.8, 0.35), (0.5, 0.10), (0.0, 0.05)])
            .expect("default table is valid")
    }
}

/// Piecewise-linear relationship between fraction of data encoded and
/// partial MML, recorded along the construction path of the best complete
/// machine found so far.
#[derive(Debug, Clone)]
pub struct ReferenceCurve {
    points: Vec<(f64, f64)>,
}

impl ReferenceCurve {
    /// Points must have strictly increasing fractions ending at 1.0 and
    /// non-decreasing partial MML values.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("reference curve has no points".into()));
        }
        for pair in points.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::Domain(
                    "reference curve fractions must strictly increase".into(),
                ));
            }
            if pair[1].1 < pair[0].1 - 1e-9 {
                return Err(Error::Domain(
                    "reference curve partial MML must not decrease".into(),
                ));
            }
        }
        let last = points.last().unwrap();
        if (last.0 - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(
                "reference curve must end at fraction 1.0".into(),
            ));
        }
        Ok(ReferenceCurve { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// The complete machine's MML, i.e. the value at fraction 1.0.
    pub fn final_mml(&self) -> f64 {
        self.points.last().unwrap().1
    }

    /// Linear interpolation, clamped to the curve's endpoints.
    pub fn interpolate(&self, fraction: f64) -> f64 {
        let first = self.points.first().unwrap();
        if fraction <= first.0 {
            return first.1;
        }
        let last = self.points.last().unwrap();
        if fraction >= last.0 {
            return last.1;
        }
        let hi = self.points.partition_point(|&(f, _)| f < fraction);
        let (f0, v0) = self.points[hi - 1];
        let (f1, v1) = self.points[hi];
        v0 + (v1 - v0) * (fraction - f0) / (f1 - f0)
    }
}

/// Estimates the final MML of a node.
///
/// With a reference curve, the estimate is the node's partial MML plus the
/// curve's remaining climb from the node's fraction. Before any complete
/// machine exists the partial is extrapolated linearly through the origin.
/// The estimate is never below the partial MML itself.
pub fn estimate_final_mml(node: &SearchNode, curve: Option<&ReferenceCurve>) -> f64 {
    let fraction = node.fraction_encoded();
    let partial = node.partial_mml();
    let estimate = match curve {
        Some(curve) => partial + (curve.final_mml() - curve.interpolate(fraction)),
        None => partial / fraction.max(1e-6),
    };
    estimate.max(partial)
}

/// Node budget and wall-clock limits for one induction run.
#[derive(Debug, Clone, Default)]
pub struct SearchBudget {
    /// Maximum nodes examined (candidates scored or culled).
    pub max_nodes: Option<u64>,
    /// Wall-clock limit.
    pub timeout: Option<Duration>,
}

/// Everything that shapes one induction run.
#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub mode: SearchMode,
    /// Apply the distribution-compatibility cull when expanding.
    pub compat_test: bool,
    /// Frontier size cap enforced in stochastic mode.
    pub node_cap: usize,
    pub expansion_order: ExpansionOrder,
    pub mu_table: MuTable,
    /// Estimate-driven : partial-driven selection ratio for greedy mode.
    pub switch_ratio: (u32, u32),
    pub seed: u64,
    pub budget: SearchBudget,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            mode: SearchMode::Stochastic,
            compat_test: true,
            node_cap: 150_000,
            expansion_order: ExpansionOrder::MostTransitions,
            mu_table: MuTable::default(),
            switch_ratio: (3, 1),
            seed: 0,
            budget: SearchBudget::default(),
        }
    }
}

impl SearchOptions {
    /// Exhaustive proof mode: best-first on the partial bound, no
    /// compatibility cull, fully deterministic.
    pub fn prove() -> Self {
        SearchOptions {
            mode: SearchMode::Prove,
            compat_test: false,
            ..Self::default()
        }
    }

    /// Deterministic greedy mode with the switched heuristic.
    pub fn greedy() -> Self {
        SearchOptions {
            mode: SearchMode::Greedy,
            ..Self::default()
        }
    }

    /// Stochastic tiered mode with the given seed.
    pub fn stochastic(seed: u64) -> Self {
        SearchOptions {
            mode: SearchMode::Stochastic,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_cap < 1000 {
            return Err(Error::Domain(format!(
                "node cap {} below the minimum of 1000",
                self.node_cap
            )));
        }
        if self.switch_ratio.0 + self.switch_ratio.1 == 0 {
            return Err(Error::Domain("switch ratio cannot be 0:0".into()));
        }
        Ok(())
    }
}

/// Outcome of one induction run.
#[derive(Debug, Clone)]
pub struct InductionResult {
    pub machine: crate::automaton::Pfsa,
    pub mml: crate::mml::MmlBreakdown,
    /// Candidate nodes considered: scored nodes plus compatibility-culled
    /// candidates, mirroring how search reports count them.
    pub nodes_examined: u64,
    /// Nodes actually added to the construction tree.
    pub nodes_created: u64,
    /// Complete machines encountered (including the 1-state seed).
    pub completed_pfsa: u64,
    /// True only for an exhausted prove-mode run without the compatibility
    /// cull.
    pub proven_optimal: bool,
    pub elapsed: Duration,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{Dataset, DatasetFormat};
    use crate::mml::WgCriterion;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mu_table_validation() {
        assert!(MuTable::new(vec![(0.5, 0.5)]).is_err());
        assert!(MuTable::new(vec![(1.5, 1.0)]).is_err());
        assert!(MuTable::parse("1.0:0.5,0.8:0.35,0.5:0.1,0.0:0.05").is_ok());
        assert!(MuTable::parse("1.0=0.5").is_err());
    }

    #[test]
    fn mu_draw_respects_probabilities() {
        let table = MuTable::default();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut hits = std::collections::BTreeMap::new();
        let draws = 20_000;
        for _ in 0..draws {
            *hits
                .entry((table.draw(&mut rng) * 100.0) as u32)
                .or_insert(0u32) += 1;
        }
        let frac = |m: u32| hits.get(&m).copied().unwrap_or(0) as f64 / draws as f64;
        assert!((frac(100) - 0.50).abs() < 0.02);
        assert!((frac(80) - 0.35).abs() < 0.02);
        assert!((frac(50) - 0.10).abs() < 0.02);
        assert!((frac(0) - 0.05).abs() < 0.02);
    }

    #[test]
    fn reference_curve_interpolation() {
        let curve = ReferenceCurve::new(vec![(0.0, 10.0), (0.5, 100.0), (1.0, 210.0)]).unwrap();
        assert_eq!(curve.final_mml(), 210.0);
        assert_eq!(curve.interpolate(0.5), 100.0);
        assert_eq!(curve.interpolate(0.75), 155.0);
        assert_eq!(curve.interpolate(-1.0), 10.0);
        assert_eq!(curve.interpolate(2.0), 210.0);
        assert!(ReferenceCurve::new(vec![(0.0, 1.0), (0.0, 2.0), (1.0, 3.0)]).is_err());
        assert!(ReferenceCurve::new(vec![(0.0, 1.0), (0.5, 2.0)]).is_err());
    }

    #[test]
    fn estimate_formula() {
        let d = Dataset::parse("AB", DatasetFormat::SlashSeparated).unwrap();
        let root = build_root(&d, &WgCriterion);
        // fraction 0, no curve: partial / epsilon, clamped at >= partial
        let no_curve = estimate_final_mml(&root, None);
        assert!(no_curve >= root.partial_mml());
        assert_eq!(no_curve, root.partial_mml() / 1e-6);
        // with a curve: partial + remaining climb
        let curve =
            ReferenceCurve::new(vec![(0.0, root.partial_mml()), (1.0, 50.0)]).unwrap();
        let est = estimate_final_mml(&root, Some(&curve));
        assert!((est - 50.0).abs() < 1e-12);
    }

    #[test]
    fn options_validation() {
        let mut opts = SearchOptions::default();
        assert!(opts.validate().is_ok());
        opts.node_cap = 10;
        assert!(opts.validate().is_err());
        let mut opts = SearchOptions::prove();
        opts.switch_ratio = (0, 0);
        assert!(opts.validate().is_err());
    }
}
