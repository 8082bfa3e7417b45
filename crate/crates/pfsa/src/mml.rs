//! Multistate distribution message lengths and the scoring criterion.
//!
//! All costs are measured in nits (natural-log units); one nit is
//! `log2(e)` bits. For a distribution over `A` known classes with `a`
//! present classes and counts `n_i` summing to `t`, the cost of stating
//! which classes are present is
//!
//! ```text
//! ln(A) + ln(A! / ((A - a)! a!))
//! ```
//!
//! and the cost of stating the data given the present classes is
//!
//! ```text
//! ln((t + a - 1)! / (a - 1)!) - sum_i ln(n_i!)
//! ```
//!
//! The [`Criterion`] trait packages a complete-machine score together with
//! the partial lower bound the search engine prunes with. [`WgCriterion`]
//! is the default: the per-state multistate code above plus an integer
//! code for the state count and a `ln(S)` destination code per
//! non-delimiter arc (delimiter destinations are forced to the start state
//! and cost nothing).

use std::cell::RefCell;

use crate::automaton::{Dataset, Pfsa};
use crate::error::{Error, Result};
use crate::search::SearchNode;

/// Bits per nit.
pub const NITS_TO_BITS: f64 = std::f64::consts::LOG2_E;

thread_local! {
    // Cumulative ln(n!) table, grown on demand. Index n holds ln(n!).
    static LN_FACTORIAL: RefCell<Vec<f64>> = const { RefCell::new(Vec::new()) };
}

/// `ln(n!)` via a memoized cumulative table.
pub fn ln_factorial(n: u64) -> f64 {
    LN_FACTORIAL.with(|cell| {
        let mut table = cell.borrow_mut();
        if table.is_empty() {
            table.push(0.0);
        }
        while (table.len() as u64) <= n {
            let k = table.len() as u64;
            let prev = *table.last().unwrap();
            table.push(prev + (k as f64).ln());
        }
        table[n as usize]
    })
}

/// Counts over a known number of classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDistribution {
    num_classes: u32,
    counts: Vec<u64>,
}

impl ClassDistribution {
    /// `counts` must provide one entry per class (zeros allowed).
    pub fn new(num_classes: u32, counts: Vec<u64>) -> Result<Self> {
        if num_classes == 0 {
            return Err(Error::Domain("class count must be positive".into()));
        }
        if counts.len() != num_classes as usize {
            return Err(Error::Domain(format!(
                "expected {num_classes} class counts, got {}",
                counts.len()
            )));
        }
        Ok(ClassDistribution {
            num_classes,
            counts,
        })
    }

    pub fn num_classes(&self) -> u32 {
        self.num_classes
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of classes with a nonzero count.
    pub fn present(&self) -> u32 {
        self.counts.iter().filter(|&&c| c > 0).count() as u32
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Per-class sum of two distributions over the same classes.
    pub fn merged(&self, other: &ClassDistribution) -> Result<ClassDistribution> {
        if self.num_classes != other.num_classes {
            return Err(Error::Domain(format!(
                "cannot merge distributions over {} and {} classes",
                self.num_classes, other.num_classes
            )));
        }
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a + b)
            .collect();
        ClassDistribution::new(self.num_classes, counts)
    }
}

/// Cost in nits of stating how many and which of `num_classes` classes are
/// present.
pub fn structure_cost(num_classes: u32, present: u32) -> Result<f64> {
    if present < 1 || present > num_classes {
        return Err(Error::Domain(format!(
            "present class count {present} outside 1..={num_classes}"
        )));
    }
    let a = num_classes as u64;
    let p = present as u64;
    Ok((num_classes as f64).ln() + ln_factorial(a) - ln_factorial(a - p) - ln_factorial(p))
}

/// Cost in nits of stating the data of a distribution given its present
/// classes. An empty distribution carries no data cost.
pub fn data_cost(dist: &ClassDistribution) -> f64 {
    let t = dist.total();
    if t == 0 {
        return 0.0;
    }
    let a = dist.present() as u64;
    let mut nits = ln_factorial(t + a - 1) - ln_factorial(a - 1);
    for &n in dist.counts() {
        if n > 0 {
            nits -= ln_factorial(n);
        }
    }
    nits
}

/// Total message length of one distribution: structure plus data.
pub fn distribution_ml(dist: &ClassDistribution) -> f64 {
    if dist.total() == 0 {
        return 0.0;
    }
    structure_cost(dist.num_classes(), dist.present()).expect("present in range by construction")
        + data_cost(dist)
}

/// Whether two distributions plausibly share a source: true iff encoding
/// their per-class sum costs no more than encoding them separately.
pub fn compatible(d1: &ClassDistribution, d2: &ClassDistribution) -> Result<bool> {
    let merged = d1.merged(d2)?;
    Ok(distribution_ml(&merged) <= distribution_ml(d1) + distribution_ml(d2))
}

/// Two-part message length split into hypothesis and data terms, in nits.
#[derive(Debug, Clone, Copy)]
pub struct MmlBreakdown {
    pub structure_nits: f64,
    pub data_nits: f64,
}

impl MmlBreakdown {
    pub fn total_nits(&self) -> f64 {
        self.structure_nits + self.data_nits
    }

    pub fn total_bits(&self) -> f64 {
        self.total_nits() * NITS_TO_BITS
    }
}

/// A machine scoring criterion usable by the search engine.
///
/// Implementations must guarantee that `partial_score` never decreases
/// along a construction-tree expansion edge and equals
/// `score(machine).total_nits()` at every complete node; the pruning logic
/// is sound only under those two properties.
pub trait Criterion: Send + Sync {
    fn name(&self) -> &'static str;

    /// Scores a complete machine whose counts match the dataset.
    fn score(&self, machine: &Pfsa, data: &Dataset) -> Result<MmlBreakdown>;

    /// Lower bound on the final message length of every machine descending
    /// from a partial machine.
    fn partial_score(&self, node: &SearchNode) -> f64;
}

/// Integer code for a state count: `ln S + ln(S + 1)`.
fn state_count_cost(num_states: u32) -> f64 {
    (num_states as f64).ln() + (num_states as f64 + 1.0).ln()
}

/// The default criterion.
///
/// Structure: `ln S + ln(S+1)` for the state count, then per state the
/// class-selection cost over `A` classes and `ln S` per non-delimiter arc
/// for its destination. Data: per state, the multistate data cost of its
/// outgoing counts. Delimiter destinations are forced and cost nothing.
pub struct WgCriterion;

impl WgCriterion {
    fn score_counts(
        &self,
        num_states: u32,
        num_classes: u32,
        delimiter: u32,
        state_counts: &[Vec<u64>],
    ) -> MmlBreakdown {
        let ln_states = (num_states as f64).ln();
        let mut structure_nits = state_count_cost(num_states);
        let mut data_nits = 0.0;
        for counts in state_counts {
            let present = counts.iter().filter(|&&c| c > 0).count() as u32;
            if present == 0 {
                continue;
            }
            let nondelim_arcs = counts
                .iter()
                .enumerate()
                .filter(|&(sym, &c)| c > 0 && sym as u32 != delimiter)
                .count();
            structure_nits += structure_cost(num_classes, present)
                .expect("present <= num_classes by construction")
                + nondelim_arcs as f64 * ln_states;
            let dist = ClassDistribution::new(num_classes, counts.clone())
                .expect("counts sized to num_classes");
            data_nits += data_cost(&dist);
        }
        MmlBreakdown {
            structure_nits,
            data_nits,
        }
    }
}

impl Criterion for WgCriterion {
    fn name(&self) -> &'static str {
        "wg"
    }

    fn score(&self, machine: &Pfsa, data: &Dataset) -> Result<MmlBreakdown> {
        let fitted = machine.fit_counts(data)?;
        if fitted != *machine {
            return Err(Error::Domain(
                "machine counts are inconsistent with the dataset".into(),
            ));
        }
        let state_counts: Vec<Vec<u64>> = (0..machine.num_states())
            .map(|s| machine.out_counts(s))
            .collect();
        Ok(self.score_counts(
            machine.num_states(),
            machine.alphabet().size(),
            machine.alphabet().delimiter_id(),
            &state_counts,
        ))
    }

    fn partial_score(&self, node: &SearchNode) -> f64 {
        self.score_counts(
            node.num_states(),
            node.alphabet_size(),
            node.delimiter(),
            &node.state_class_counts(),
        )
        .total_nits()
    }
}

/// Looks up a criterion by its CLI name.
pub fn criterion_by_name(name: &str) -> Result<Box<dyn Criterion>> {
    match name {
        "wg" => Ok(Box::new(WgCriterion)),
        other => Err(Error::Domain(format!("unknown criterion {other:?}"))),
    }
}
