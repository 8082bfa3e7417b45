//! Random machine generation, coverage sampling, and the benchmark harness.
//!
//! The protocol: generate a random machine, sample sentences from it until
//! every arc has been traversed at least `min_per_arc` times, hand the
//! sample to each registered inducer, and judge the result by the MML
//! ratio: the induced machine's message length divided by the generating
//! machine's, both refit and scored on the same sample. A ratio of 1.0 (or
//! just under, when the generator carried redundant states) is an exact
//! match; above [`POOR_MATCH_RATIO`] is a poor one.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::{Alphabet, Dataset, Pfsa, PfsaArc, StateId, SymbolId};
use crate::baselines::ktails;
use crate::error::{Error, Result};
use crate::mml::Criterion;
use crate::search::{induce, SearchOptions};

/// MML ratios above this usually indicate a poor match.
pub const POOR_MATCH_RATIO: f64 = 1.2;

/// Exact-match ratio bound: 1.0 up to rounding.
const EXACT_MATCH_RATIO: f64 = 1.0 + 1e-9;

/// Shape of the random machines produced by [`gen_random_pfsa`].
#[derive(Debug, Clone)]
pub struct GeneratorParams {
    pub num_states: u32,
    /// Tokens, excluding the delimiter.
    pub num_tokens: u32,
    /// Target mean out-degree per state, delimiter arcs included.
    pub density: f64,
    /// Probability that a non-start state carries a delimiter arc.
    pub delimiter_mass: f64,
    pub seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            num_states: 5,
            num_tokens: 3,
            density: 2.5,
            delimiter_mass: 0.4,
            seed: 0,
        }
    }
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_states == 0 {
            return Err(Error::Domain("generator needs at least one state".into()));
        }
        if self.num_tokens == 0 {
            return Err(Error::Domain("generator needs at least one token".into()));
        }
        if self.density > (self.num_tokens + 1) as f64 {
            return Err(Error::InfeasibleDensity {
                density: self.density,
                max: self.num_tokens + 1,
            });
        }
        if !(0.0..=1.0).contains(&self.delimiter_mass) {
            return Err(Error::Domain(format!(
                "delimiter mass {} outside [0, 1]",
                self.delimiter_mass
            )));
        }
        Ok(())
    }
}

fn token_name(i: u32) -> String {
    if i < 26 {
        char::from(b'a' + i as u8).to_string()
    } else {
        format!("t{i}")
    }
}

/// Generates a random machine, deterministically in the seed.
///
/// Construction: a random spanning arborescence from state 0 guarantees
/// reachability; extra token arcs are added uniformly until the target
/// density is met; delimiter arcs (always back to state 0) are assigned so
/// that every state can reach one, which guarantees sampling terminates.
/// The start state never carries a delimiter arc when there is more than
/// one state, so sampled sentences are non-empty. Counts are placeholders
/// (1) until the machine is refit to data; sampling treats each state's
/// arcs as equally likely.
pub fn gen_random_pfsa(params: &GeneratorParams) -> Result<Pfsa> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let alphabet = Alphabet::from_tokens((0..params.num_tokens).map(token_name))?;
    let delim = alphabet.delimiter_id();
    let s = params.num_states;
    let mut arcs: BTreeMap<(StateId, SymbolId), PfsaArc> = BTreeMap::new();
    let one = |dest: StateId| PfsaArc { dest, count: 1 };

    // Spanning arborescence: each new state hangs off a random earlier
    // state with a free token slot.
    let mut free: Vec<BTreeSet<SymbolId>> = (0..s)
        .map(|_| (0..params.num_tokens as SymbolId).collect())
        .collect();
    for state in 1..s {
        let eligible: Vec<StateId> =
            (0..state).filter(|&p| !free[p as usize].is_empty()).collect();
        let parent = eligible[rng.random_range(0..eligible.len())];
        let symbols: Vec<SymbolId> = free[parent as usize].iter().copied().collect();
        let symbol = symbols[rng.random_range(0..symbols.len())];
        free[parent as usize].remove(&symbol);
        arcs.insert((parent, symbol), one(state));
    }

    // Delimiter arcs on non-start states.
    let first_delim_state = if s > 1 { 1 } else { 0 };
    for state in first_delim_state..s {
        if rng.random::<f64>() < params.delimiter_mass {
            arcs.insert((state, delim), one(0));
        }
    }
    if s == 1 {
        arcs.insert((0, delim), one(0));
        if free[0].len() == params.num_tokens as usize {
            // ensure at least one token arc so sentences can be non-empty
            let symbols: Vec<SymbolId> = free[0].iter().copied().collect();
            let symbol = symbols[rng.random_range(0..symbols.len())];
            free[0].remove(&symbol);
            arcs.insert((0, symbol), one(0));
        }
    } else if !(1..s).any(|st| arcs.contains_key(&(st, delim))) {
        let state = rng.random_range(1..s);
        arcs.insert((state, delim), one(0));
    }

    // Density fill with uniformly random token arcs.
    let target = (params.density * s as f64).round() as usize;
    let mut slots: Vec<(StateId, SymbolId)> = (0..s)
        .flat_map(|st| free[st as usize].iter().map(move |&sym| (st, sym)))
        .collect();
    slots.shuffle(&mut rng);
    while arcs.len() < target {
        let Some((state, symbol)) = slots.pop() else {
            break;
        };
        let dest = rng.random_range(0..s);
        arcs.insert((state, symbol), one(dest));
    }

    // Repair delimiter reachability: every state must reach some state
    // that owns a delimiter arc.
    loop {
        let machine_arcs = &arcs;
        let mut can_reach: Vec<bool> = (0..s)
            .map(|st| machine_arcs.contains_key(&(st, delim)))
            .collect();
        loop {
            let mut changed = false;
            for (&(src, _), arc) in machine_arcs.iter() {
                if !can_reach[src as usize] && can_reach[arc.dest as usize] {
                    can_reach[src as usize] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let Some(stranded) = (0..s).find(|&st| !can_reach[st as usize]) else {
            break;
        };
        if stranded == 0 && s > 1 {
            // keep the start state delimiter-free: hang the repair on a
            // token successor of the start state instead
            let successor = arcs
                .range((0, 0)..(0, delim))
                .map(|(_, a)| a.dest)
                .find(|&d| d != 0)
                .expect("the arborescence gives state 0 a non-loop token arc");
            arcs.insert((successor, delim), one(0));
        } else {
            arcs.insert((stranded, delim), one(0));
        }
    }

    Pfsa::new(alphabet, s, arcs)
}

/// Samples random walks from the machine (arcs uniformly likely per state)
/// until every arc has at least `min_per_arc` traversals. Empty sentences
/// (a delimiter drawn immediately at the start state) are rejected without
/// counting their traversals. Deterministic in the seed; widening the
/// coverage target extends the same walk stream, so the sampled dataset
/// for `2n` is a superset of the one for `n`.
pub fn sample_until_coverage(machine: &Pfsa, seed: u64, min_per_arc: u64) -> Result<Dataset> {
    if min_per_arc == 0 {
        return Err(Error::Domain("min_per_arc must be at least 1".into()));
    }
    let delim = machine.alphabet().delimiter_id();
    let per_state: Vec<Vec<(SymbolId, StateId)>> = (0..machine.num_states())
        .map(|st| machine.arcs_from(st).map(|(sym, a)| (sym, a.dest)).collect())
        .collect();
    if per_state[0].iter().all(|&(sym, _)| sym == delim) {
        return Err(Error::SamplingStuck(
            "start state has no token arcs; every sentence would be empty".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<(StateId, SymbolId), u64> =
        machine.arcs().map(|(&key, _)| (key, 0)).collect();
    let mut uncovered = counts.len() as u64;
    let mut sentences: Vec<Vec<SymbolId>> = Vec::new();
    let mut rejected: u64 = 0;

    while uncovered > 0 {
        let mut walk: Vec<(StateId, SymbolId)> = Vec::new();
        let mut sentence: Vec<SymbolId> = Vec::new();
        let mut state: StateId = 0;
        loop {
            let options = &per_state[state as usize];
            let (symbol, dest) = options[rng.random_range(0..options.len())];
            walk.push((state, symbol));
            if symbol == delim {
                break;
            }
            sentence.push(symbol);
            state = dest;
            if sentence.len() > 1_000_000 {
                return Err(Error::SamplingStuck(
                    "walk exceeded 10^6 transitions; a state cannot reach a delimiter".into(),
                ));
            }
        }
        if sentence.is_empty() {
            rejected += 1;
            if rejected > 1_000_000 {
                return Err(Error::SamplingStuck(
                    "rejected 10^6 empty sentences in a row".into(),
                ));
            }
            continue;
        }
        for key in walk {
            let c = counts.get_mut(&key).expect("walk stays on machine arcs");
            *c += 1;
            if *c == min_per_arc {
                uncovered -= 1;
            }
        }
        sentences.push(sentence);
        if sentences.len() > 5_000_000 {
            return Err(Error::SamplingStuck(
                "coverage not reached within 5*10^6 sentences".into(),
            ));
        }
    }
    Dataset::new(machine.alphabet().clone(), sentences)
}

/// The induced machine's message length divided by the generating
/// machine's, both refit to and scored on the same dataset.
pub fn mml_ratio(
    induced: &Pfsa,
    generating: &Pfsa,
    data: &Dataset,
    criterion: &dyn Criterion,
) -> Result<f64> {
    let induced_mml = criterion.score(&induced.fit_counts(data)?, data)?;
    let generating_mml = criterion.score(&generating.fit_counts(data)?, data)?;
    Ok(induced_mml.total_nits() / generating_mml.total_nits())
}

/// One inducer registered with the benchmark harness.
#[derive(Debug, Clone)]
pub enum BenchAlgorithm {
    /// The guided search engine; its seed is re-derived per trial.
    Igs(SearchOptions),
    /// The k-tails baseline.
    KTails { k: u32 },
}

/// Benchmark harness configuration.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub trials: u32,
    /// Machine shape; its `seed` field is ignored in favour of per-trial
    /// seeds derived from [`BenchConfig::seed`].
    pub generator: GeneratorParams,
    pub min_per_arc: u64,
    pub algorithms: Vec<(String, BenchAlgorithm)>,
    pub seed: u64,
    /// Worker threads for trial execution; trials are independent and the
    /// report is identical regardless of the thread count.
    pub threads: usize,
}

/// One benchmark result row. DNF rows carry no ratio.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub trial: u32,
    pub generator_states: u32,
    pub generator_arcs: u32,
    pub algorithm: String,
    pub ratio: Option<f64>,
    pub isomorphic: Option<bool>,
    pub nodes_examined: u64,
    pub elapsed_secs: f64,
    pub dnf: bool,
}

/// How a row classifies under the ratio thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchClass {
    Exact,
    Near,
    Fail,
    Dnf,
}

impl BenchRow {
    pub fn classify(&self) -> MatchClass {
        if self.dnf {
            return MatchClass::Dnf;
        }
        let ratio = self.ratio.expect("non-DNF rows carry a ratio");
        if self.isomorphic == Some(true) || ratio <= EXACT_MATCH_RATIO {
            MatchClass::Exact
        } else if ratio <= POOR_MATCH_RATIO {
            MatchClass::Near
        } else {
            MatchClass::Fail
        }
    }
}

/// Per-algorithm exact/near/fail/DNF tallies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgorithmSummary {
    pub algorithm: String,
    pub exact: u32,
    pub near: u32,
    pub fail: u32,
    pub dnf: u32,
}

/// Full benchmark outcome: one row per (trial, algorithm) plus summaries.
#[derive(Debug, Clone)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub summaries: Vec<AlgorithmSummary>,
}

/// Runs the benchmark protocol: per trial, generate a machine, sample it
/// to coverage, and run every registered algorithm. Failures (budget
/// exhausted with no model, sampling stuck) become DNF rows.
pub fn run_benchmark(config: &BenchConfig, criterion: &dyn Criterion) -> Result<BenchReport> {
    if config.algorithms.is_empty() {
        return Err(Error::Domain("no algorithms registered".into()));
    }
    config.generator.validate()?;
    let mut master = ChaCha8Rng::seed_from_u64(config.seed);
    let trial_seeds: Vec<(u64, u64, u64)> = (0..config.trials)
        .map(|_| (master.random(), master.random(), master.random()))
        .collect();

    let run_trial = |trial: usize| -> Vec<BenchRow> {
        let (gen_seed, sample_seed, search_seed) = trial_seeds[trial];
        let params = GeneratorParams {
            seed: gen_seed,
            ..config.generator.clone()
        };
        run_one_trial(
            trial as u32,
            &params,
            sample_seed,
            search_seed,
            config.min_per_arc,
            &config.algorithms,
            criterion,
        )
    };

    let rows: Vec<Vec<BenchRow>> = if config.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::Domain(format!("cannot build thread pool: {e}")))?;
        pool.install(|| {
            use rayon::prelude::*;
            (0..config.trials as usize)
                .into_par_iter()
                .map(run_trial)
                .collect()
        })
    } else {
        (0..config.trials as usize).map(run_trial).collect()
    };
    let rows: Vec<BenchRow> = rows.into_iter().flatten().collect();

    let summaries = config
        .algorithms
        .iter()
        .map(|(name, _)| {
            let mut summary = AlgorithmSummary {
                algorithm: name.clone(),
                exact: 0,
                near: 0,
                fail: 0,
                dnf: 0,
            };
            for row in rows.iter().filter(|r| &r.algorithm == name) {
                match row.classify() {
                    MatchClass::Exact => summary.exact += 1,
                    MatchClass::Near => summary.near += 1,
                    MatchClass::Fail => summary.fail += 1,
                    MatchClass::Dnf => summary.dnf += 1,
                }
            }
            summary
        })
        .collect();
    Ok(BenchReport { rows, summaries })
}

#[allow(clippy::too_many_arguments)]
fn run_one_trial(
    trial: u32,
    params: &GeneratorParams,
    sample_seed: u64,
    search_seed: u64,
    min_per_arc: u64,
    algorithms: &[(String, BenchAlgorithm)],
    criterion: &dyn Criterion,
) -> Vec<BenchRow> {
    let dnf_row = |name: &str, states: u32, arcs: u32, secs: f64| BenchRow {
        trial,
        generator_states: states,
        generator_arcs: arcs,
        algorithm: name.to_string(),
        ratio: None,
        isomorphic: None,
        nodes_examined: 0,
        elapsed_secs: secs,
        dnf: true,
    };
    let prepared = gen_random_pfsa(params)
        .and_then(|m| sample_until_coverage(&m, sample_seed, min_per_arc).map(|d| (m, d)));
    let (machine, data) = match prepared {
        Ok(pair) => pair,
        Err(_) => {
            return algorithms
                .iter()
                .map(|(name, _)| dnf_row(name, params.num_states, 0, 0.0))
                .collect();
        }
    };
    let states = machine.num_states();
    let arcs = machine.num_arcs() as u32;

    algorithms
        .iter()
        .map(|(name, algo)| {
            let started = Instant::now();
            let outcome: Result<(Pfsa, u64)> = match algo {
                BenchAlgorithm::Igs(opts) => {
                    let opts = SearchOptions {
                        seed: search_seed,
                        ..opts.clone()
                    };
                    induce(&data, criterion, &opts).map(|r| (r.machine, r.nodes_examined))
                }
                BenchAlgorithm::KTails { k } => Ok((ktails(&data, *k), 0)),
            };
            let elapsed_secs = started.elapsed().as_secs_f64();
            match outcome.and_then(|(induced, nodes)| {
                mml_ratio(&induced, &machine, &data, criterion)
                    .map(|ratio| (ratio, induced.is_isomorphic(&machine), nodes))
            }) {
                Ok((ratio, isomorphic, nodes)) => BenchRow {
                    trial,
                    generator_states: states,
                    generator_arcs: arcs,
                    algorithm: name.clone(),
                    ratio: Some(ratio),
                    isomorphic: Some(isomorphic),
                    nodes_examined: nodes,
                    elapsed_secs,
                    dnf: false,
                },
                Err(_) => dnf_row(name, states, arcs, elapsed_secs),
            }
        })
        .collect()
}

/// One row of a sample-size sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub multiplier: u64,
    pub sentences: usize,
    pub transitions: u64,
    pub induced_states: u32,
    pub mml_bits: f64,
    pub ratio: f64,
}

/// Fixes one machine and re-runs induction at growing coverage targets
/// (`base_min_per_arc * multiplier`). The same sampling seed is reused, so
/// each larger dataset extends the previous one.
pub fn run_size_sweep(
    machine: &Pfsa,
    base_min_per_arc: u64,
    multipliers: &[u64],
    sample_seed: u64,
    search: &SearchOptions,
    criterion: &dyn Criterion,
) -> Result<Vec<SweepPoint>> {
    let mut points = Vec::with_capacity(multipliers.len());
    for &multiplier in multipliers {
        let data = sample_until_coverage(machine, sample_seed, base_min_per_arc * multiplier)?;
        let result = induce(&data, criterion, search)?;
        let ratio = mml_ratio(&result.machine, machine, &data, criterion)?;
        points.push(SweepPoint {
            multiplier,
            sentences: data.num_sentences(),
            transitions: data.total_transitions(),
            induced_states: result.machine.num_states(),
            mml_bits: result.mml.total_bits(),
            ratio,
        });
    }
    Ok(points)
}
