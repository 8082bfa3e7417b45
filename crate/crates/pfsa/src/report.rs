//! Result rendering: aligned text reports and JSON documents.
//!
//! Text reports mirror the classic layout: a header line, the cost in
//! bits to five decimals, the state/arc table with bracketed destinations
//! and a `d` column for the delimiter, the node counters, and the elapsed
//! time. JSON documents carry the same fields plus the machine itself and
//! round-trip losslessly; they deliberately omit wall-clock timings so
//! that identical seeds and flags produce byte-identical output.

use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::automaton::{Pfsa, PfsaArc};
use crate::benchmark::{BenchReport, SweepPoint};
use crate::error::{Error, Result};
use crate::search::InductionResult;

/// `H:MM:SS`, rounded down.
pub fn format_elapsed(elapsed: Duration) -> String {
    let secs = elapsed.as_secs();
    format!("{}:{:02}:{:02}", secs / 3600, (secs / 60) % 60, secs % 60)
}

/// Renders the state/arc table: one column per token plus the delimiter
/// column `d`, one row per state, destinations bracketed.
pub fn render_machine_table(machine: &Pfsa) -> String {
    let alphabet = machine.alphabet();
    let delim = alphabet.delimiter_id();
    let mut headers: Vec<String> = alphabet.tokens().to_vec();
    headers.push("d".to_string());

    let cell = |state: u32, sym: u32| -> String {
        match machine.arc(state, sym) {
            Some(PfsaArc { dest, .. }) => format!("[{dest}]"),
            None => "-".to_string(),
        }
    };
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for state in 0..machine.num_states() {
        for (i, _) in headers.iter().enumerate() {
            let sym = if i == headers.len() - 1 { delim } else { i as u32 };
            widths[i] = widths[i].max(cell(state, sym).len());
        }
    }
    let state_width = "state".len().max(machine.num_states().to_string().len());

    let mut out = String::new();
    write!(out, "{:<state_width$}", "arc->").unwrap();
    for (h, w) in headers.iter().zip(&widths) {
        write!(out, "  {h:<w$}", w = w).unwrap();
    }
    out.push('\n');
    out.push_str("state\n");
    for state in 0..machine.num_states() {
        write!(out, "{state:<state_width$}").unwrap();
        for (i, w) in widths.iter().enumerate() {
            let sym = if i == headers.len() - 1 { delim } else { i as u32 };
            write!(out, "  {:<w$}", cell(state, sym), w = w).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Renders the full induction report block.
pub fn render_induction_report(result: &InductionResult) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "There are {} states with a max of {} arcs",
        result.machine.num_states(),
        result.machine.max_out_degree()
    )
    .unwrap();
    writeln!(out, "Automata cost is: {:.5}bits", result.mml.total_bits()).unwrap();
    out.push_str(&render_machine_table(&result.machine));
    writeln!(
        out,
        "Nodes examined {}, Nodes created {}, Completed PFSA {}",
        result.nodes_examined, result.nodes_created, result.completed_pfsa
    )
    .unwrap();
    if result.proven_optimal {
        out.push_str("Proven optimal\n");
    }
    writeln!(out, "Elapsed time: {}", format_elapsed(result.elapsed)).unwrap();
    out
}

/// Serializable machine description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineDoc {
    pub states: u32,
    pub tokens: Vec<String>,
    pub delimiter: String,
    pub arcs: Vec<ArcDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcDoc {
    pub from: u32,
    pub symbol: String,
    pub to: u32,
    pub count: u64,
}

impl MachineDoc {
    pub fn from_pfsa(machine: &Pfsa) -> Self {
        MachineDoc {
            states: machine.num_states(),
            tokens: machine.alphabet().tokens().to_vec(),
            delimiter: machine.alphabet().delimiter().to_string(),
            arcs: machine
                .arcs()
                .map(|(&(from, sym), arc)| ArcDoc {
                    from,
                    symbol: machine.alphabet().symbol_name(sym).to_string(),
                    to: arc.dest,
                    count: arc.count,
                })
                .collect(),
        }
    }

    pub fn to_pfsa(&self) -> Result<Pfsa> {
        let alphabet =
            crate::automaton::Alphabet::with_delimiter(self.tokens.clone(), &self.delimiter)?;
        let mut arcs = std::collections::BTreeMap::new();
        for arc in &self.arcs {
            let sym = alphabet
                .symbol_id(&arc.symbol)
                .ok_or_else(|| Error::Document(format!("unknown symbol {:?}", arc.symbol)))?;
            if arcs
                .insert(
                    (arc.from, sym),
                    PfsaArc {
                        dest: arc.to,
                        count: arc.count,
                    },
                )
                .is_some()
            {
                return Err(Error::Document(format!(
                    "duplicate arc ({}, {})",
                    arc.from, arc.symbol
                )));
            }
        }
        Pfsa::new(alphabet, self.states, arcs)
    }
}

/// Machine-readable induction result. Timings are omitted so reports are
/// byte-identical across runs with the same seed and flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InductionDoc {
    pub criterion: String,
    pub cost_nits: f64,
    pub cost_bits: f64,
    pub structure_nits: f64,
    pub data_nits: f64,
    pub nodes_examined: u64,
    pub nodes_created: u64,
    pub completed_pfsa: u64,
    pub proven_optimal: bool,
    pub machine: MachineDoc,
}

impl InductionDoc {
    pub fn from_result(result: &InductionResult, criterion: &str) -> Self {
        InductionDoc {
            criterion: criterion.to_string(),
            cost_nits: result.mml.total_nits(),
            cost_bits: result.mml.total_bits(),
            structure_nits: result.mml.structure_nits,
            data_nits: result.mml.data_nits,
            nodes_examined: result.nodes_examined,
            nodes_created: result.nodes_created,
            completed_pfsa: result.completed_pfsa,
            proven_optimal: result.proven_optimal,
            machine: MachineDoc::from_pfsa(&result.machine),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("doc serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRowDoc {
    pub trial: u32,
    pub generator_states: u32,
    pub generator_arcs: u32,
    pub algorithm: String,
    pub ratio: Option<f64>,
    pub isomorphic: Option<bool>,
    pub nodes_examined: u64,
    pub dnf: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDoc {
    pub algorithm: String,
    pub exact: u32,
    pub near: u32,
    pub fail: u32,
    pub dnf: u32,
}

/// Machine-readable benchmark report; timings omitted (see [`InductionDoc`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchDoc {
    pub rows: Vec<BenchRowDoc>,
    pub summaries: Vec<SummaryDoc>,
}

impl BenchDoc {
    pub fn from_report(report: &BenchReport) -> Self {
        BenchDoc {
            rows: report
                .rows
                .iter()
                .map(|r| BenchRowDoc {
                    trial: r.trial,
                    generator_states: r.generator_states,
                    generator_arcs: r.generator_arcs,
                    algorithm: r.algorithm.clone(),
                    ratio: r.ratio,
                    isomorphic: r.isomorphic,
                    nodes_examined: r.nodes_examined,
                    dnf: r.dnf,
                })
                .collect(),
            summaries: report
                .summaries
                .iter()
                .map(|s| SummaryDoc {
                    algorithm: s.algorithm.clone(),
                    exact: s.exact,
                    near: s.near,
                    fail: s.fail,
                    dnf: s.dnf,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("doc serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))
    }
}

/// Comparison-table text rendering of a benchmark report.
pub fn render_bench_report(report: &BenchReport) -> String {
    let algorithms: Vec<&str> = report
        .summaries
        .iter()
        .map(|s| s.algorithm.as_str())
        .collect();
    let mut out = String::new();
    write!(out, "{:<6}{:<8}{:<6}", "No.", "States", "Arcs").unwrap();
    for a in &algorithms {
        write!(out, "  {a:<10}").unwrap();
    }
    out.push('\n');
    let trials: Vec<u32> = {
        let mut t: Vec<u32> = report.rows.iter().map(|r| r.trial).collect();
        t.dedup();
        t
    };
    for trial in trials {
        let rows: Vec<_> = report.rows.iter().filter(|r| r.trial == trial).collect();
        let (states, arcs) = rows
            .first()
            .map(|r| (r.generator_states, r.generator_arcs))
            .unwrap_or((0, 0));
        write!(out, "{trial:<6}{states:<8}{arcs:<6}").unwrap();
        for a in &algorithms {
            let cell = rows
                .iter()
                .find(|r| r.algorithm == *a)
                .map(|r| match r.ratio {
                    Some(ratio) => format!("{ratio:.3}"),
                    None => "DNF".to_string(),
                })
                .unwrap_or_else(|| "-".to_string());
            write!(out, "  {cell:<10}").unwrap();
        }
        out.push('\n');
    }
    out.push('\n');
    for s in &report.summaries {
        writeln!(
            out,
            "{}: {} exact, {} near, {} fail, {} DNF",
            s.algorithm, s.exact, s.near, s.fail, s.dnf
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPointDoc {
    pub multiplier: u64,
    pub sentences: usize,
    pub transitions: u64,
    pub induced_states: u32,
    pub mml_bits: f64,
    pub ratio: f64,
}

/// Machine-readable sample-size sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDoc {
    pub points: Vec<SweepPointDoc>,
}

impl SweepDoc {
    pub fn from_points(points: &[SweepPoint]) -> Self {
        SweepDoc {
            points: points
                .iter()
                .map(|p| SweepPointDoc {
                    multiplier: p.multiplier,
                    sentences: p.sentences,
                    transitions: p.transitions,
                    induced_states: p.induced_states,
                    mml_bits: p.mml_bits,
                    ratio: p.ratio,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("doc serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))
    }
}

/// Sample-size sweep text table.
pub fn render_sweep_report(points: &[SweepPoint]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<10}{:<10}{:<8}{:<12}MML Ratio",
        "Sentences", "Tokens", "States", "MML (bits)"
    )
    .unwrap();
    for p in points {
        writeln!(
            out,
            "{:<10}{:<10}{:<8}{:<12.1}{:.3}",
            p.sentences, p.transitions, p.induced_states, p.mml_bits, p.ratio
        )
        .unwrap();
    }
    out
}
