//! Datasets and deterministic probabilistic finite state automata.
//!
//! An [`Alphabet`] is an ordered token inventory plus one distinguished
//! delimiter symbol marking sentence ends. A [`Dataset`] stores sentences
//! as token id sequences without the delimiter; the delimiter transition is
//! implicit at every sentence end. A [`Pfsa`] is a deterministic automaton
//! over `tokens + delimiter` whose arcs carry transition counts; delimiter
//! arcs always return to the start state.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// State identifier; the start state is always `0`.
pub type StateId = u32;

/// Symbol identifier. Token ids are `0..num_tokens`; the delimiter is the
/// last id, `num_tokens`.
pub type SymbolId = u32;

/// Candidate delimiter spellings tried in order when one is synthesized.
const DELIMITER_CANDIDATES: &[&str] = &["$", "#", "%", "&", "_"];

/// Ordered token inventory with a distinguished end-of-sentence delimiter.
///
/// The delimiter counts as one arc class, so the class count `A` used by
/// the message length formulas is `num_tokens() + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    tokens: Vec<String>,
    delimiter: String,
}

impl Alphabet {
    /// Builds an alphabet from tokens, sorting and deduplicating them, and
    /// synthesizes a delimiter spelling that collides with no token.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = tokens.into_iter().map(Into::into).collect();
        let tokens: Vec<String> = set.into_iter().collect();
        if tokens.is_empty() {
            return Err(Error::Domain("alphabet needs at least one token".into()));
        }
        let delimiter = synthesize_delimiter(&tokens);
        Ok(Alphabet { tokens, delimiter })
    }

    /// Builds an alphabet with an explicit delimiter spelling.
    pub fn with_delimiter<I, S>(tokens: I, delimiter: impl Into<String>) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut alphabet = Self::from_tokens(tokens)?;
        let delimiter = delimiter.into();
        if alphabet.tokens.contains(&delimiter) {
            return Err(Error::Domain(format!(
                "delimiter {delimiter:?} collides with a token"
            )));
        }
        alphabet.delimiter = delimiter;
        Ok(alphabet)
    }

    pub fn num_tokens(&self) -> usize {
        self.tokens.len()
    }

    /// The class count `A`: tokens plus the delimiter.
    pub fn size(&self) -> u32 {
        self.tokens.len() as u32 + 1
    }

    pub fn delimiter_id(&self) -> SymbolId {
        self.tokens.len() as SymbolId
    }

    pub fn is_delimiter(&self, symbol: SymbolId) -> bool {
        symbol == self.delimiter_id()
    }

    pub fn token_id(&self, token: &str) -> Option<SymbolId> {
        self.tokens
            .binary_search_by(|t| t.as_str().cmp(token))
            .ok()
            .map(|i| i as SymbolId)
    }

    /// Resolves a symbol spelling: a token or the delimiter.
    pub fn symbol_id(&self, symbol: &str) -> Option<SymbolId> {
        if symbol == self.delimiter {
            Some(self.delimiter_id())
        } else {
            self.token_id(symbol)
        }
    }

    pub fn symbol_name(&self, symbol: SymbolId) -> &str {
        if self.is_delimiter(symbol) {
            &self.delimiter
        } else {
            &self.tokens[symbol as usize]
        }
    }

    pub fn delimiter(&self) -> &str {
        &self.delimiter
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

fn synthesize_delimiter(tokens: &[String]) -> String {
    for cand in DELIMITER_CANDIDATES {
        if !tokens.iter().any(|t| t == cand) {
            return (*cand).to_string();
        }
    }
    let mut cand = String::from("$$");
    while tokens.contains(&cand) {
        cand.push('$');
    }
    cand
}

/// Text layouts understood by [`Dataset::parse`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    /// One line, sentences separated by `/`, one Unicode scalar per token.
    SlashSeparated,
    /// One sentence per line, tokens separated by whitespace.
    LinePerSentence,
}

impl std::str::FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "slash" => Ok(DatasetFormat::SlashSeparated),
            "lines" => Ok(DatasetFormat::LinePerSentence),
            other => Err(Error::Domain(format!(
                "unknown dataset format {other:?} (expected \"slash\" or \"lines\")"
            ))),
        }
    }
}

/// A sample of sentences over an alphabet.
///
/// `total_transitions` counts one transition per token plus the implicit
/// delimiter at each sentence end, i.e. `sum(len + 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    alphabet: Alphabet,
    sentences: Vec<Vec<SymbolId>>,
    total_transitions: u64,
}

impl Dataset {
    /// Wraps pre-tokenized sentences, validating that every token id is in
    /// range and no sentence is empty.
    pub fn new(alphabet: Alphabet, sentences: Vec<Vec<SymbolId>>) -> Result<Self> {
        if sentences.is_empty() {
            return Err(Error::Domain("dataset has no sentences".into()));
        }
        for (i, s) in sentences.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::Domain(format!("sentence {} is empty", i + 1)));
            }
            if let Some(&bad) = s.iter().find(|&&t| t >= alphabet.delimiter_id()) {
                return Err(Error::Domain(format!(
                    "sentence {} contains out-of-alphabet symbol id {bad}",
                    i + 1
                )));
            }
        }
        let total_transitions = sentences.iter().map(|s| s.len() as u64 + 1).sum();
        Ok(Dataset {
            alphabet,
            sentences,
            total_transitions,
        })
    }

    /// Parses dataset text. The alphabet is inferred as the sorted set of
    /// observed tokens plus a synthetic delimiter.
    pub fn parse(text: &str, format: DatasetFormat) -> Result<Self> {
        let raw: Vec<(usize, Vec<String>)> = match format {
            DatasetFormat::SlashSeparated => {
                let trimmed = text.trim();
                if trimmed.is_empty() {
                    return Err(Error::DatasetParse {
                        position: 0,
                        message: "input is empty".into(),
                    });
                }
                let mut out = Vec::new();
                for (i, segment) in trimmed.split('/').enumerate() {
                    if segment.is_empty() {
                        return Err(Error::DatasetParse {
                            position: i + 1,
                            message: "empty sentence between delimiters".into(),
                        });
                    }
                    let mut toks = Vec::new();
                    for ch in segment.chars() {
                        if ch.is_whitespace() {
                            return Err(Error::DatasetParse {
                                position: i + 1,
                                message: "whitespace inside a slash-separated sentence".into(),
                            });
                        }
                        toks.push(ch.to_string());
                    }
                    out.push((i + 1, toks));
                }
                out
            }
            DatasetFormat::LinePerSentence => {
                let mut out = Vec::new();
                for (lineno, line) in text.lines().enumerate() {
                    let toks: Vec<String> =
                        line.split_whitespace().map(str::to_string).collect();
                    if !toks.is_empty() {
                        out.push((lineno + 1, toks));
                    }
                }
                out
            }
        };
        if raw.is_empty() {
            return Err(Error::DatasetParse {
                position: 0,
                message: "zero sentences".into(),
            });
        }
        let alphabet = Alphabet::from_tokens(raw.iter().flat_map(|(_, s)| s.iter().cloned()))?;
        let sentences = raw
            .iter()
            .map(|(_, toks)| {
                toks.iter()
                    .map(|t| alphabet.token_id(t).expect("token was just collected"))
                    .collect()
            })
            .collect();
        Self::new(alphabet, sentences)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn sentences(&self) -> &[Vec<SymbolId>] {
        &self.sentences
    }

    pub fn sentence(&self, index: usize) -> &[SymbolId] {
        &self.sentences[index]
    }

    pub fn num_sentences(&self) -> usize {
        self.sentences.len()
    }

    pub fn total_transitions(&self) -> u64 {
        self.total_transitions
    }

    /// Renders a sentence back to its token spelling.
    pub fn render_sentence(&self, index: usize) -> String {
        self.sentences[index]
            .iter()
            .map(|&t| self.alphabet.symbol_name(t))
            .collect::<Vec<_>>()
            .join("")
    }

    /// Serializes the dataset back to text in the given format.
    pub fn to_text(&self, format: DatasetFormat) -> String {
        let words: Vec<Vec<&str>> = self
            .sentences
            .iter()
            .map(|s| s.iter().map(|&t| self.alphabet.symbol_name(t)).collect())
            .collect();
        match format {
            DatasetFormat::SlashSeparated => words
                .iter()
                .map(|w| w.concat())
                .collect::<Vec<_>>()
                .join("/"),
            DatasetFormat::LinePerSentence => {
                let mut out = String::new();
                for w in &words {
                    out.push_str(&w.join(" "));
                    out.push('\n');
                }
                out
            }
        }
    }
}

/// One arc of a [`Pfsa`]: destination state and transition count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PfsaArc {
    pub dest: StateId,
    pub count: u64,
}

/// A deterministic PFSA: at most one arc per `(state, symbol)`, every arc
/// carrying one or more transitions, every state reachable from the start,
/// and every delimiter arc returning to the start state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pfsa {
    alphabet: Alphabet,
    num_states: u32,
    arcs: BTreeMap<(StateId, SymbolId), PfsaArc>,
}

impl Pfsa {
    /// Validates and builds a machine.
    pub fn new(
        alphabet: Alphabet,
        num_states: u32,
        arcs: BTreeMap<(StateId, SymbolId), PfsaArc>,
    ) -> Result<Self> {
        if num_states == 0 {
            return Err(Error::InvalidMachine("zero states".into()));
        }
        let delim = alphabet.delimiter_id();
        for (&(state, symbol), arc) in &arcs {
            if state >= num_states || arc.dest >= num_states {
                return Err(Error::InvalidMachine(format!(
                    "arc ({state},{symbol}) -> {} references a state outside 0..{num_states}",
                    arc.dest
                )));
            }
            if symbol > delim {
                return Err(Error::InvalidMachine(format!(
                    "arc at state {state} uses unknown symbol id {symbol}"
                )));
            }
            if arc.count == 0 {
                return Err(Error::InvalidMachine(format!(
                    "arc ({state},{symbol}) has zero count"
                )));
            }
            if symbol == delim && arc.dest != 0 {
                return Err(Error::InvalidMachine(format!(
                    "delimiter arc at state {state} must target the start state"
                )));
            }
        }
        let machine = Pfsa {
            alphabet,
            num_states,
            arcs,
        };
        let reached = machine.reachable_states();
        if reached.len() as u32 != num_states {
            let missing = (0..num_states).find(|s| !reached.contains(s)).unwrap();
            return Err(Error::InvalidMachine(format!(
                "state {missing} is unreachable from the start state"
            )));
        }
        Ok(machine)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> u32 {
        self.num_states
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn arc(&self, state: StateId, symbol: SymbolId) -> Option<&PfsaArc> {
        self.arcs.get(&(state, symbol))
    }

    pub fn arcs(&self) -> impl Iterator<Item = (&(StateId, SymbolId), &PfsaArc)> {
        self.arcs.iter()
    }

    /// Arcs leaving one state, in symbol order.
    pub fn arcs_from(
        &self,
        state: StateId,
    ) -> impl Iterator<Item = (SymbolId, &PfsaArc)> {
        self.arcs
            .range((state, 0)..=(state, SymbolId::MAX))
            .map(|(&(_, sym), arc)| (sym, arc))
    }

    pub fn out_degree(&self, state: StateId) -> usize {
        self.arcs_from(state).count()
    }

    pub fn max_out_degree(&self) -> usize {
        (0..self.num_states)
            .map(|s| self.out_degree(s))
            .max()
            .unwrap_or(0)
    }

    /// Per-class outgoing counts of one state, indexed by symbol id over
    /// all `A` classes.
    pub fn out_counts(&self, state: StateId) -> Vec<u64> {
        let mut counts = vec![0u64; self.alphabet.size() as usize];
        for (sym, arc) in self.arcs_from(state) {
            counts[sym as usize] = arc.count;
        }
        counts
    }

    pub fn total_count(&self) -> u64 {
        self.arcs.values().map(|a| a.count).sum()
    }

    fn reachable_states(&self) -> BTreeSet<StateId> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([0u32]);
        seen.insert(0);
        while let Some(s) = queue.pop_front() {
            for (_, arc) in self.arcs_from(s) {
                if seen.insert(arc.dest) {
                    queue.push_back(arc.dest);
                }
            }
        }
        seen
    }

    /// Runs one sentence through the machine and returns the state path:
    /// the start state, the state after each token, and the state after the
    /// final delimiter transition (always the start state again). The path
    /// length is `sentence.len() + 2`.
    pub fn trace(&self, sentence: &[SymbolId]) -> Result<Vec<StateId>> {
        self.trace_indexed(sentence, 0)
    }

    fn trace_indexed(&self, sentence: &[SymbolId], index: usize) -> Result<Vec<StateId>> {
        let delim = self.alphabet.delimiter_id();
        let mut path = Vec::with_capacity(sentence.len() + 2);
        let mut state = 0;
        path.push(state);
        for (pos, &tok) in sentence.iter().enumerate() {
            match self.arcs.get(&(state, tok)) {
                Some(arc) => {
                    state = arc.dest;
                    path.push(state);
                }
                None => {
                    return Err(Error::SentenceRejected {
                        sentence: index,
                        position: pos,
                        state,
                    })
                }
            }
        }
        match self.arcs.get(&(state, delim)) {
            Some(arc) => path.push(arc.dest),
            None => {
                return Err(Error::SentenceRejected {
                    sentence: index,
                    position: sentence.len(),
                    state,
                })
            }
        }
        Ok(path)
    }

    pub fn accepts(&self, sentence: &[SymbolId]) -> bool {
        self.trace(sentence).is_ok()
    }

    /// Refits arc counts to a dataset: every arc count becomes its traversal
    /// tally over all sentences, arcs never traversed are removed, and
    /// unreachable states are then pruned (ids relabeled in ascending order).
    ///
    /// Fails if any sentence is not accepted by the arc structure.
    pub fn fit_counts(&self, data: &Dataset) -> Result<Pfsa> {
        if *data.alphabet() != self.alphabet {
            return Err(Error::AlphabetMismatch(
                "machine and dataset alphabets differ".into(),
            ));
        }
        let delim = self.alphabet.delimiter_id();
        let mut tally: BTreeMap<(StateId, SymbolId), u64> = BTreeMap::new();
        for (i, sentence) in data.sentences().iter().enumerate() {
            let path = self.trace_indexed(sentence, i)?;
            for (pos, &tok) in sentence.iter().enumerate() {
                *tally.entry((path[pos], tok)).or_insert(0) += 1;
            }
            *tally.entry((path[sentence.len()], delim)).or_insert(0) += 1;
        }
        let kept: BTreeMap<(StateId, SymbolId), PfsaArc> = tally
            .into_iter()
            .map(|(key, count)| {
                let dest = self.arcs[&key].dest;
                (key, PfsaArc { dest, count })
            })
            .collect();

        // Prune states left unreachable once dead arcs are gone.
        let mut reached = BTreeSet::from([0u32]);
        let mut queue = VecDeque::from([0u32]);
        while let Some(s) = queue.pop_front() {
            for (&(src, _), arc) in kept.range((s, 0)..=(s, SymbolId::MAX)) {
                debug_assert_eq!(src, s);
                if reached.insert(arc.dest) {
                    queue.push_back(arc.dest);
                }
            }
        }
        let relabel: BTreeMap<StateId, StateId> = reached
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new as StateId))
            .collect();
        let arcs = kept
            .into_iter()
            .filter(|((src, _), _)| relabel.contains_key(src))
            .map(|((src, sym), arc)| {
                (
                    (relabel[&src], sym),
                    PfsaArc {
                        dest: relabel[&arc.dest],
                        count: arc.count,
                    },
                )
            })
            .collect();
        Pfsa::new(self.alphabet.clone(), relabel.len() as u32, arcs)
    }

    /// Relabels states in breadth-first discovery order from the start
    /// state, exploring arcs in symbol order. Two machines that differ only
    /// by a state relabeling canonicalize to equal machines.
    pub fn canonicalize(&self) -> Pfsa {
        let mut order: BTreeMap<StateId, StateId> = BTreeMap::new();
        let mut queue = VecDeque::from([0u32]);
        order.insert(0, 0);
        while let Some(s) = queue.pop_front() {
            for (_, arc) in self.arcs_from(s) {
                if !order.contains_key(&arc.dest) {
                    order.insert(arc.dest, order.len() as StateId);
                    queue.push_back(arc.dest);
                }
            }
        }
        let arcs = self
            .arcs
            .iter()
            .map(|(&(src, sym), arc)| {
                (
                    (order[&src], sym),
                    PfsaArc {
                        dest: order[&arc.dest],
                        count: arc.count,
                    },
                )
            })
            .collect();
        Pfsa {
            alphabet: self.alphabet.clone(),
            num_states: self.num_states,
            arcs,
        }
    }

    /// True when the two machines are the same automaton up to state
    /// relabeling, ignoring arc counts.
    pub fn is_isomorphic(&self, other: &Pfsa) -> bool {
        if self.alphabet != other.alphabet || self.num_states != other.num_states {
            return false;
        }
        let a = self.canonicalize();
        let b = other.canonicalize();
        a.arcs.len() == b.arcs.len()
            && a.arcs
                .iter()
                .zip(b.arcs.iter())
                .all(|((ka, aa), (kb, ab))| ka == kb && aa.dest == ab.dest)
    }

    /// True when the machines are isomorphic with equal arc counts too.
    pub fn is_isomorphic_strict(&self, other: &Pfsa) -> bool {
        if self.alphabet != other.alphabet || self.num_states != other.num_states {
            return false;
        }
        self.canonicalize().arcs == other.canonicalize().arcs
    }

    /// Serializes to the line-based machine format parsed by [`Pfsa::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "states {}", self.num_states).unwrap();
        writeln!(out, "tokens {}", self.alphabet.tokens().join(" ")).unwrap();
        writeln!(out, "delimiter {}", self.alphabet.delimiter()).unwrap();
        for (&(src, sym), arc) in &self.arcs {
            writeln!(
                out,
                "arc {} {} {} {}",
                src,
                self.alphabet.symbol_name(sym),
                arc.dest,
                arc.count
            )
            .unwrap();
        }
        out
    }

    /// Parses the format produced by [`Pfsa::to_text`].
    pub fn parse(text: &str) -> Result<Pfsa> {
        let mut num_states: Option<u32> = None;
        let mut tokens: Option<Vec<String>> = None;
        let mut delimiter: Option<String> = None;
        let mut raw_arcs: Vec<(usize, StateId, String, StateId, u64)> = Vec::new();

        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let head = parts.next().unwrap();
            let err = |message: String| Error::MachineParse {
                line: lineno + 1,
                message,
            };
            match head {
                "states" => {
                    let v = parts
                        .next()
                        .ok_or_else(|| err("missing state count".into()))?;
                    num_states =
                        Some(v.parse().map_err(|_| err(format!("bad state count {v:?}")))?);
                }
                "tokens" => tokens = Some(parts.map(str::to_string).collect()),
                "delimiter" => {
                    delimiter = Some(
                        parts
                            .next()
                            .ok_or_else(|| err("missing delimiter".into()))?
                            .to_string(),
                    )
                }
                "arc" => {
                    let fields: Vec<&str> = parts.collect();
                    if fields.len() != 4 {
                        return Err(err("arc line needs: arc <src> <symbol> <dest> <count>".into()));
                    }
                    let src = fields[0]
                        .parse()
                        .map_err(|_| err(format!("bad source state {:?}", fields[0])))?;
                    let dest = fields[2]
                        .parse()
                        .map_err(|_| err(format!("bad destination state {:?}", fields[2])))?;
                    let count = fields[3]
                        .parse()
                        .map_err(|_| err(format!("bad count {:?}", fields[3])))?;
                    raw_arcs.push((lineno + 1, src, fields[1].to_string(), dest, count));
                }
                other => return Err(err(format!("unknown directive {other:?}"))),
            }
        }

        let num_states = num_states.ok_or(Error::MachineParse {
            line: 0,
            message: "missing \"states\" line".into(),
        })?;
        let tokens = tokens.ok_or(Error::MachineParse {
            line: 0,
            message: "missing \"tokens\" line".into(),
        })?;
        let delimiter = delimiter.ok_or(Error::MachineParse {
            line: 0,
            message: "missing \"delimiter\" line".into(),
        })?;
        let alphabet = Alphabet::with_delimiter(tokens, delimiter)?;
        let mut arcs = BTreeMap::new();
        for (line, src, sym, dest, count) in raw_arcs {
            let symbol = alphabet.symbol_id(&sym).ok_or(Error::MachineParse {
                line,
                message: format!("unknown symbol {sym:?}"),
            })?;
            if arcs.insert((src, symbol), PfsaArc { dest, count }).is_some() {
                return Err(Error::MachineParse {
                    line,
                    message: format!("duplicate arc ({src}, {sym})"),
                });
            }
        }
        Pfsa::new(alphabet, num_states, arcs)
    }

    /// Renders the machine as a Graphviz digraph. Arcs are labeled
    /// `symbol/count`; delimiter arcs are dashed.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph pfsa {\n");
        out.push_str("    rankdir=LR;\n");
        out.push_str("    node [shape=circle];\n");
        out.push_str("    __start [shape=point];\n");
        out.push_str("    __start -> 0;\n");
        for (&(src, sym), arc) in &self.arcs {
            let style = if self.alphabet.is_delimiter(sym) {
                ", style=dashed"
            } else {
                ""
            };
            writeln!(
                out,
                "    {} -> {} [label=\"{}/{}\"{}];",
                src,
                arc.dest,
                self.alphabet.symbol_name(sym),
                arc.count,
                style
            )
            .unwrap();
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn classic_dataset() -> Dataset {
        Dataset::parse(
            "CAAAB/BBAAB/CAAB/BBAB/CAB/BBB/CB",
            DatasetFormat::SlashSeparated,
        )
        .unwrap()
    }

    /// 1-state machine looping on every symbol of the dataset, with counts
    /// refit to it.
    fn null_machine(data: &Dataset) -> Pfsa {
        let delim = data.alphabet().delimiter_id();
        let mut arcs = BTreeMap::new();
        for sentence in data.sentences() {
            for &tok in sentence {
                arcs.entry((0, tok)).or_insert(PfsaArc { dest: 0, count: 0 }).count += 1;
            }
            arcs.entry((0, delim)).or_insert(PfsaArc { dest: 0, count: 0 }).count += 1;
        }
        Pfsa::new(data.alphabet().clone(), 1, arcs).unwrap()
    }

    #[test]
    fn parse_classic_dataset() {
        let d = classic_dataset();
        assert_eq!(d.num_sentences(), 7);
        assert_eq!(d.alphabet().tokens(), &["A", "B", "C"]);
        assert_eq!(d.alphabet().size(), 4);
        assert_eq!(d.total_transitions(), 33);
        // First-symbol tallies: C starts 4 sentences, B starts 3.
        let c = d.alphabet().token_id("C").unwrap();
        let b = d.alphabet().token_id("B").unwrap();
        let firsts: Vec<SymbolId> = d.sentences().iter().map(|s| s[0]).collect();
        assert_eq!(firsts.iter().filter(|&&t| t == c).count(), 4);
        assert_eq!(firsts.iter().filter(|&&t| t == b).count(), 3);
    }

    #[test]
    fn parse_single_token_sentence() {
        let d = Dataset::parse("A", DatasetFormat::SlashSeparated).unwrap();
        assert_eq!(d.num_sentences(), 1);
        assert_eq!(d.total_transitions(), 2);
    }

    #[test]
    fn parse_rejects_empty_sentences() {
        let err = Dataset::parse("AB//C", DatasetFormat::SlashSeparated).unwrap_err();
        match err {
            Error::DatasetParse { position, .. } => assert_eq!(position, 2),
            other => panic!("unexpected error {other:?}"),
        }
        assert!(Dataset::parse("   ", DatasetFormat::SlashSeparated).is_err());
        assert!(Dataset::parse("\n\n", DatasetFormat::LinePerSentence).is_err());
    }

    #[test]
    fn parse_line_format() {
        let d = Dataset::parse("a b a\nb b\n\na\n", DatasetFormat::LinePerSentence).unwrap();
        assert_eq!(d.num_sentences(), 3);
        assert_eq!(d.alphabet().tokens(), &["a", "b"]);
        assert_eq!(d.total_transitions(), 4 + 3 + 2);
        assert_eq!(d.to_text(DatasetFormat::LinePerSentence), "a b a\nb b\na\n");
    }

    #[test]
    fn trace_single_state_loop() {
        let d = classic_dataset();
        let m = null_machine(&d);
        let cb = d.sentences().iter().find(|s| s.len() == 2).unwrap();
        assert_eq!(m.trace(cb).unwrap(), vec![0, 0, 0, 0]);
    }

    #[test]
    fn trace_reports_failing_position() {
        let ab = Dataset::parse("AB", DatasetFormat::SlashSeparated).unwrap();
        let delim = ab.alphabet().delimiter_id();
        // Same alphabet as the dataset but only an A self-loop: tracing
        // "AB" dies at the B, position 1.
        let mut arcs = BTreeMap::new();
        arcs.insert((0, 0), PfsaArc { dest: 0, count: 1 });
        arcs.insert((0, delim), PfsaArc { dest: 0, count: 1 });
        let m = Pfsa::new(ab.alphabet().clone(), 1, arcs).unwrap();
        let err = m.trace(ab.sentence(0)).unwrap_err();
        match err {
            Error::SentenceRejected { position, .. } => assert_eq!(position, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn fit_counts_tallies_and_prunes() {
        let d = Dataset::parse("A/A", DatasetFormat::SlashSeparated).unwrap();
        let delim = d.alphabet().delimiter_id();
        // Loop machine with a stale extra count; refit must tally 2/2.
        let mut arcs = BTreeMap::new();
        arcs.insert((0, 0), PfsaArc { dest: 0, count: 9 });
        arcs.insert((0, delim), PfsaArc { dest: 0, count: 9 });
        let m = Pfsa::new(d.alphabet().clone(), 1, arcs).unwrap();
        let fitted = m.fit_counts(&d).unwrap();
        assert_eq!(fitted.arc(0, 0).unwrap().count, 2);
        assert_eq!(fitted.arc(0, delim).unwrap().count, 2);
        assert_eq!(fitted.total_count(), d.total_transitions());
    }

    #[test]
    fn fit_counts_drops_untraversed_arcs_and_states() {
        let d = Dataset::parse("A", DatasetFormat::SlashSeparated).unwrap();
        let delim = d.alphabet().delimiter_id();
        // 2-state machine where state 1 is reachable only via an arc the
        // data never takes twice: A goes to 1 from 0, but state 1's extra
        // A-loop is never used.
        let mut arcs = BTreeMap::new();
        arcs.insert((0, 0), PfsaArc { dest: 1, count: 1 });
        arcs.insert((1, 0), PfsaArc { dest: 1, count: 1 });
        arcs.insert((1, delim), PfsaArc { dest: 0, count: 1 });
        let m = Pfsa::new(d.alphabet().clone(), 2, arcs).unwrap();
        let fitted = m.fit_counts(&d).unwrap();
        assert_eq!(fitted.num_states(), 2);
        assert!(fitted.arc(1, 0).is_none(), "dead self-loop must be pruned");
        assert_eq!(fitted.num_arcs(), 2);
    }

    #[test]
    fn fit_counts_rejects_unaccepted_sentences() {
        let d = Dataset::parse("AB", DatasetFormat::SlashSeparated).unwrap();
        let only_a = {
            let delim = d.alphabet().delimiter_id();
            let mut arcs = BTreeMap::new();
            arcs.insert((0, 0), PfsaArc { dest: 0, count: 1 });
            arcs.insert((0, delim), PfsaArc { dest: 0, count: 1 });
            Pfsa::new(d.alphabet().clone(), 1, arcs).unwrap()
        };
        assert!(matches!(
            only_a.fit_counts(&d),
            Err(Error::SentenceRejected { sentence: 0, .. })
        ));
    }

    #[test]
    fn canonicalize_idempotent_and_distinguishes() {
        let d = Dataset::parse("AB", DatasetFormat::SlashSeparated).unwrap();
        let delim = d.alphabet().delimiter_id();
        // chain: 0 -A-> 1 -B-> 0, delimiter at 0
        let mut chain_arcs = BTreeMap::new();
        chain_arcs.insert((0, 0), PfsaArc { dest: 1, count: 1 });
        chain_arcs.insert((1, 1), PfsaArc { dest: 0, count: 1 });
        chain_arcs.insert((0, delim), PfsaArc { dest: 0, count: 1 });
        let chain = Pfsa::new(d.alphabet().clone(), 2, chain_arcs).unwrap();
        // same shape but B loops on state 1 before the delimiter
        let mut other_arcs = BTreeMap::new();
        other_arcs.insert((0, 0), PfsaArc { dest: 1, count: 1 });
        other_arcs.insert((1, 1), PfsaArc { dest: 1, count: 1 });
        other_arcs.insert((1, delim), PfsaArc { dest: 0, count: 1 });
        let other = Pfsa::new(d.alphabet().clone(), 2, other_arcs).unwrap();

        assert_eq!(chain.canonicalize(), chain.canonicalize().canonicalize());
        assert_eq!(chain, chain.canonicalize());
        assert!(!chain.is_isomorphic(&other));
    }

    #[test]
    fn isomorphism_under_relabeling() {
        let d = Dataset::parse("AAB", DatasetFormat::SlashSeparated).unwrap();
        let delim = d.alphabet().delimiter_id();
        let mut arcs = BTreeMap::new();
        arcs.insert((0, 0), PfsaArc { dest: 1, count: 2 });
        arcs.insert((1, 0), PfsaArc { dest: 2, count: 1 });
        arcs.insert((2, 1), PfsaArc { dest: 0, count: 1 });
        arcs.insert((1, 1), PfsaArc { dest: 0, count: 1 });
        arcs.insert((0, delim), PfsaArc { dest: 0, count: 1 });
        let m = Pfsa::new(d.alphabet().clone(), 3, arcs.clone()).unwrap();
        // swap states 1 and 2
        let swap = |s: StateId| match s {
            1 => 2,
            2 => 1,
            x => x,
        };
        let swapped_arcs: BTreeMap<_, _> = arcs
            .iter()
            .map(|(&(src, sym), arc)| {
                (
                    (swap(src), sym),
                    PfsaArc {
                        dest: swap(arc.dest),
                        count: arc.count,
                    },
                )
            })
            .collect();
        let swapped = Pfsa::new(d.alphabet().clone(), 3, swapped_arcs).unwrap();
        assert!(m.is_isomorphic(&swapped));
        assert!(m.is_isomorphic_strict(&swapped));
        assert_eq!(m.canonicalize(), swapped.canonicalize());
    }

    #[test]
    fn machine_invariants_enforced() {
        let alphabet = Alphabet::from_tokens(["A"]).unwrap();
        let delim = alphabet.delimiter_id();
        // delimiter arc not targeting start
        let mut arcs = BTreeMap::new();
        arcs.insert((0, 0), PfsaArc { dest: 1, count: 1 });
        arcs.insert((1, delim), PfsaArc { dest: 1, count: 1 });
        assert!(Pfsa::new(alphabet.clone(), 2, arcs).is_err());
        // zero count
        let mut arcs = BTreeMap::new();
        arcs.insert((0, delim), PfsaArc { dest: 0, count: 0 });
        assert!(Pfsa::new(alphabet.clone(), 1, arcs).is_err());
        // unreachable state
        let mut arcs = BTreeMap::new();
        arcs.insert((0, delim), PfsaArc { dest: 0, count: 1 });
        assert!(Pfsa::new(alphabet, 2, arcs).is_err());
    }

    #[test]
    fn text_round_trip() {
        let d = classic_dataset();
        let m = null_machine(&d);
        let parsed = Pfsa::parse(&m.to_text()).unwrap();
        assert_eq!(parsed, m);
    }

    #[test]
    fn dot_marks_delimiter_dashed() {
        let d = Dataset::parse("A", DatasetFormat::SlashSeparated).unwrap();
        let m = null_machine(&d);
        let dot = m.to_dot();
        assert!(dot.contains("label=\"A/1\""));
        assert!(dot.contains("label=\"$/1\", style=dashed"));
    }

    #[test]
    fn delimiter_never_collides() {
        let a = Alphabet::from_tokens(["$", "#", "%", "&", "_"]).unwrap();
        assert!(a.tokens().iter().all(|t| t != a.delimiter()));
        assert!(Alphabet::with_delimiter(["A", "B"], "A").is_err());
    }

    proptest! {
        /// Canonicalization is invariant under random relabelings of the
        /// non-start states.
        #[test]
        fn canonicalize_relabel_invariant(seed in 0u64..500) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let d = classic_dataset();
            // Build a small chain-with-loops machine from the prefix tree of
            // the first three sentences to get something nontrivial.
            let sub = Dataset::new(
                d.alphabet().clone(),
                d.sentences()[..3].to_vec(),
            ).unwrap();
            let m = crate::baselines::build_prefix_tree(&sub);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut perm: Vec<StateId> = (1..m.num_states()).collect();
            perm.shuffle(&mut rng);
            let map = |s: StateId| if s == 0 { 0 } else { perm[(s - 1) as usize] };
            let arcs: BTreeMap<_, _> = m
                .arcs()
                .map(|(&(src, sym), arc)| {
                    ((map(src), sym), PfsaArc { dest: map(arc.dest), count: arc.count })
                })
                .collect();
            let relabeled = Pfsa::new(m.alphabet().clone(), m.num_states(), arcs).unwrap();
            prop_assert_eq!(m.canonicalize(), relabeled.canonicalize());
            prop_assert!(m.is_isomorphic(&relabeled));
        }
    }
}
