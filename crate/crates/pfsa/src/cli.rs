//! The `pfsa` command line tool.
//!
//! Sub-commands: `induce`, `exhaustive`, `ktails`, `gen`, `sample`,
//! `bench`, `export-dot`. Every tunable flag can also be supplied through
//! an environment variable with the `PFSA_` prefix; explicit flags win.
//! Exit codes: 0 success, 1 usage error, 2 runtime error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{ArgAction, Args, Parser, Subcommand};

use crate::automaton::{Dataset, DatasetFormat, Pfsa};
use crate::baselines;
use crate::benchmark::{
    gen_random_pfsa, run_benchmark, run_size_sweep, sample_until_coverage, BenchAlgorithm,
    BenchConfig, GeneratorParams,
};
use crate::error::{Error, Result};
use crate::mml::criterion_by_name;
use crate::report;
use crate::search::{
    induce, ExpansionOrder, InductionResult, MuTable, SearchBudget, SearchMode, SearchOptions,
};

#[derive(Parser)]
#[command(
    name = "pfsa",
    version,
    about = "Induction of probabilistic finite state automata by minimum message length search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Induce a machine from a dataset of sentences
    Induce(InduceArgs),
    /// Enumerate the whole construction tree without pruning (oracle)
    Exhaustive(ExhaustiveArgs),
    /// Prefix-tree plus k-tails merging baseline
    Ktails(KtailsArgs),
    /// Generate a random machine
    Gen(GenArgs),
    /// Sample sentences from a machine until every arc is covered
    Sample(SampleArgs),
    /// Random-machine benchmark or sample-size sweep
    Bench(BenchArgs),
    /// Export a machine as Graphviz DOT
    ExportDot(ExportDotArgs),
}

#[derive(Args)]
struct InputOpts {
    /// Input file
    #[arg(long, env = "PFSA_INPUT")]
    input: PathBuf,
    /// Dataset text format: "slash" or "lines"
    #[arg(long, env = "PFSA_FORMAT", default_value = "slash")]
    format: DatasetFormat,
}

impl InputOpts {
    fn read_dataset(&self) -> Result<Dataset> {
        Dataset::parse(&fs::read_to_string(&self.input)?, self.format)
    }
}

#[derive(Args)]
struct ReportOpts {
    /// Report format: "text" or "json"
    #[arg(long, env = "PFSA_REPORT", default_value = "text")]
    report: String,
    /// Write the report here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

impl ReportOpts {
    fn json(&self) -> Result<bool> {
        match self.report.as_str() {
            "json" => Ok(true),
            "text" => Ok(false),
            other => Err(Error::Domain(format!(
                "unknown report format {other:?} (expected \"text\" or \"json\")"
            ))),
        }
    }

    fn write(&self, content: &str) -> Result<()> {
        write_output(self.output.as_deref(), content)
    }
}

#[derive(Args, Clone)]
struct SearchArgs {
    /// Search mode: "prove", "greedy" or "stochastic"
    #[arg(long, env = "PFSA_MODE", default_value = "stochastic")]
    mode: SearchMode,
    /// Apply the distribution-compatibility cull (true/false); defaults
    /// to off in prove mode and on otherwise
    #[arg(long, env = "PFSA_COMPAT", action = ArgAction::Set)]
    compat: Option<bool>,
    /// Frontier cap for stochastic mode
    #[arg(long, env = "PFSA_NODE_CAP", default_value_t = 150_000)]
    node_cap: usize,
    /// Tier distribution as "mu:prob,..." (defaults to 1:.5,.8:.35,.5:.1,0:.05)
    #[arg(long, env = "PFSA_MU_TABLE")]
    mu_table: Option<String>,
    /// Estimate-driven : partial-driven selection ratio for greedy mode
    #[arg(long, env = "PFSA_SWITCH_RATIO", default_value = "3:1")]
    switch_ratio: String,
    /// Dangling-arc choice: "most-transitions" or "fifo"
    #[arg(long, env = "PFSA_EXPANSION_ORDER", default_value = "most-transitions")]
    expansion_order: ExpansionOrder,
    /// Stop after this many nodes examined
    #[arg(long, env = "PFSA_BUDGET_NODES")]
    budget_nodes: Option<u64>,
    /// Stop after this many seconds
    #[arg(long, env = "PFSA_TIMEOUT_SECS")]
    timeout_secs: Option<f64>,
    #[arg(long, env = "PFSA_SEED", default_value_t = 0)]
    seed: u64,
    /// Scoring criterion name
    #[arg(long, env = "PFSA_CRITERION", default_value = "wg")]
    criterion: String,
    /// Worker threads (used by bench trials; the search engine is serial)
    #[arg(long, env = "PFSA_THREADS", default_value_t = 1)]
    threads: usize,
}

impl SearchArgs {
    fn to_options(&self) -> Result<SearchOptions> {
        let mu_table = match &self.mu_table {
            Some(spec) => MuTable::parse(spec)?,
            None => MuTable::default(),
        };
        let (est, part) = self
            .switch_ratio
            .split_once(':')
            .ok_or_else(|| {
                Error::Domain(format!(
                    "bad switch ratio {:?}, expected e.g. 3:1",
                    self.switch_ratio
                ))
            })
            .and_then(|(a, b)| {
                let a = a
                    .trim()
                    .parse()
                    .map_err(|_| Error::Domain(format!("bad ratio part {a:?}")))?;
                let b = b
                    .trim()
                    .parse()
                    .map_err(|_| Error::Domain(format!("bad ratio part {b:?}")))?;
                Ok((a, b))
            })?;
        if self.threads == 0 {
            return Err(Error::Domain("--threads must be at least 1".into()));
        }
        let opts = SearchOptions {
            mode: self.mode,
            compat_test: self.compat.unwrap_or(self.mode != SearchMode::Prove),
            node_cap: self.node_cap,
            expansion_order: self.expansion_order,
            mu_table,
            switch_ratio: (est, part),
            seed: self.seed,
            budget: SearchBudget {
                max_nodes: self.budget_nodes,
                timeout: self.timeout_secs.map(Duration::from_secs_f64),
            },
        };
        opts.validate()?;
        Ok(opts)
    }
}

#[derive(Args)]
struct InduceArgs {
    #[command(flatten)]
    input: InputOpts,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    report: ReportOpts,
}

#[derive(Args)]
struct ExhaustiveArgs {
    #[command(flatten)]
    input: InputOpts,
    /// Abort the enumeration beyond this many nodes
    #[arg(long, env = "PFSA_BUDGET_NODES", default_value_t = 10_000_000)]
    budget_nodes: u64,
    /// Scoring criterion name
    #[arg(long, env = "PFSA_CRITERION", default_value = "wg")]
    criterion: String,
    #[command(flatten)]
    report: ReportOpts,
}

#[derive(Args)]
struct KtailsArgs {
    #[command(flatten)]
    input: InputOpts,
    /// Tail length
    #[arg(long, env = "PFSA_K", default_value_t = 3)]
    k: u32,
    /// Scoring criterion name (for the reported cost)
    #[arg(long, env = "PFSA_CRITERION", default_value = "wg")]
    criterion: String,
    #[command(flatten)]
    report: ReportOpts,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, env = "PFSA_STATES", default_value_t = 5)]
    states: u32,
    /// Token count, excluding the delimiter
    #[arg(long, env = "PFSA_TOKENS", default_value_t = 3)]
    tokens: u32,
    /// Target mean out-degree per state
    #[arg(long, env = "PFSA_DENSITY", default_value_t = 2.5)]
    density: f64,
    /// Probability that a non-start state carries a delimiter arc
    #[arg(long, env = "PFSA_DELIMITER_MASS", default_value_t = 0.4)]
    delimiter_mass: f64,
    #[arg(long, env = "PFSA_SEED", default_value_t = 0)]
    seed: u64,
    /// Write the machine here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    /// Machine file (as written by `gen`)
    #[arg(long, env = "PFSA_INPUT")]
    input: PathBuf,
    /// Minimum traversals required per arc
    #[arg(long, env = "PFSA_MIN_PER_ARC", default_value_t = 4)]
    min_per_arc: u64,
    #[arg(long, env = "PFSA_SEED", default_value_t = 0)]
    seed: u64,
    /// Dataset output format: "slash" or "lines"
    #[arg(long, env = "PFSA_FORMAT", default_value = "lines")]
    format: DatasetFormat,
    /// Write the dataset here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, env = "PFSA_TRIALS", default_value_t = 25)]
    trials: u32,
    #[arg(long, env = "PFSA_STATES", default_value_t = 5)]
    states: u32,
    #[arg(long, env = "PFSA_TOKENS", default_value_t = 3)]
    tokens: u32,
    #[arg(long, env = "PFSA_DENSITY", default_value_t = 2.5)]
    density: f64,
    #[arg(long, env = "PFSA_DELIMITER_MASS", default_value_t = 0.4)]
    delimiter_mass: f64,
    #[arg(long, env = "PFSA_MIN_PER_ARC", default_value_t = 4)]
    min_per_arc: u64,
    /// Comma-separated inducers to run: any of "igs", "ktails"
    #[arg(long, env = "PFSA_ALGORITHMS", default_value = "igs,ktails")]
    algorithms: String,
    /// Tail length for the k-tails entry
    #[arg(long, env = "PFSA_K", default_value_t = 3)]
    k: u32,
    /// Run a sample-size sweep on one machine instead: comma-separated
    /// coverage multipliers, e.g. "1,2,4,8"
    #[arg(long, env = "PFSA_SWEEP")]
    sweep: Option<String>,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    report: ReportOpts,
}

#[derive(Args)]
struct ExportDotArgs {
    /// Machine file (as written by `gen`)
    #[arg(long, env = "PFSA_INPUT")]
    input: PathBuf,
    /// Write the DOT graph here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

/// Parses and executes one invocation; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            2
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Induce(args) => cmd_induce(args),
        Command::Exhaustive(args) => cmd_exhaustive(args),
        Command::Ktails(args) => cmd_ktails(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Bench(args) => cmd_bench(args),
        Command::ExportDot(args) => cmd_export_dot(args),
    }
}

fn emit_result(result: &InductionResult, criterion: &str, report: &ReportOpts) -> Result<()> {
    let content = if report.json()? {
        report::InductionDoc::from_result(result, criterion).to_json()
    } else {
        report::render_induction_report(result)
    };
    report.write(&content)
}

fn cmd_induce(args: InduceArgs) -> Result<()> {
    let data = args.input.read_dataset()?;
    let criterion = criterion_by_name(&args.search.criterion)?;
    let opts = args.search.to_options()?;
    let result = induce(&data, criterion.as_ref(), &opts)?;
    emit_result(&result, criterion.name(), &args.report)
}

fn cmd_exhaustive(args: ExhaustiveArgs) -> Result<()> {
    let data = args.input.read_dataset()?;
    let criterion = criterion_by_name(&args.criterion)?;
    let result = baselines::exhaustive_search(&data, criterion.as_ref(), args.budget_nodes)?;
    emit_result(&result, criterion.name(), &args.report)
}

fn cmd_ktails(args: KtailsArgs) -> Result<()> {
    let started = std::time::Instant::now();
    let data = args.input.read_dataset()?;
    let criterion = criterion_by_name(&args.criterion)?;
    let machine = baselines::ktails(&data, args.k);
    let mml = criterion.score(&machine, &data)?;
    let result = InductionResult {
        machine,
        mml,
        nodes_examined: 0,
        nodes_created: 0,
        completed_pfsa: 1,
        proven_optimal: false,
        elapsed: started.elapsed(),
    };
    emit_result(&result, criterion.name(), &args.report)
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let machine = gen_random_pfsa(&GeneratorParams {
        num_states: args.states,
        num_tokens: args.tokens,
        density: args.density,
        delimiter_mass: args.delimiter_mass,
        seed: args.seed,
    })?;
    write_output(args.output.as_deref(), &machine.to_text())
}

fn cmd_sample(args: SampleArgs) -> Result<()> {
    let machine = Pfsa::parse(&fs::read_to_string(&args.input)?)?;
    let data = sample_until_coverage(&machine, args.seed, args.min_per_arc)?;
    write_output(args.output.as_deref(), &data.to_text(args.format))
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let criterion = criterion_by_name(&args.search.criterion)?;
    let generator = GeneratorParams {
        num_states: args.states,
        num_tokens: args.tokens,
        density: args.density,
        delimiter_mass: args.delimiter_mass,
        seed: args.search.seed,
    };
    let search_opts = args.search.to_options()?;

    if let Some(spec) = &args.sweep {
        let multipliers: Vec<u64> = spec
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| Error::Domain(format!("bad sweep multiplier {s:?}")))
            })
            .collect::<Result<_>>()?;
        let machine = gen_random_pfsa(&generator)?;
        let points = run_size_sweep(
            &machine,
            args.min_per_arc,
            &multipliers,
            args.search.seed,
            &search_opts,
            criterion.as_ref(),
        )?;
        let content = if args.report.json()? {
            report::SweepDoc::from_points(&points).to_json()
        } else {
            report::render_sweep_report(&points)
        };
        return args.report.write(&content);
    }

    let algorithms = args
        .algorithms
        .split(',')
        .map(|name| match name.trim() {
            "igs" => Ok((
                "igs".to_string(),
                BenchAlgorithm::Igs(search_opts.clone()),
            )),
            "ktails" => Ok(("ktails".to_string(), BenchAlgorithm::KTails { k: args.k })),
            other => Err(Error::Domain(format!("unknown algorithm {other:?}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let config = BenchConfig {
        trials: args.trials,
        generator,
        min_per_arc: args.min_per_arc,
        algorithms,
        seed: args.search.seed,
        threads: args.search.threads,
    };
    let bench = run_benchmark(&config, criterion.as_ref())?;
    let content = if args.report.json()? {
        report::BenchDoc::from_report(&bench).to_json()
    } else {
        report::render_bench_report(&bench)
    };
    args.report.write(&content)
}

fn cmd_export_dot(args: ExportDotArgs) -> Result<()> {
    let machine = Pfsa::parse(&fs::read_to_string(&args.input)?)?;
    write_output(args.output.as_deref(), &machine.to_dot())
}
