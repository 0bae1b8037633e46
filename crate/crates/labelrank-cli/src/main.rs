//! Command-line front end for the `labelrank` crate.
//!
//! Four subcommands cover the usual workflow:
//!
//! * `detect` runs LabelRank or the LPA baseline on one edge list and
//!   prints the per-node community assignment.
//! * `sweep` runs LabelRank across an inflation and update-fraction grid
//!   and reports every grid point plus the best one.
//! * `bench` times repeated runs over one or more inputs and fits wall
//!   time against edge count.
//! * `stability` runs LPA across seeds (or LabelRank twice) and reports
//!   how much the partition moves.
//!
//! Documents go to stdout or `--output` and never contain timings or
//! timestamps, so identical invocations on identical inputs produce
//! byte-identical documents; wall-clock timing goes to stderr. The one
//! exception is `bench`, whose document body is measured times.
//!
//! Exit codes: 0 on success, 1 for usage and input-validation errors,
//! 2 for runtime failures such as unreadable files.

use std::collections::HashMap;
use std::env;
use std::fmt::{self, Write as _};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use labelrank::dynamics::TraceRow;
use labelrank::graph::{GraphError, LoadOptions};
use labelrank::lpa;
use labelrank::metrics::{self, Partition, PartitionComparison};
use labelrank::{run_labelrank, Graph, LabelRankResult, Params};
use rayon::prelude::*;
use serde::Serialize;

/// Failures split by exit code: usage and input-validation problems exit
/// with 1, runtime failures with 2.
#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(message) | CliError::Runtime(message) => f.write_str(message),
        }
    }
}

/// Wraps an error that indicates a bug or an environment failure rather
/// than a bad invocation.
fn internal(err: impl fmt::Display) -> CliError {
    CliError::Runtime(err.to_string())
}

#[derive(Parser)]
#[command(
    name = "labelrank",
    version,
    about = "Deterministic community detection with LabelRank, plus an LPA baseline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on one graph and print the community assignment.
    Detect(DetectArgs),
    /// Run LabelRank over a parameter grid and report every grid point.
    Sweep(SweepArgs),
    /// Time repeated runs across one or more inputs.
    Bench(BenchArgs),
    /// Measure partition variability across seeds.
    Stability(StabilityArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    Labelrank,
    Lpa,
}

impl Algorithm {
    fn as_str(self) -> &'static str {
        match self {
            Algorithm::Labelrank => "labelrank",
            Algorithm::Lpa => "lpa",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Json,
}

/// Algorithm parameters shared by the subcommands that run LabelRank.
#[derive(Args)]
struct ParamArgs {
    /// Inflation exponent (at least 1)
    #[arg(long, default_value_t = 2.0)]
    inflation: f64,

    /// Cutoff threshold in [0, 1]; labels below it are dropped
    #[arg(long, default_value_t = 0.1)]
    cutoff: f64,

    /// Conditional-update fraction in [0, 1]
    #[arg(long, default_value_t = 0.6)]
    q: f64,

    /// Stop once some numChange value has repeated this many times
    #[arg(long = "stop-freq", default_value_t = 5)]
    stop_freq: u32,

    /// Iteration cap (default 1000 for labelrank, 100 for lpa)
    #[arg(long = "max-iters")]
    max_iters: Option<u32>,
}

impl ParamArgs {
    fn to_params(&self) -> Result<Params, CliError> {
        let params = Params {
            inflation: self.inflation,
            cutoff: self.cutoff,
            update_fraction: self.q,
            stop_frequency: self.stop_freq,
            max_iterations: self.max_iters.unwrap_or(1000),
            ..Params::default()
        };
        params
            .validate()
            .map_err(|err| CliError::Usage(err.to_string()))?;
        Ok(params)
    }

    fn lpa_max_iterations(&self) -> u32 {
        self.max_iters.unwrap_or(100)
    }
}

#[derive(Args)]
struct DetectArgs {
    /// Edge-list file: one "u v" pair per line, `#` starts a comment
    input: PathBuf,

    /// Algorithm to run
    #[arg(long, value_enum, default_value_t = Algorithm::Labelrank)]
    algorithm: Algorithm,

    #[command(flatten)]
    params: ParamArgs,

    /// RNG seed for lpa tie-breaking (labelrank ignores it)
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Document format
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,

    /// Record one row per iteration (labelrank only)
    #[arg(long)]
    trace: bool,

    /// Two-column "node community" file to score agreement against
    #[arg(long)]
    truth: Option<PathBuf>,

    /// Write the document here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Edge-list file: one "u v" pair per line, `#` starts a comment
    input: PathBuf,

    /// Comma-separated inflation values
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.5, 2.0])]
    inflations: Vec<f64>,

    /// Comma-separated update-fraction values
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.6])]
    qs: Vec<f64>,

    /// Cutoff threshold applied at every grid point
    #[arg(long, default_value_t = 0.1)]
    cutoff: f64,

    /// Stop once some numChange value has repeated this many times
    #[arg(long = "stop-freq", default_value_t = 5)]
    stop_freq: u32,

    /// Iteration cap per grid point
    #[arg(long = "max-iters", default_value_t = 1000)]
    max_iters: u32,

    /// Document format
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,

    /// Write the document here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Edge-list files to time
    #[arg(required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,

    #[command(flatten)]
    params: ParamArgs,

    /// Timed repetitions per input
    #[arg(long, default_value_t = 3)]
    reps: u32,

    /// Document format
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,

    /// Write the document here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct StabilityArgs {
    /// Edge-list file: one "u v" pair per line, `#` starts a comment
    input: PathBuf,

    /// Algorithm to measure
    #[arg(long, value_enum, default_value_t = Algorithm::Lpa)]
    algorithm: Algorithm,

    /// Comma-separated seeds, at least two (lpa only)
    #[arg(long, value_delimiter = ',', default_values_t = 0u64..10)]
    seeds: Vec<u64>,

    #[command(flatten)]
    params: ParamArgs,

    /// Document format
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,

    /// Write the document here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    if let Err(err) = configure_threads() {
        eprintln!("labelrank: {err}");
        return ExitCode::from(match err {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
        });
    }
    let result = match cli.command {
        Command::Detect(args) => cmd_detect(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Stability(args) => cmd_stability(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("labelrank: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(message)) => {
            eprintln!("labelrank: {message}");
            ExitCode::from(2)
        }
    }
}

/// Applies `LABELRANK_THREADS` to the global worker pool. Unset, empty,
/// or `0` keeps automatic sizing.
fn configure_threads() -> Result<(), CliError> {
    let raw = match env::var("LABELRANK_THREADS") {
        Ok(raw) => raw,
        Err(env::VarError::NotPresent) => return Ok(()),
        Err(env::VarError::NotUnicode(_)) => {
            return Err(CliError::Usage(
                "LABELRANK_THREADS is not valid unicode".into(),
            ))
        }
    };
    if raw.trim().is_empty() {
        return Ok(());
    }
    let threads: usize = raw.trim().parse().map_err(|_| {
        CliError::Usage(format!(
            "invalid LABELRANK_THREADS value {raw:?}: expected a non-negative integer"
        ))
    })?;
    if threads == 0 {
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(internal)
}

/// Opens and parses an edge list. I/O failures are runtime errors;
/// malformed content is a usage error.
fn load_graph(path: &Path) -> Result<Graph, CliError> {
    let file = File::open(path)
        .map_err(|err| CliError::Runtime(format!("cannot open {}: {err}", path.display())))?;
    Graph::load_edge_list(BufReader::new(file), &LoadOptions::default()).map_err(|err| match err {
        GraphError::Io(inner) => {
            CliError::Runtime(format!("while reading {}: {inner}", path.display()))
        }
        other => CliError::Usage(format!("{}: {other}", path.display())),
    })
}

/// Reads a two-column "node community" file (same comment rules as edge
/// lists) into a partition aligned with `g`'s node order. Every node of
/// the graph must be assigned; names the file mentions but the graph
/// lacks are ignored.
fn load_truth(path: &Path, g: &Graph) -> Result<Partition, CliError> {
    let file = File::open(path)
        .map_err(|err| CliError::Runtime(format!("cannot open {}: {err}", path.display())))?;
    let mut by_name: HashMap<String, String> = HashMap::new();
    for (index, line) in BufReader::new(file).lines().enumerate() {
        let line = line
            .map_err(|err| CliError::Runtime(format!("while reading {}: {err}", path.display())))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (Some(node), Some(community), None) = (tokens.next(), tokens.next(), tokens.next())
        else {
            return Err(CliError::Usage(format!(
                "{}:{}: expected two columns (node, community)",
                path.display(),
                index + 1
            )));
        };
        if by_name
            .insert(node.to_string(), community.to_string())
            .is_some()
        {
            return Err(CliError::Usage(format!(
                "{}:{}: node {node:?} is assigned twice",
                path.display(),
                index + 1
            )));
        }
    }
    let mut community_ids: HashMap<&str, u32> = HashMap::new();
    let mut assignment = Vec::with_capacity(g.node_count());
    for i in 0..g.node_count() as u32 {
        let name = g.node_name(i);
        let Some(community) = by_name.get(name.as_ref()) else {
            return Err(CliError::Usage(format!(
                "{}: no community for node {}",
                path.display(),
                name
            )));
        };
        let next = community_ids.len() as u32;
        assignment.push(*community_ids.entry(community).or_insert(next));
    }
    Ok(Partition::from_assignment(&assignment))
}

/// Writes a finished document to the chosen sink.
fn emit(document: &str, output: Option<&Path>) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, document)
            .map_err(|err| CliError::Runtime(format!("cannot write {}: {err}", path.display()))),
        None => io::stdout()
            .write_all(document.as_bytes())
            .map_err(|err| CliError::Runtime(format!("cannot write to stdout: {err}"))),
    }
}

fn fixed6(value: f64) -> String {
    format!("{value:.6}")
}

/// What `detect` reports regardless of algorithm.
struct DetectOutcome {
    partition: Partition,
    iterations: u32,
    converged: bool,
    trace: Vec<TraceRow>,
    q: Option<f64>,
    agreement: Option<PartitionComparison>,
}

fn cmd_detect(args: DetectArgs) -> Result<(), CliError> {
    if args.trace && args.algorithm == Algorithm::Lpa {
        return Err(CliError::Usage(
            "--trace is only available with --algorithm labelrank".into(),
        ));
    }
    let graph = load_graph(&args.input)?;
    let truth = match &args.truth {
        Some(path) => Some(load_truth(path, &graph)?),
        None => None,
    };
    let started = Instant::now();
    let (partition, iterations, converged, trace) = match args.algorithm {
        Algorithm::Labelrank => {
            let params = args.params.to_params()?;
            let result = run_labelrank(&graph, &params, args.trace)
                .map_err(|err| CliError::Usage(err.to_string()))?;
            (
                result.partition,
                result.iterations,
                result.converged,
                result.trace,
            )
        }
        Algorithm::Lpa => {
            let result = lpa::run_lpa(&graph, args.seed, args.params.lpa_max_iterations());
            (result.partition, result.iterations, result.converged, Vec::new())
        }
    };
    let elapsed = started.elapsed();
    let q = (graph.edge_count() > 0)
        .then(|| metrics::modularity(&graph, &partition))
        .transpose()
        .map_err(internal)?;
    let agreement = truth
        .as_ref()
        .map(|t| metrics::compare_partitions(&partition, t))
        .transpose()
        .map_err(internal)?;
    let outcome = DetectOutcome {
        partition,
        iterations,
        converged,
        trace,
        q,
        agreement,
    };
    let document = match args.format {
        Format::Tsv => detect_tsv(&args, &graph, &outcome),
        Format::Json => detect_json(&args, &graph, &outcome),
    };
    emit(&document, args.output.as_deref())?;
    eprintln!("labelrank detect: {:.3} s", elapsed.as_secs_f64());
    Ok(())
}

fn detect_tsv(args: &DetectArgs, graph: &Graph, outcome: &DetectOutcome) -> String {
    let mut doc = String::new();
    let _ = writeln!(
        doc,
        "# detect\talgorithm={}\tinput={}",
        args.algorithm,
        args.input.display()
    );
    let mut summary = format!(
        "# n={}\tm={}\tcommunities={}",
        graph.node_count(),
        graph.edge_count(),
        outcome.partition.community_count()
    );
    if let Some(q) = outcome.q {
        let _ = write!(summary, "\tq={}", fixed6(q));
    }
    let _ = write!(
        summary,
        "\titerations={}\tconverged={}",
        outcome.iterations, outcome.converged
    );
    doc.push_str(&summary);
    doc.push('\n');
    if args.algorithm == Algorithm::Lpa {
        let _ = writeln!(doc, "# seed={}", args.seed);
    }
    if let Some(cmp) = &outcome.agreement {
        let _ = writeln!(
            doc,
            "# agreement={}\tidentical={}",
            fixed6(cmp.agreement),
            cmp.identical
        );
    }
    if !outcome.trace.is_empty() {
        let _ = writeln!(doc, "# trace\titeration\tnum_change\tavg_labels\tq");
        for row in &outcome.trace {
            let q = row.modularity.map_or_else(|| "-".to_string(), fixed6);
            let _ = writeln!(
                doc,
                "# trace\t{}\t{}\t{}\t{}",
                row.iteration,
                row.num_change,
                fixed6(row.average_labels),
                q
            );
        }
    }
    let _ = writeln!(doc, "node\tcommunity");
    for (i, &community) in outcome.partition.assignment().iter().enumerate() {
        let _ = writeln!(
            doc,
            "{}\t{}",
            graph.node_name(i as u32),
            graph.node_name(community)
        );
    }
    doc
}

#[derive(Serialize)]
struct DetectSummary<'a> {
    command: &'a str,
    algorithm: &'a str,
    input: String,
    n: usize,
    m: usize,
    communities: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    iterations: u32,
    converged: bool,
}

#[derive(Serialize)]
struct TraceJson {
    iteration: u32,
    num_change: usize,
    avg_labels: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
}

#[derive(Serialize)]
struct AgreementJson {
    identical: bool,
    agreement: f64,
}

#[derive(Serialize)]
struct DetectJson<'a> {
    summary: DetectSummary<'a>,
    assignment: Vec<(String, String)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<TraceJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    agreement: Option<AgreementJson>,
}

fn detect_json(args: &DetectArgs, graph: &Graph, outcome: &DetectOutcome) -> String {
    let document = DetectJson {
        summary: DetectSummary {
            command: "detect",
            algorithm: args.algorithm.as_str(),
            input: args.input.display().to_string(),
            n: graph.node_count(),
            m: graph.edge_count(),
            communities: outcome.partition.community_count(),
            seed: (args.algorithm == Algorithm::Lpa).then_some(args.seed),
            q: outcome.q,
            iterations: outcome.iterations,
            converged: outcome.converged,
        },
        assignment: assignment_pairs(graph, &outcome.partition),
        trace: (!outcome.trace.is_empty()).then(|| {
            outcome
                .trace
                .iter()
                .map(|row| TraceJson {
                    iteration: row.iteration,
                    num_change: row.num_change,
                    avg_labels: row.average_labels,
                    q: row.modularity,
                })
                .collect()
        }),
        agreement: outcome.agreement.map(|cmp| AgreementJson {
            identical: cmp.identical,
            agreement: cmp.agreement,
        }),
    };
    to_pretty(&document)
}

/// Rows of (node name, community name); a community is named after its
/// canonical member.
fn assignment_pairs(graph: &Graph, partition: &Partition) -> Vec<(String, String)> {
    partition
        .assignment()
        .iter()
        .enumerate()
        .map(|(i, &community)| {
            (
                graph.node_name(i as u32).into_owned(),
                graph.node_name(community).into_owned(),
            )
        })
        .collect()
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut text =
        serde_json::to_string_pretty(value).expect("document serialization cannot fail");
    text.push('\n');
    text
}

#[derive(Clone, Serialize)]
struct SweepRow {
    inflation: f64,
    q: f64,
    modularity: f64,
    communities: usize,
    iterations: u32,
    converged: bool,
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let graph = load_graph(&args.input)?;
    let mut grid = Vec::new();
    for &inflation in &args.inflations {
        for &q in &args.qs {
            let params = Params {
                inflation,
                cutoff: args.cutoff,
                update_fraction: q,
                stop_frequency: args.stop_freq,
                max_iterations: args.max_iters,
                ..Params::default()
            };
            params
                .validate()
                .map_err(|err| CliError::Usage(err.to_string()))?;
            grid.push(params);
        }
    }
    if grid.is_empty() {
        return Err(CliError::Usage("the sweep grid is empty".into()));
    }
    let started = Instant::now();
    // Grid points run concurrently; each run is deterministic on its own,
    // and rows are collected back in grid order.
    let rows = grid
        .par_iter()
        .map(|params| {
            let result = run_labelrank(&graph, params, false)
                .map_err(|err| CliError::Usage(err.to_string()))?;
            let modularity =
                metrics::modularity(&graph, &result.partition).map_err(internal)?;
            Ok(SweepRow {
                inflation: params.inflation,
                q: params.update_fraction,
                modularity,
                communities: result.partition.community_count(),
                iterations: result.iterations,
                converged: result.converged,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let elapsed = started.elapsed();
    let mut best = 0;
    for (index, row) in rows.iter().enumerate() {
        if row.modularity > rows[best].modularity {
            best = index;
        }
    }
    let document = match args.format {
        Format::Tsv => sweep_tsv(&args, &graph, &rows, best),
        Format::Json => sweep_json(&args, &graph, &rows, best),
    };
    emit(&document, args.output.as_deref())?;
    eprintln!("labelrank sweep: {:.3} s", elapsed.as_secs_f64());
    Ok(())
}

fn sweep_tsv(args: &SweepArgs, graph: &Graph, rows: &[SweepRow], best: usize) -> String {
    let mut doc = String::new();
    let _ = writeln!(
        doc,
        "# sweep\talgorithm=labelrank\tinput={}",
        args.input.display()
    );
    let _ = writeln!(
        doc,
        "# n={}\tm={}\tcutoff={}\tstop_freq={}\tmax_iters={}",
        graph.node_count(),
        graph.edge_count(),
        args.cutoff,
        args.stop_freq,
        args.max_iters
    );
    let _ = writeln!(doc, "inflation\tq\tmodularity\tcommunities\titerations\tconverged");
    for row in rows {
        let _ = writeln!(
            doc,
            "{}\t{}\t{}\t{}\t{}\t{}",
            row.inflation,
            row.q,
            fixed6(row.modularity),
            row.communities,
            row.iterations,
            row.converged
        );
    }
    let row = &rows[best];
    let _ = writeln!(
        doc,
        "# best\tinflation={}\tq={}\tmodularity={}\tcommunities={}\titerations={}",
        row.inflation,
        row.q,
        fixed6(row.modularity),
        row.communities,
        row.iterations
    );
    doc
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    command: &'a str,
    algorithm: &'a str,
    input: String,
    n: usize,
    m: usize,
    cutoff: f64,
    stop_freq: u32,
    max_iters: u32,
    inflations: &'a [f64],
    qs: &'a [f64],
}

#[derive(Serialize)]
struct SweepJson<'a> {
    summary: SweepSummary<'a>,
    rows: &'a [SweepRow],
    best: &'a SweepRow,
}

fn sweep_json(args: &SweepArgs, graph: &Graph, rows: &[SweepRow], best: usize) -> String {
    let document = SweepJson {
        summary: SweepSummary {
            command: "sweep",
            algorithm: "labelrank",
            input: args.input.display().to_string(),
            n: graph.node_count(),
            m: graph.edge_count(),
            cutoff: args.cutoff,
            stop_freq: args.stop_freq,
            max_iters: args.max_iters,
            inflations: &args.inflations,
            qs: &args.qs,
        },
        rows,
        best: &rows[best],
    };
    to_pretty(&document)
}

#[derive(Serialize)]
struct BenchRow {
    input: String,
    n: usize,
    m: usize,
    mean_seconds: f64,
    iterations: u32,
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    if args.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let params = args.params.to_params()?;
    let started = Instant::now();
    let mut rows = Vec::new();
    let mut skipped = 0usize;
    // Runs are sequential on purpose: concurrent timing runs would
    // contend for the worker pool and contaminate each other's numbers.
    for input in &args.inputs {
        let graph = match load_graph(input) {
            Ok(graph) => graph,
            Err(err) => {
                eprintln!("labelrank bench: skipping {}: {err}", input.display());
                skipped += 1;
                continue;
            }
        };
        let mut total = 0.0;
        let mut iterations = 0;
        for _ in 0..args.reps {
            let run_started = Instant::now();
            let result = run_labelrank(&graph, &params, false)
                .map_err(|err| CliError::Usage(err.to_string()))?;
            total += run_started.elapsed().as_secs_f64();
            iterations = result.iterations;
        }
        rows.push(BenchRow {
            input: input.display().to_string(),
            n: graph.node_count(),
            m: graph.edge_count(),
            mean_seconds: total / f64::from(args.reps),
            iterations,
        });
    }
    if rows.is_empty() {
        return Err(CliError::Runtime("all bench inputs failed to load".into()));
    }
    let fit = (rows.len() >= 2).then(|| {
        let points: Vec<(f64, f64)> = rows
            .iter()
            .map(|row| (row.m as f64, row.mean_seconds))
            .collect();
        linear_fit(&points)
    });
    let document = match args.format {
        Format::Tsv => bench_tsv(&args, &rows, fit, skipped),
        Format::Json => bench_json(&args, &rows, fit, skipped),
    };
    emit(&document, args.output.as_deref())?;
    eprintln!("labelrank bench: {:.3} s", started.elapsed().as_secs_f64());
    Ok(())
}

/// Least-squares line through `(x, y)` points, as (slope, intercept).
/// Falls back to a flat line at the mean when all abscissae coincide.
fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return (0.0, sy / n);
    }
    let slope = (n * sxy - sx * sy) / denom;
    ((slope), (sy - slope * sx) / n)
}

fn bench_tsv(args: &BenchArgs, rows: &[BenchRow], fit: Option<(f64, f64)>, skipped: usize) -> String {
    let mut doc = String::new();
    let params = &args.params;
    let _ = writeln!(
        doc,
        "# bench\treps={}\tinflation={}\tcutoff={}\tq={}\tstop_freq={}\tmax_iters={}",
        args.reps,
        params.inflation,
        params.cutoff,
        params.q,
        params.stop_freq,
        params.max_iters.unwrap_or(1000)
    );
    if skipped > 0 {
        let _ = writeln!(doc, "# skipped={skipped}");
    }
    let _ = writeln!(doc, "input\tn\tm\tmean_seconds\titerations");
    for row in rows {
        let _ = writeln!(
            doc,
            "{}\t{}\t{}\t{}\t{}",
            row.input,
            row.n,
            row.m,
            fixed6(row.mean_seconds),
            row.iterations
        );
    }
    if let Some((slope, intercept)) = fit {
        let _ = writeln!(doc, "# fit\tseconds_per_edge={slope:e}\tintercept={intercept:e}");
    }
    doc
}

#[derive(Serialize)]
struct BenchSummary<'a> {
    command: &'a str,
    reps: u32,
    inflation: f64,
    cutoff: f64,
    q: f64,
    stop_freq: u32,
    max_iters: u32,
    skipped: usize,
}

#[derive(Serialize)]
struct FitJson {
    seconds_per_edge: f64,
    intercept: f64,
}

#[derive(Serialize)]
struct BenchJson<'a> {
    summary: BenchSummary<'a>,
    rows: &'a [BenchRow],
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<FitJson>,
}

fn bench_json(args: &BenchArgs, rows: &[BenchRow], fit: Option<(f64, f64)>, skipped: usize) -> String {
    let params = &args.params;
    let document = BenchJson {
        summary: BenchSummary {
            command: "bench",
            reps: args.reps,
            inflation: params.inflation,
            cutoff: params.cutoff,
            q: params.q,
            stop_freq: params.stop_freq,
            max_iters: params.max_iters.unwrap_or(1000),
            skipped,
        },
        rows,
        fit: fit.map(|(slope, intercept)| FitJson {
            seconds_per_edge: slope,
            intercept,
        }),
    };
    to_pretty(&document)
}

fn cmd_stability(args: StabilityArgs) -> Result<(), CliError> {
    let graph = load_graph(&args.input)?;
    let started = Instant::now();
    let document = match args.algorithm {
        Algorithm::Lpa => {
            let report =
                lpa::lpa_stability_report(&graph, &args.seeds, args.params.lpa_max_iterations())
                    .map_err(|err| CliError::Usage(err.to_string()))?;
            match args.format {
                Format::Tsv => stability_lpa_tsv(&args, &graph, &report),
                Format::Json => stability_lpa_json(&args, &graph, &report),
            }
        }
        Algorithm::Labelrank => {
            let params = args.params.to_params()?;
            let first = run_labelrank(&graph, &params, false)
                .map_err(|err| CliError::Usage(err.to_string()))?;
            let second = run_labelrank(&graph, &params, false)
                .map_err(|err| CliError::Usage(err.to_string()))?;
            if first.partition.assignment() != second.partition.assignment() {
                return Err(CliError::Runtime(
                    "labelrank produced two different partitions for the same input".into(),
                ));
            }
            let q = metrics::modularity(&graph, &first.partition).map_err(internal)?;
            match args.format {
                Format::Tsv => stability_labelrank_tsv(&args, &graph, &first, q),
                Format::Json => stability_labelrank_json(&args, &graph, &first, q),
            }
        }
    };
    let elapsed = started.elapsed();
    emit(&document, args.output.as_deref())?;
    eprintln!("labelrank stability: {:.3} s", elapsed.as_secs_f64());
    Ok(())
}

fn stability_lpa_tsv(args: &StabilityArgs, graph: &Graph, report: &lpa::StabilityReport) -> String {
    let mut doc = String::new();
    let _ = writeln!(
        doc,
        "# stability\talgorithm=lpa\tinput={}\tmax_iters={}",
        args.input.display(),
        args.params.lpa_max_iterations()
    );
    let seeds = args
        .seeds
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(",");
    let _ = writeln!(
        doc,
        "# n={}\tm={}\tseeds={}",
        graph.node_count(),
        graph.edge_count(),
        seeds
    );
    let _ = writeln!(doc, "seed\tcommunities\tmodularity\titerations\tconverged");
    for run in &report.runs {
        let _ = writeln!(
            doc,
            "{}\t{}\t{}\t{}\t{}",
            run.seed,
            run.communities,
            fixed6(run.modularity),
            run.iterations,
            run.converged
        );
    }
    let _ = writeln!(
        doc,
        "# distinct_partitions={}\tq_min={}\tq_max={}\tq_mean={}\tbest_seed={}",
        report.distinct_partitions,
        fixed6(report.min_q),
        fixed6(report.max_q),
        fixed6(report.mean_q),
        report.best_seed
    );
    doc
}

#[derive(Serialize)]
struct SeedRunJson {
    seed: u64,
    communities: usize,
    modularity: f64,
    iterations: u32,
    converged: bool,
}

#[derive(Serialize)]
struct LpaStabilitySummary<'a> {
    command: &'a str,
    algorithm: &'a str,
    input: String,
    n: usize,
    m: usize,
    max_iters: u32,
    seeds: &'a [u64],
    distinct_partitions: usize,
    q_min: f64,
    q_max: f64,
    q_mean: f64,
    best_seed: u64,
}

#[derive(Serialize)]
struct LpaStabilityJson<'a> {
    summary: LpaStabilitySummary<'a>,
    runs: Vec<SeedRunJson>,
}

fn stability_lpa_json(args: &StabilityArgs, graph: &Graph, report: &lpa::StabilityReport) -> String {
    let document = LpaStabilityJson {
        summary: LpaStabilitySummary {
            command: "stability",
            algorithm: "lpa",
            input: args.input.display().to_string(),
            n: graph.node_count(),
            m: graph.edge_count(),
            max_iters: args.params.lpa_max_iterations(),
            seeds: &args.seeds,
            distinct_partitions: report.distinct_partitions,
            q_min: report.min_q,
            q_max: report.max_q,
            q_mean: report.mean_q,
            best_seed: report.best_seed,
        },
        runs: report
            .runs
            .iter()
            .map(|run| SeedRunJson {
                seed: run.seed,
                communities: run.communities,
                modularity: run.modularity,
                iterations: run.iterations,
                converged: run.converged,
            })
            .collect(),
    };
    to_pretty(&document)
}

fn stability_labelrank_tsv(
    args: &StabilityArgs,
    graph: &Graph,
    result: &LabelRankResult,
    q: f64,
) -> String {
    let mut doc = String::new();
    let _ = writeln!(
        doc,
        "# stability\talgorithm=labelrank\tinput={}",
        args.input.display()
    );
    let _ = writeln!(doc, "# n={}\tm={}", graph.node_count(), graph.edge_count());
    let _ = writeln!(
        doc,
        "runs\tdistinct_partitions\tcommunities\tmodularity\titerations\tconverged"
    );
    let _ = writeln!(
        doc,
        "2\t1\t{}\t{}\t{}\t{}",
        result.partition.community_count(),
        fixed6(q),
        result.iterations,
        result.converged
    );
    doc
}

#[derive(Serialize)]
struct LabelrankStabilitySummary<'a> {
    command: &'a str,
    algorithm: &'a str,
    input: String,
    n: usize,
    m: usize,
    runs: u32,
    distinct_partitions: usize,
    communities: usize,
    q: f64,
    iterations: u32,
    converged: bool,
}

#[derive(Serialize)]
struct LabelrankStabilityJson<'a> {
    summary: LabelrankStabilitySummary<'a>,
}

fn stability_labelrank_json(
    args: &StabilityArgs,
    graph: &Graph,
    result: &LabelRankResult,
    q: f64,
) -> String {
    let document = LabelrankStabilityJson {
        summary: LabelrankStabilitySummary {
            command: "stability",
            algorithm: "labelrank",
            input: args.input.display().to_string(),
            n: graph.node_count(),
            m: graph.edge_count(),
            runs: 2,
            distinct_partitions: 1,
            communities: result.partition.community_count(),
            q,
            iterations: result.iterations,
            converged: result.converged,
        },
    };
    to_pretty(&document)
}
