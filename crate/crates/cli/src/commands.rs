//! Command implementations. Each returns a [`CommandOutput`]; writing files
//! and choosing the exit code is left to [`crate::run`].

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use polopt::dynamics::{self, center, disagreement};
use polopt::generators::{self, Seed};
use polopt::sparsify::{rescale_trace, sparsify};
use polopt::topology::{self, nonconvexity_witness};
use polopt::{
    intervention, EquilibriumReport, EquilibriumSolver, OpinionVector, OptimizerConfig, SparsifyConfig,
    TopologyProblem, WeightedGraph,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::io::{self, IngestedGraph, LabelMap};
use crate::report::RunReport;
use crate::CliError;

/// Tolerance for the worked three-node examples.
const EXAMPLE_TOL: f64 = 1e-3;
/// Tolerance for identity checks on random instances.
const IDENTITY_TOL: f64 = 1e-8;
/// Margin by which the witness eigenvalue must be negative.
const WITNESS_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct Artifact {
    pub path: PathBuf,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub report: RunReport,
    /// Files always written (explicit output paths).
    pub files: Vec<Artifact>,
    /// Tables written only when a CSV directory is given; paths are relative.
    pub tables: Vec<Artifact>,
    pub converged: bool,
    pub failed_checks: Vec<String>,
    /// Human-readable lines for stderr.
    pub messages: Vec<String>,
}

impl CommandOutput {
    fn new(report: RunReport) -> Self {
        Self { report, files: vec![], tables: vec![], converged: true, failed_checks: vec![], messages: vec![] }
    }

    fn table(mut self, name: &str, contents: String) -> Self {
        self.tables.push(Artifact { path: PathBuf::from(name), contents });
        self
    }
}

#[derive(Args, Debug, Clone, Default, Serialize)]
pub struct OutputOpts {
    /// JSON report path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for per-node / per-edge CSV tables.
    #[arg(long)]
    pub csv_dir: Option<PathBuf>,
    /// Exit with status 2 when an optimizer does not converge.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Args, Debug, Clone, Default, Serialize)]
pub struct SolverOpts {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Relative objective-decrease tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

impl SolverOpts {
    pub fn config(&self) -> Result<OptimizerConfig, CliError> {
        let mut config = OptimizerConfig { seed: self.seed, ..OptimizerConfig::default() };
        if let Some(k) = self.max_iters {
            config.max_iters = k;
        }
        if let Some(t) = self.tol {
            config.rel_tol = t;
        }
        config.validate().map_err(CliError::context("solver options"))?;
        Ok(config)
    }
}

#[derive(Args, Debug, Clone, Default, Serialize)]
pub struct SampleOpts {
    /// Spectral accuracy; draws q = ceil(4 n ln n / epsilon^2) samples.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Explicit number of samples.
    #[arg(long, conflicts_with = "epsilon")]
    pub samples: Option<usize>,
}

impl SampleOpts {
    pub fn config(&self, seed: u64) -> Option<SparsifyConfig> {
        match (self.epsilon, self.samples) {
            (Some(e), _) => Some(SparsifyConfig::epsilon(e, seed)),
            (None, Some(q)) => Some(SparsifyConfig::samples(q, seed)),
            (None, None) => None,
        }
    }
}

fn load_graph(path: &Path) -> Result<IngestedGraph, CliError> {
    io::ingest_graph(path).map_err(|e| CliError::Input(format!("graph {}: {e}", path.display())))
}

fn load_opinions(path: &Path, labels: &LabelMap) -> Result<OpinionVector, CliError> {
    io::ingest_opinions(path, labels).map_err(|e| CliError::Input(format!("opinions {}: {e}", path.display())))
}

fn echo<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("argument structs serialize")
}

fn ingestion_summary(g: &IngestedGraph) -> Value {
    json!({
        "nodes": g.graph.node_count(),
        "edges": g.graph.edge_count(),
        "total_weight": g.graph.total_weight(),
        "self_loops_dropped": g.self_loops_dropped,
        "duplicates_merged": g.duplicates_merged,
    })
}

fn equilibrium_summary(r: &EquilibriumReport) -> Value {
    json!({ "polarization": r.polarization, "disagreement": r.disagreement, "index": r.index })
}

fn node_table(labels: &LabelMap, s: &OpinionVector, r: &EquilibriumReport) -> String {
    io::csv(
        &["node", "s", "z_star", "z_bar"],
        (0..s.len()).map(|i| {
            vec![labels.label(i).to_string(), io::num(s.as_slice()[i]), io::num(r.z_star[i]), io::num(r.z_bar[i])]
        }),
    )
}

fn edge_table(labels: &LabelMap, g: &WeightedGraph) -> String {
    io::csv(
        &["u", "v", "w"],
        g.edges().iter().map(|e| vec![labels.label(e.u).to_string(), labels.label(e.v).to_string(), io::num(e.w)]),
    )
}

// ---------------------------------------------------------------- index

#[derive(Args, Debug, Clone, Serialize)]
pub struct IndexArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub opinions: PathBuf,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputOpts,
}

pub fn cmd_index(args: &IndexArgs) -> Result<CommandOutput, CliError> {
    let g = load_graph(&args.graph)?;
    let s = load_opinions(&args.opinions, &g.labels)?;
    let r = dynamics::index(&g.graph, &s).map_err(CliError::context("index"))?;
    let stress = dynamics::node_stress(&g.graph, &s, &r.z_star).map_err(CliError::context("index"))?;
    let outputs = json!({
        "graph": ingestion_summary(&g),
        "connected": g.graph.is_connected(),
        "equilibrium": equilibrium_summary(&r),
        "mean_opinion": polopt::linalg::mean(s.as_slice()),
    });
    let table = io::csv(
        &["node", "s", "z_star", "z_bar", "stress"],
        (0..s.len()).map(|i| {
            vec![
                g.labels.label(i).to_string(),
                io::num(s.as_slice()[i]),
                io::num(r.z_star[i]),
                io::num(r.z_bar[i]),
                io::num(stress[i]),
            ]
        }),
    );
    Ok(CommandOutput::new(RunReport::new("index", echo(args), outputs, 0)).table("nodes.csv", table))
}

// ---------------------------------------------------- optimize-topology

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    /// Erdős–Rényi G(n, p) with unit weights.
    Er,
    /// Norros–Reittu with power-law capacities.
    Nr,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TopologyArgs {
    /// Reference graph; requires --opinions.
    #[arg(long, requires = "opinions", conflicts_with = "nodes")]
    pub graph: Option<PathBuf>,
    #[arg(long, requires = "graph")]
    pub opinions: Option<PathBuf>,
    /// Generate a synthetic instance on this many nodes instead.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Power-law slope of synthetic opinions.
    #[arg(long, default_value_t = 2.0)]
    pub opinion_slope: f64,
    /// Synthetic reference graph model.
    #[arg(long, value_enum, default_value_t = Reference::Er)]
    pub reference: Reference,
    /// Edge probability of the Erdős–Rényi reference.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Capacity slope of the Norros–Reittu reference.
    #[arg(long, default_value_t = 2.0)]
    pub graph_slope: f64,
    /// Total edge weight (default: that of the reference graph).
    #[arg(long)]
    pub total_weight: Option<f64>,
    /// Optimal graph export path.
    #[arg(long)]
    pub graph_out: Option<PathBuf>,
    #[command(flatten)]
    pub sample: SampleOpts,
    #[command(flatten)]
    pub solver: SolverOpts,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputOpts,
}

/// A graph, its labels and opinions; the synthetic variant mirrors
/// `generate` with the same seed.
pub struct Instance {
    pub graph: WeightedGraph,
    pub labels: LabelMap,
    pub opinions: OpinionVector,
    pub ingestion: Option<Value>,
}

pub fn synthetic_instance(
    n: usize,
    opinion_slope: f64,
    reference: Reference,
    p: f64,
    graph_slope: f64,
    seed: u64,
) -> Result<Instance, CliError> {
    let ctx = CliError::context("generate");
    let opinions = generators::power_law_sample(n, opinion_slope, Seed(seed)).map_err(&ctx)?;
    let graph_seed = Seed(seed.wrapping_add(1));
    let graph = match reference {
        Reference::Er => generators::erdos_renyi(n, p, graph_seed),
        Reference::Nr => generators::norros_reittu(n, graph_slope, graph_seed),
    }
    .map_err(&ctx)?;
    Ok(Instance { graph, labels: LabelMap::numeric(n), opinions, ingestion: None })
}

impl TopologyArgs {
    fn instance(&self) -> Result<Instance, CliError> {
        match (&self.graph, &self.opinions, self.nodes) {
            (Some(gp), Some(op), _) => {
                let g = load_graph(gp)?;
                let opinions = load_opinions(op, &g.labels)?;
                Ok(Instance { ingestion: Some(ingestion_summary(&g)), graph: g.graph, labels: g.labels, opinions })
            }
            (None, None, Some(n)) => {
                synthetic_instance(n, self.opinion_slope, self.reference, self.p, self.graph_slope, self.solver.seed)
            }
            _ => Err(CliError::Input("give --graph and --opinions, or --nodes for a synthetic instance".into())),
        }
    }
}

pub fn cmd_optimize_topology(args: &TopologyArgs) -> Result<CommandOutput, CliError> {
    let config = args.solver.config()?;
    let inst = args.instance()?;
    let ctx = CliError::context("optimize-topology");
    let total = match args.total_weight {
        Some(t) => t,
        None if inst.graph.total_weight() > 0.0 => inst.graph.total_weight(),
        None => return Err(CliError::Input("reference graph has no edges; pass --total-weight".into())),
    };
    let original = dynamics::index(&inst.graph, &inst.opinions).map_err(&ctx)?;
    let problem = TopologyProblem::new(inst.opinions.clone(), total).map_err(&ctx)?;
    let sol = topology::solve(&problem, &config, None).map_err(&ctx)?;
    let opt_graph = sol.graph();
    let optimal = dynamics::index(&opt_graph, &inst.opinions).map_err(&ctx)?;
    let kkt = sol.kkt();

    let mut rows = vec![
        json!({ "row": "original", "index": original.index, "edges": inst.graph.edge_count(),
                "total_weight": inst.graph.total_weight() }),
        json!({ "row": "optimal", "index": optimal.index, "edges": opt_graph.edge_count(),
                "total_weight": opt_graph.total_weight() }),
    ];
    let mut out_tables = vec![("optimal_edges.csv", edge_table(&inst.labels, &opt_graph))];
    let mut sparsified = Value::Null;
    if let Some(cfg) = args.sample.config(args.solver.seed) {
        let sp = sparsify(&opt_graph, &cfg).map_err(CliError::context("sparsify"))?;
        let rescaled = rescale_trace(&sp.graph, total).map_err(CliError::context("sparsify"))?;
        let r = dynamics::index(&rescaled, &inst.opinions).map_err(&ctx)?;
        rows.push(json!({ "row": "sparsified", "index": r.index, "edges": rescaled.edge_count(),
                          "total_weight": rescaled.total_weight() }));
        sparsified = json!({
            "samples": sp.samples,
            "connected": sp.connected,
            "relative_loss": (r.index - optimal.index) / optimal.index,
            "edge_reduction": opt_graph.edge_count() as f64 / rescaled.edge_count().max(1) as f64,
        });
        out_tables.push(("sparsified_edges.csv", edge_table(&inst.labels, &rescaled)));
    }
    let reduction = if optimal.index > 0.0 { Value::from(original.index / optimal.index) } else { Value::Null };
    let outputs = json!({
        "nodes": inst.graph.node_count(),
        "input": inst.ingestion,
        "total_weight": total,
        "rows": rows,
        "index_reduction": reduction,
        "optimal": {
            "objective": sol.objective,
            "equilibrium": equilibrium_summary(&optimal),
            "iterations": sol.iterations,
            "converged": sol.converged,
            "connected": sol.connected,
            "kkt": {
                "scale": kkt.scale,
                "support_spread": kkt.support_spread,
                "off_support_violation": kkt.off_support_violation,
                "support_size": kkt.support_size,
            },
        },
        "sparsified": sparsified,
    });
    let mut out = CommandOutput::new(RunReport::new("optimize-topology", echo(args), outputs, args.solver.seed))
        .table("nodes.csv", node_table(&inst.labels, &inst.opinions, &optimal));
    for (name, t) in out_tables {
        out = out.table(name, t);
    }
    if let Some(path) = &args.graph_out {
        out.files.push(Artifact { path: path.clone(), contents: io::format_graph(&opt_graph, &inst.labels) });
    }
    out.converged = sol.converged;
    Ok(out)
}

// -------------------------------------------------------------- sparsify

#[derive(Args, Debug, Clone, Serialize)]
pub struct SparsifyArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Optional opinions; reports the index before and after.
    #[arg(long)]
    pub opinions: Option<PathBuf>,
    /// Rescale the sparsifier to this total weight (default: the input's).
    #[arg(long)]
    pub total_weight: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sparsified graph export path.
    #[arg(long)]
    pub graph_out: Option<PathBuf>,
    #[command(flatten)]
    pub sample: SampleOpts,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputOpts,
}

pub fn cmd_sparsify(args: &SparsifyArgs) -> Result<CommandOutput, CliError> {
    let cfg = args.sample.config(args.seed).ok_or_else(|| CliError::Input("give --epsilon or --samples".into()))?;
    let g = load_graph(&args.graph)?;
    let ctx = CliError::context("sparsify");
    let total = args.total_weight.unwrap_or(g.graph.total_weight());
    let sp = sparsify(&g.graph, &cfg).map_err(&ctx)?;
    let rescaled = rescale_trace(&sp.graph, total).map_err(&ctx)?;
    let mut index = Value::Null;
    if let Some(op) = &args.opinions {
        let s = load_opinions(op, &g.labels)?;
        let before = dynamics::index(&g.graph, &s).map_err(&ctx)?.index;
        let after = dynamics::index(&rescaled, &s).map_err(&ctx)?.index;
        index = json!({ "before": before, "after": after, "relative_change": (after - before) / before });
    }
    let outputs = json!({
        "input": ingestion_summary(&g),
        "samples": sp.samples,
        "edges_before": g.graph.edge_count(),
        "edges_after": rescaled.edge_count(),
        "total_weight": rescaled.total_weight(),
        "connected": sp.connected,
        "index": index,
    });
    let mut out = CommandOutput::new(RunReport::new("sparsify", echo(args), outputs, args.seed))
        .table("sparsified_edges.csv", edge_table(&g.labels, &rescaled));
    if let Some(path) = &args.graph_out {
        out.files.push(Artifact { path: path.clone(), contents: io::format_graph(&rescaled, &g.labels) });
    }
    Ok(out)
}

// ----------------------------------------------------- optimize-opinions

#[derive(Args, Debug, Clone, Serialize)]
pub struct OpinionArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub opinions: PathBuf,
    /// Budgets (comma-separated or repeated); each total decrease is at most alpha.
    #[arg(long, required = true, value_delimiter = ',', num_args = 1..)]
    pub alpha: Vec<f64>,
    #[command(flatten)]
    pub solver: SolverOpts,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputOpts,
}

pub fn cmd_optimize_opinions(args: &OpinionArgs) -> Result<CommandOutput, CliError> {
    let config = args.solver.config()?;
    if let Some(a) = args.alpha.iter().find(|a| a.is_nan() || **a < 0.0 || a.is_infinite()) {
        return Err(CliError::Input(format!("alpha must be a nonnegative number, got {a}")));
    }
    let mut alphas = args.alpha.clone();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    let g = load_graph(&args.graph)?;
    let s = load_opinions(&args.opinions, &g.labels)?;
    let ctx = CliError::context("optimize-opinions");
    let base = dynamics::index(&g.graph, &s).map_err(&ctx)?;
    let results = intervention::budget_sweep(&g.graph, &s, &alphas, &config).map_err(&ctx)?;
    let rows: Vec<Value> = results
        .iter()
        .map(|r| {
            json!({
                "alpha": r.alpha,
                "objective": r.objective,
                "equilibrium": equilibrium_summary(&r.report),
                "budget_used": r.budget_used,
                "relative_reduction": if base.index > 0.0 { Value::from(1.0 - r.objective / base.index) } else { Value::Null },
                "iterations": r.iterations,
                "converged": r.converged,
                "stationarity": r.stationarity,
            })
        })
        .collect();
    let outputs = json!({
        "input": ingestion_summary(&g),
        "baseline": equilibrium_summary(&base),
        "results": rows,
    });
    let mut header = vec!["node".to_string(), "s".to_string()];
    header.extend(alphas.iter().map(|a| format!("ds_alpha_{}", io::num(*a))));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let table = io::csv(
        &header_refs,
        (0..s.len()).map(|i| {
            let mut row = vec![g.labels.label(i).to_string(), io::num(s.as_slice()[i])];
            row.extend(results.iter().map(|r| io::num(r.ds[i])));
            row
        }),
    );
    let mut out = CommandOutput::new(RunReport::new("optimize-opinions", echo(args), outputs, args.solver.seed))
        .table("interventions.csv", table);
    out.converged = results.iter().all(|r| r.converged);
    Ok(out)
}

// -------------------------------------------------------------- generate

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpinionModel {
    Uniform,
    PowerLaw,
    /// Proportional to node degree.
    Degree,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GenerateArgs {
    #[arg(long, value_enum, default_value_t = Reference::Er)]
    pub model: Reference,
    #[arg(long)]
    pub nodes: usize,
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Capacity slope for the Norros–Reittu model.
    #[arg(long, default_value_t = 2.0)]
    pub slope: f64,
    #[arg(long, value_enum, default_value_t = OpinionModel::PowerLaw)]
    pub opinion_model: OpinionModel,
    #[arg(long, default_value_t = 2.0)]
    pub opinion_slope: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub graph_out: PathBuf,
    #[arg(long)]
    pub opinions_out: PathBuf,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputOpts,
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<CommandOutput, CliError> {
    let ctx = CliError::context("generate");
    let n = args.nodes;
    let graph_seed = Seed(args.seed.wrapping_add(1));
    let graph = match args.model {
        Reference::Er => generators::erdos_renyi(n, args.p, graph_seed),
        Reference::Nr => generators::norros_reittu(n, args.slope, graph_seed),
    }
    .map_err(&ctx)?;
    let opinions = match args.opinion_model {
        OpinionModel::Uniform => generators::uniform_opinions(n, Seed(args.seed)),
        OpinionModel::PowerLaw => generators::power_law_sample(n, args.opinion_slope, Seed(args.seed)),
        OpinionModel::Degree => generators::degree_proportional_opinions(&graph),
    }
    .map_err(&ctx)?;
    let labels = LabelMap::numeric(n);
    let r = dynamics::index(&graph, &opinions).map_err(&ctx)?;
    let outputs = json!({
        "nodes": n,
        "edges": graph.edge_count(),
        "total_weight": graph.total_weight(),
        "connected": graph.is_connected(),
        "mean_opinion": polopt::linalg::mean(opinions.as_slice()),
        "equilibrium": equilibrium_summary(&r),
    });
    let mut out = CommandOutput::new(RunReport::new("generate", echo(args), outputs, args.seed));
    out.files.push(Artifact { path: args.graph_out.clone(), contents: io::format_graph(&graph, &labels) });
    out.files.push(Artifact { path: args.opinions_out.clone(), contents: io::format_opinions(&opinions, &labels) });
    Ok(out)
}

// ------------------------------------------------------------- reproduce

#[derive(Args, Debug, Clone, Serialize)]
pub struct ReproduceArgs {
    /// Seed of the random instance used for the identity checks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputOpts,
}

pub const TRANSPOSITION_NOTE: &str = "the published three-node table lists P and D transposed for the two \
     index-0.333 rows; the values here follow the definitions (P = 0.222, D = 0.111)";

/// The three-node path example: opinions [0, 0, 1] and one unit edge.
pub fn worked_example(u: usize, v: usize) -> EquilibriumReport {
    let g = WeightedGraph::new(3, [(u, v, 1.0)]).expect("valid edge");
    let s = OpinionVector::new(vec![0.0, 0.0, 1.0]).expect("valid opinions");
    dynamics::index(&g, &s).expect("three-node example")
}

struct Check {
    name: String,
    passed: bool,
    detail: Value,
}

fn check(name: impl Into<String>, passed: bool, detail: Value) -> Check {
    Check { name: name.into(), passed, detail }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn cmd_reproduce(args: &ReproduceArgs) -> Result<CommandOutput, CliError> {
    let ctx = CliError::context("reproduce");
    let mut checks = Vec::new();
    let third = 1.0 / 3.0;
    for ((u, v), expect) in [
        ((0, 1), [2.0 / 3.0, 0.0, 2.0 / 3.0]),
        ((0, 2), [2.0 / 9.0, 1.0 / 9.0, third]),
        ((1, 2), [2.0 / 9.0, 1.0 / 9.0, third]),
    ] {
        let r = worked_example(u, v);
        let got = [r.polarization, r.disagreement, r.index];
        let passed = max_abs_diff(&got, &expect) <= EXAMPLE_TOL;
        checks.push(check(
            format!("example edge ({},{})", u + 1, v + 1),
            passed,
            json!({ "polarization": got[0], "disagreement": got[1], "index": got[2] }),
        ));
    }

    let n = 40;
    let g = generators::erdos_renyi(n, 0.15, Seed(args.seed.wrapping_add(1))).map_err(&ctx)?;
    let s = generators::uniform_opinions(n, Seed(args.seed)).map_err(&ctx)?;
    let solver = EquilibriumSolver::new(&g).map_err(&ctx)?;
    let z = solver.equilibrium(s.as_slice()).map_err(&ctx)?;
    let z_bar = center(&z).map_err(&ctx)?;
    let d_raw = disagreement(&g, &z).map_err(&ctx)?;
    let d_bar = disagreement(&g, &z_bar).map_err(&ctx)?;
    checks.push(check(
        "disagreement invariant under centering",
        (d_raw - d_bar).abs() <= IDENTITY_TOL,
        json!({ "raw": d_raw, "centered": d_bar }),
    ));
    let z_from_centered = solver.equilibrium(&s.centered()).map_err(&ctx)?;
    let gap = max_abs_diff(&z_bar, &z_from_centered);
    checks.push(check("centering commutes with equilibrium", gap <= IDENTITY_TOL, json!({ "max_abs_diff": gap })));
    let r = solver.report(s.as_slice()).map_err(&ctx)?;
    let closed = solver.index_closed_form(s.as_slice()).map_err(&ctx)?;
    checks.push(check(
        "index equals closed form",
        (r.index - closed).abs() <= IDENTITY_TOL && (r.index - r.polarization - r.disagreement).abs() <= IDENTITY_TOL,
        json!({ "index": r.index, "closed_form": closed, "polarization": r.polarization, "disagreement": r.disagreement }),
    ));

    let witness = nonconvexity_witness();
    checks.push(check(
        "weighted objective is not convex",
        witness.min_eigenvalue < -WITNESS_MARGIN,
        json!({ "min_eigenvalue": witness.min_eigenvalue }),
    ));

    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    let mut messages: Vec<String> =
        checks.iter().map(|c| format!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name)).collect();
    messages.push(format!("note: {TRANSPOSITION_NOTE}"));
    let outputs = json!({
        "checks": checks.iter().map(|c| json!({ "name": c.name, "passed": c.passed, "values": c.detail })).collect::<Vec<_>>(),
        "note": TRANSPOSITION_NOTE,
        "all_passed": failed.is_empty(),
    });
    let mut out = CommandOutput::new(RunReport::new("reproduce", echo(args), outputs, args.seed));
    out.failed_checks = failed;
    out.messages = messages;
    Ok(out)
}
