//! Argument parsing and subcommand dispatch.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::PathBuf;

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use scalelab::continuum_graph::{continuum_graph_construct, glue_surplus_points, tilted_excursion};
use scalelab::error::Error;
use scalelab::graph_core::{graph_to_marked_dfq, kernel, core, marked_dfq_to_graph, ConnectedGraph, MarkedDfq, MultiGraph};
use scalelab::linebreak::{crt_linebreak, decode, encode, marchal_step, uniform_rooted_tree, CodingWord, GrowingTree, MarchalProcess};
use scalelab::path_codes::{contour_of, dfq_of, tree_from_contour, tree_from_dfq, DiscreteExcursion, Flavor};
use scalelab::rng::stream;
use scalelab::samplers::{
    bienayme_conditioned, er_explore_markov, er_graph, reflected_limit_process, uniform_graph_fixed_surplus,
    ComponentStat, ErParams, LimitParams, OffspringSpec,
};
use scalelab::stats::{parse_degree_law, run_named, Verdict};
use scalelab::tree_core::LabelledRootedTree;

use crate::config;
use crate::output::{Artifact, Run};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SCALELAB_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "scalelab", version, about = "Samplers, path codes and scaling-limit experiments for random trees and critical graphs")]
struct Cli {
    /// Master seed; every random task draws from its own stream of it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory (default: $SCALELAB_OUT_DIR, else stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `key = value` file supplying flag defaults; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a conditioned Bienaymé tree or a uniform rooted labelled tree.
    SampleTree {
        #[arg(long, value_enum, default_value_t = TreePreset::Poisson1)]
        preset: TreePreset,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = TreeFormat::Parent)]
        format: TreeFormat,
    },
    /// Encode a tree (parent-array text) as a path or coding word.
    Encode {
        #[arg(long = "as", value_enum)]
        target: EncodeTarget,
        /// Tree file, `-` for stdin.
        #[arg(long, default_value = "-")]
        input: String,
    },
    /// Decode a coding word, path code or marked DFQ.
    Decode {
        /// Coding word inline, e.g. "4 8 3 8 9 3 5 8 10".
        #[arg(long, conflicts_with = "input")]
        word: Option<String>,
        #[arg(long)]
        input: Option<String>,
        #[arg(long, value_enum, default_value_t = DecodeSource::Word)]
        from: DecodeSource,
        #[arg(long, value_enum, default_value_t = DecodedFormat::Edges)]
        format: DecodedFormat,
    },
    /// Uniform connected graph on [n] with surplus s.
    SampleGraph {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        surplus: usize,
        #[arg(long, value_enum, default_value_t = GraphFormat::Graph)]
        format: GraphFormat,
    },
    /// Core and kernel of a connected graph.
    CoreKernel {
        /// Graph file, `-` for stdin.
        #[arg(long, default_value = "-")]
        input: String,
    },
    /// Critical Erdős–Rényi graph, sampled directly or by its exploration chain.
    Er {
        #[arg(long)]
        n: usize,
        #[arg(long, conflicts_with = "p")]
        lambda: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, value_enum, default_value_t = ErMode::Graph)]
        mode: ErMode,
    },
    /// Reflected drifted Brownian motion with Poisson marks.
    LimitProcess {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Degree law `d:p,d:p,…`; drives the degree-model process instead.
        #[arg(long, conflicts_with = "lambda")]
        law: Option<String>,
        /// Also write the path itself as CSV.
        #[arg(long)]
        path: bool,
    },
    /// Line-breaking approximation of the Brownian CRT.
    Crt {
        #[arg(long)]
        branches: usize,
    },
    /// Marchal's stable-tree growth (α = 2 is Rémy's algorithm).
    Marchal {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = MarchalOutput::Shape)]
        output: MarchalOutput,
    },
    /// Continuum random graph with surplus s.
    ContinuumGraph {
        #[arg(long)]
        surplus: usize,
        #[arg(long, default_value_t = 0)]
        branches: usize,
        #[arg(long, value_enum, default_value_t = ContinuumMethod::Construct)]
        method: ContinuumMethod,
        /// Up-steps of the Dyck approximant used by `--method glue`.
        #[arg(long, default_value_t = 1000)]
        grid: usize,
    },
    /// Run a named Monte Carlo experiment and write its report.
    Experiment(ExperimentArgs),
}

#[derive(clap::Args, Debug)]
struct ExperimentArgs {
    /// One of the names listed in the README.
    name: String,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    s: Option<String>,
    #[arg(long)]
    draws: Option<String>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    pool_factor: Option<String>,
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long)]
    size_factor: Option<String>,
    #[arg(long)]
    metric_draws: Option<String>,
    #[arg(long)]
    glue_grid: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    horizon: Option<String>,
    #[arg(long)]
    law: Option<String>,
    /// Write the raw series as CSV (needs an output directory).
    #[arg(long)]
    csv: bool,
    /// Write SVG histograms of the series (needs an output directory).
    #[arg(long)]
    svg: bool,
}

impl ExperimentArgs {
    fn options(&self) -> BTreeMap<String, String> {
        let fields = [
            ("n", &self.n),
            ("k", &self.k),
            ("s", &self.s),
            ("draws", &self.draws),
            ("preset", &self.preset),
            ("pool-factor", &self.pool_factor),
            ("grid", &self.grid),
            ("lambda", &self.lambda),
            ("size-factor", &self.size_factor),
            ("metric-draws", &self.metric_draws),
            ("glue-grid", &self.glue_grid),
            ("dt", &self.dt),
            ("horizon", &self.horizon),
            ("law", &self.law),
        ];
        fields
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TreePreset {
    Geometric,
    Binary,
    Poisson1,
    Uniform,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TreeFormat {
    Parent,
    Edges,
    Dfq,
    Contour,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EncodeTarget {
    Contour,
    Dfq,
    Word,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DecodeSource {
    Word,
    Dfq,
    Contour,
    MarkedDfq,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DecodedFormat {
    Edges,
    Parent,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GraphFormat {
    Graph,
    MarkedDfq,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ErMode {
    Graph,
    Markov,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MarchalOutput {
    Shape,
    Distance,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ContinuumMethod {
    Construct,
    Glue,
}

fn name_of<T: ValueEnum>(v: T) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

/// Failures mapped onto exit codes 2 (usage/validation) and 1 (internal).
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Internal(e.to_string())
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

pub fn run(mut argv: Vec<String>) -> u8 {
    if let Err(f) = apply_config(&mut argv) {
        return report_failure(f);
    }
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let out = cli.out.clone().or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from));
    match execute(&cli).and_then(|r| r.emit(out.as_deref())) {
        Ok(()) => 0,
        Err(f) => report_failure(f),
    }
}

fn report_failure(f: Failure) -> u8 {
    match f {
        Failure::Usage(m) => {
            eprintln!("error: {m}");
            eprintln!("run `scalelab --help` for usage");
            2
        }
        Failure::Internal(m) => {
            eprintln!("internal error: {m}");
            1
        }
    }
}

/// Injects config-file defaults as flags the chosen subcommand accepts.
fn apply_config(argv: &mut Vec<String>) -> Result<(), Failure> {
    let mut path = None;
    for (i, a) in argv.iter().enumerate() {
        if a == "--config" {
            path = argv.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(()) };
    let text = std::fs::read_to_string(&path).map_err(|e| usage(format!("config {path}: {e}")))?;
    let defaults = config::parse(&text)?;
    let root = Cli::command();
    let Some(sub) = argv.iter().skip(1).find_map(|a| root.find_subcommand(a)) else {
        return Ok(());
    };
    let mut known = Vec::new();
    let mut switches = Vec::new();
    for arg in root.get_arguments().chain(sub.get_arguments()) {
        if let Some(long) = arg.get_long() {
            if long == "config" || long == "help" || long == "version" {
                continue;
            }
            if arg.get_action().takes_values() {
                known.push(long.to_string());
            } else {
                switches.push(long.to_string());
            }
        }
    }
    let (flags, values): (BTreeMap<_, _>, BTreeMap<_, _>) =
        defaults.into_iter().partition(|(k, _)| switches.contains(k));
    for k in config::merge(argv, &known, &values) {
        eprintln!("warning: config key `{k}` is not used by this command");
    }
    for (k, v) in flags {
        let on = matches!(v.as_str(), "true" | "1" | "yes" | "on");
        if on && !argv.iter().any(|a| *a == format!("--{k}")) {
            argv.push(format!("--{k}"));
        }
    }
    Ok(())
}

fn read_input(path: &str) -> Result<String, Failure> {
    let mut text = String::new();
    if path == "-" {
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::Internal(format!("stdin: {e}")))?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| usage(format!("{path}: {e}")))?;
    }
    Ok(strip_comments(&text))
}

fn strip_comments(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .flat_map(|l| [l, "\n"])
        .collect()
}

fn params(pairs: &[(&str, Value)]) -> Map<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn components_text(c: &[ComponentStat]) -> String {
    let mut s = String::from("rank size surplus\n");
    for (i, x) in c.iter().enumerate() {
        s.push_str(&format!("{} {} {}\n", i + 1, x.size, x.surplus));
    }
    s
}

fn execute(cli: &Cli) -> Result<Run, Failure> {
    let seed = cli.seed;
    let mut rng = stream(seed, 0);
    let run = match &cli.command {
        Command::SampleTree { preset, n, format } => {
            if *n == 0 {
                return Err(usage("--n must be positive"));
            }
            let labelled = match preset {
                TreePreset::Uniform => uniform_rooted_tree(*n, &mut rng),
                TreePreset::Geometric | TreePreset::Binary | TreePreset::Poisson1 => {
                    let spec = OffspringSpec::from_name(&name_of(*preset))?;
                    LabelledRootedTree::from_indexed(&bienayme_conditioned(&spec, *n, &mut rng)?)
                }
            };
            let body = match format {
                TreeFormat::Parent => labelled.to_parent_text(),
                TreeFormat::Edges => labelled.to_edge_text(),
                TreeFormat::Dfq => dfq_of(labelled.tree()).to_text(),
                TreeFormat::Contour => contour_of(labelled.tree()).to_text(),
            };
            Run::new(
                "sample-tree",
                seed,
                params(&[("preset", json!(name_of(*preset))), ("n", json!(n)), ("format", json!(name_of(*format)))]),
            )
            .with(Artifact::text(&format!("tree.{}", name_of(*format)), body))
        }
        Command::Encode { target, input } => {
            let t = LabelledRootedTree::from_parent_text(&read_input(input)?)?;
            let body = match target {
                EncodeTarget::Contour => contour_of(t.tree()).to_text(),
                EncodeTarget::Dfq => dfq_of(t.tree()).to_text(),
                EncodeTarget::Word => encode(&t).to_text() + "\n",
            };
            Run::new("encode", seed, params(&[("as", json!(name_of(*target))), ("n", json!(t.n()))]))
                .with(Artifact::text(&format!("code.{}", name_of(*target)), body))
        }
        Command::Decode { word, input, from, format } => {
            let text = match (word, input) {
                (Some(w), _) => w.clone(),
                (None, Some(p)) => read_input(p)?,
                (None, None) => read_input("-")?,
            };
            let mut p = params(&[("from", json!(name_of(*from)))]);
            if let Some(w) = word {
                p.insert("word".into(), json!(w));
            }
            let tree = match from {
                DecodeSource::Word => Some(decode(&CodingWord::from_text(text.trim())?)),
                DecodeSource::Dfq => Some(LabelledRootedTree::from_indexed(&tree_from_dfq(
                    &DiscreteExcursion::from_text(&text, Flavor::Dfq)?,
                )?)),
                DecodeSource::Contour => Some(LabelledRootedTree::from_indexed(&tree_from_contour(
                    &DiscreteExcursion::from_text(&text, Flavor::Contour)?,
                )?)),
                DecodeSource::MarkedDfq => None,
            };
            match tree {
                Some(t) => {
                    p.insert("format".into(), json!(name_of(*format)));
                    let body = match format {
                        DecodedFormat::Edges => t.to_edge_text(),
                        DecodedFormat::Parent => t.to_parent_text(),
                    };
                    Run::new("decode", seed, p).with(Artifact::text(&format!("tree.{}", name_of(*format)), body))
                }
                None => {
                    let g = marked_dfq_to_graph(&MarkedDfq::from_text(&text)?)?;
                    Run::new("decode", seed, p).with(Artifact::text("graph.txt", g.to_multigraph().to_text()))
                }
            }
        }
        Command::SampleGraph { n, surplus, format } => {
            let g = uniform_graph_fixed_surplus(*n, *surplus, &mut rng)?;
            let body = match format {
                GraphFormat::Graph => g.to_multigraph().to_text(),
                GraphFormat::MarkedDfq => graph_to_marked_dfq(&g).to_text(),
            };
            Run::new(
                "sample-graph",
                seed,
                params(&[("n", json!(n)), ("surplus", json!(surplus)), ("format", json!(name_of(*format)))]),
            )
            .with(Artifact::text(&format!("graph.{}", name_of(*format)), body))
        }
        Command::CoreKernel { input } => {
            let m = MultiGraph::from_text(&read_input(input)?)?;
            let g = ConnectedGraph::from_multigraph(&m)?;
            let k = kernel(&g);
            Run::new("core-kernel", seed, params(&[("n", json!(g.n())), ("surplus", json!(g.surplus()))]))
                .with(Artifact::text("core.txt", core(&g).to_text()))
                .with(Artifact::text("kernel.txt", k.graph.to_text()))
                .with(Artifact::text("kernel_paths.txt", k.sidecar_text()))
        }
        Command::Er { n, lambda, p, mode } => {
            let params_er = match p {
                Some(p) => ErParams::with_p(*n, *p)?,
                None => ErParams::critical(*n, lambda.unwrap_or(0.0))?,
            };
            let mut rp = params(&[
                ("n", json!(n)),
                ("p", json!(params_er.p)),
                ("mode", json!(name_of(*mode))),
            ]);
            if p.is_none() {
                rp.insert("lambda".into(), json!(params_er.lambda));
            }
            let run = Run::new("er", seed, rp);
            match mode {
                ErMode::Graph => {
                    let g = er_graph(&params_er, &mut rng);
                    let mut edges = String::new();
                    for (a, b) in &g.edges {
                        edges.push_str(&format!("{a} {b}\n"));
                    }
                    run.with(Artifact::text("components.txt", components_text(&g.components)))
                        .with(Artifact::text("edges.txt", edges))
                }
                ErMode::Markov => {
                    let c = er_explore_markov(&params_er, &mut rng);
                    run.with(Artifact::text("components.txt", components_text(&c)))
                }
            }
        }
        Command::LimitProcess { lambda, horizon, dt, law, path } => {
            let (lp, mut rp) = match law {
                Some(text) => {
                    let d = parse_degree_law(text)?;
                    (LimitParams::degree_model(&d), params(&[("law", json!(text))]))
                }
                None => (LimitParams::erdos_renyi(*lambda), params(&[("lambda", json!(lambda))])),
            };
            rp.insert("horizon".into(), json!(horizon));
            rp.insert("dt".into(), json!(dt));
            rp.insert("process".into(), serde_json::to_value(lp).expect("serializable"));
            let r = reflected_limit_process(&lp, *horizon, *dt, &mut rng)?;
            let mut ex = String::from("start length marks\n");
            for e in &r.excursions {
                ex.push_str(&format!("{} {} {}\n", e.start, e.length, e.marks));
            }
            let mut run = Run::new("limit-process", seed, rp).with(Artifact::text("excursions.txt", ex));
            if *path {
                let mut csv = String::from("t,x,r\n");
                for (i, (x, y)) in r.x.iter().zip(&r.r).enumerate() {
                    csv.push_str(&format!("{},{x},{y}\n", i as f64 * r.dt));
                }
                run = run.with(Artifact::text("path.csv", csv));
            }
            run
        }
        Command::Crt { branches } => {
            let t = crt_linebreak(*branches, &mut rng)?;
            Run::new("crt", seed, params(&[("branches", json!(branches)), ("shape", json!(t.shape()))]))
                .with(Artifact::text("crt.txt", t.graph.to_text()))
                .with(Artifact::text("leaves.txt", t.label_map_text()))
        }
        Command::Marchal { alpha, steps, output } => {
            let rp = params(&[("alpha", json!(alpha)), ("steps", json!(steps)), ("output", json!(name_of(*output)))]);
            match output {
                MarchalOutput::Shape => {
                    let mut t = GrowingTree::initial();
                    for _ in 0..*steps {
                        marchal_step(&mut t, *alpha, &mut rng)?;
                    }
                    Run::new("marchal", seed, rp).with(Artifact::text("shape.txt", t.shape() + "\n"))
                }
                MarchalOutput::Distance => {
                    let mut proc = MarchalProcess::new(*alpha, *steps)?;
                    let last = steps + 1;
                    let mut checkpoints: Vec<usize> =
                        (1..).map(|j| 1usize << j).take_while(|&c| c < last).collect();
                    checkpoints.push(last);
                    let series = proc.rescaled_distance_series(&checkpoints, &mut rng);
                    let mut body = String::from("leaves rescaled_distance\n");
                    for (c, d) in checkpoints.iter().zip(series) {
                        body.push_str(&format!("{c} {d}\n"));
                    }
                    Run::new("marchal", seed, rp).with(Artifact::text("distance.txt", body))
                }
            }
        }
        Command::ContinuumGraph { surplus, branches, method, grid } => {
            let mut rp = params(&[("surplus", json!(surplus)), ("method", json!(name_of(*method)))]);
            match method {
                ContinuumMethod::Construct => {
                    rp.insert("branches".into(), json!(branches));
                    let c = continuum_graph_construct(*surplus, *branches, &mut rng)?;
                    rp.insert("kernel".into(), json!(c.kernel_name()));
                    rp.insert("core_length".into(), json!(c.x));
                    Run::new("continuum-graph", seed, rp)
                        .with(Artifact::text("graph.txt", c.graph.to_text()))
                        .with(Artifact::text("kernel.txt", c.kernel.to_text()))
                }
                ContinuumMethod::Glue => {
                    if *branches != 0 {
                        return Err(usage("--branches applies to --method construct only"));
                    }
                    rp.insert("grid".into(), json!(grid));
                    let e = tilted_excursion(*surplus, *grid, &mut rng)?;
                    let g = glue_surplus_points(&e, *surplus, &mut rng)?;
                    rp.insert("resolution".into(), json!(g.resolution));
                    Run::new("continuum-graph", seed, rp)
                        .with(Artifact::text("graph.txt", g.graph.to_text()))
                        .with(Artifact::text("excursion.csv", e.excursion.to_csv()))
                }
            }
        }
        Command::Experiment(args) => {
            let opts = args.options();
            let report = run_named(&args.name, &opts, seed)?;
            for c in &report.checks {
                let verdict = match c.verdict {
                    Verdict::Pass => "PASS",
                    Verdict::Flag => "FLAG",
                    Verdict::Fail => "FAIL",
                };
                let p = c.p_value.map(|p| format!(" p={p:.4}")).unwrap_or_default();
                eprintln!("{verdict} {} stat={:.4}{p} ({})", c.name, c.statistic, c.threshold);
            }
            let rp: Map<String, Value> = opts.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
            Run::new("experiment", seed, rp).report(&args.name, report, args.csv, args.svg)
        }
    };
    Ok(run)
}
