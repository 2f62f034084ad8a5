//! Command-line front end: graph building, robustness checks, scenario
//! simulation, and batch robustness studies.
//!
//! Exit codes: 0 success (converged / exploration complete), 1 usage or
//! configuration error, 2 domain error (degenerate geometry, too-large
//! graph), 3 non-convergence.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use vorobust::consensus::{write_trajectory, Verdict};
use vorobust::graph::{read_edge_list, write_edge_list, CommGraph};
use vorobust::robustness::{is_rs_robust, max_equal_rs, CheckerConfig, RobustnessReport};
use vorobust::scenarios::config::{run_scenario, ScenarioConfig, ScenarioKind, ScenarioOutcome};
use vorobust::scenarios::mapping::{
    read_grid, write_belief_csv, write_map_positions_csv, OccupancyGrid,
};
use vorobust::scenarios::rendezvous::write_rendezvous_trajectory;
use vorobust::scenarios::ScenarioError;
use vorobust::study::{
    run_robustness_study, write_aggregate_csv, write_samples_csv, FormationSpec,
};

const EXIT_CONFIG: u8 = 1;
const EXIT_DOMAIN: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "vorobust",
    version,
    about = "Voronoi communication graphs, exact (r,s)-robustness checking, and resilient W-MSR consensus simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the communication graph of a positions file and write it as an
    /// edge list.
    Graph(GraphArgs),
    /// Check the (r,s)-robustness of an edge-list graph.
    Check(CheckArgs),
    /// Run a scenario described by a config file.
    Simulate(SimulateArgs),
    /// Run a batch robustness study described by a config file.
    Study(StudyArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Positions file: one `id x y` record per agent.
    #[arg(long)]
    positions: PathBuf,
    /// Extension level; 1 keeps the bare triangulation graph.
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Output edge-list file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the triangle faces for plotting.
    #[arg(long)]
    triangles_out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Edge-list file produced by `vorobust graph`.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, requires = "s", conflicts_with = "max")]
    r: Option<u32>,
    #[arg(long, requires = "r", conflicts_with = "max")]
    s: Option<u32>,
    /// Search for the largest r with the graph (r, r)-robust.
    #[arg(long)]
    max: bool,
    /// Count the whole enumeration space instead of stopping at the first
    /// violation.
    #[arg(long)]
    audit: bool,
    /// Vertex-count cap for the exhaustive check.
    #[arg(long, default_value_t = vorobust::robustness::DEFAULT_VERTEX_CAP)]
    cap: usize,
    #[arg(long, value_parser = ["csv", "json"], default_value = "json")]
    format: String,
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario config (TOML).
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct StudyArgs {
    /// Study config (TOML).
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the sample loop (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Vertex-count cap for the robustness checker.
    #[arg(long, default_value_t = vorobust::robustness::DEFAULT_VERTEX_CAP)]
    cap: usize,
}

/// Study config document.
#[derive(serde::Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct StudyConfig {
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_k_max")]
    k_max: u32,
    #[serde(default = "default_samples")]
    samples: usize,
    formations: Vec<FormationSpec>,
}

fn default_k_max() -> u32 {
    4
}
fn default_samples() -> usize {
    100
}

/// Written alongside every output set; re-running the same command with the
/// same seed reproduces the other outputs byte for byte.
#[derive(serde::Serialize)]
struct RunManifest {
    command: String,
    config: Option<String>,
    master_seed: u64,
    tool_version: &'static str,
    wall_time_ms: u128,
    outputs: Vec<String>,
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn config(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: EXIT_CONFIG,
            error: error.into(),
        }
    }

    fn domain(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: EXIT_DOMAIN,
            error: error.into(),
        }
    }
}

fn scenario_failure(err: ScenarioError) -> Failure {
    match err {
        ScenarioError::Config(_) | ScenarioError::GridParse { .. } => Failure::config(err),
        other => Failure::domain(other),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Graph(args) => cmd_graph(args),
        Command::Check(args) => cmd_check(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Study(args) => cmd_study(args),
    }
}

fn cmd_graph(args: GraphArgs) -> Result<u8, Failure> {
    if args.k == 0 {
        return Err(Failure::config(anyhow::anyhow!(
            "--k must be at least 1 (1 is the bare triangulation graph)"
        )));
    }
    let file = File::open(&args.positions)
        .with_context(|| format!("opening {}", args.positions.display()))
        .map_err(Failure::config)?;
    let (_ids, points) =
        vorobust::geometry::read_positions(BufReader::new(file)).map_err(Failure::config)?;
    let tri = vorobust::geometry::delaunay(&points).map_err(Failure::domain)?;
    if let Some(path) = &args.triangles_out {
        let mut out = BufWriter::new(File::create(path).map_err(Failure::config)?);
        vorobust::geometry::write_triangles(&mut out, &tri).map_err(Failure::config)?;
        out.flush().map_err(Failure::config)?;
    }
    let graph = CommGraph::from_triangulation(&tri)
        .k_hop_extend(args.k)
        .map_err(Failure::domain)?;
    match args.out {
        Some(path) => {
            let mut out = BufWriter::new(File::create(&path).map_err(Failure::config)?);
            write_edge_list(&mut out, &graph).map_err(Failure::config)?;
            out.flush().map_err(Failure::config)?;
            println!(
                "{} vertices, {} edges ({} triangulation + {} extension) -> {}",
                graph.vertex_count(),
                graph.edge_count(),
                graph.delta_edges().len(),
                graph.ext_edges().len(),
                path.display()
            );
        }
        None => {
            let mut out = std::io::stdout().lock();
            write_edge_list(&mut out, &graph).map_err(Failure::config)?;
        }
    }
    Ok(0)
}

#[derive(serde::Serialize)]
struct CheckOutput {
    n: usize,
    k: u32,
    edges: usize,
    mode: &'static str,
    max_equal_rs: Option<u32>,
    report: Option<RobustnessReport>,
    wall_time_ms: u128,
}

fn report_csv(out: &CheckOutput) -> String {
    let mut text = String::from(
        "n,k,edges,mode,r,s,robust,max_rs,pairs_checked,witness_s1,witness_s2,wall_time_ms\n",
    );
    let (r, s, robust, pairs, w1, w2) = match &out.report {
        Some(rep) => (
            rep.r.to_string(),
            rep.s.to_string(),
            rep.robust.to_string(),
            rep.pairs_checked.to_string(),
            rep.witness
                .as_ref()
                .map(|w| {
                    w.s1.iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .unwrap_or_default(),
            rep.witness
                .as_ref()
                .map(|w| {
                    w.s2.iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .unwrap_or_default(),
        ),
        None => Default::default(),
    };
    let max = out.max_equal_rs.map(|m| m.to_string()).unwrap_or_default();
    text.push_str(&format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}\n",
        out.n, out.k, out.edges, out.mode, r, s, robust, max, pairs, w1, w2, out.wall_time_ms
    ));
    text
}

fn cmd_check(args: CheckArgs) -> Result<u8, Failure> {
    let file = File::open(&args.graph)
        .with_context(|| format!("opening {}", args.graph.display()))
        .map_err(Failure::config)?;
    let graph = read_edge_list(BufReader::new(file)).map_err(Failure::config)?;
    let cfg = CheckerConfig {
        cap: args.cap,
        audit: args.audit,
    };
    let started = Instant::now();
    let mut output = CheckOutput {
        n: graph.vertex_count(),
        k: graph.extension_level(),
        edges: graph.edge_count(),
        mode: if args.max { "max" } else { "query" },
        max_equal_rs: None,
        report: None,
        wall_time_ms: 0,
    };
    if args.max {
        output.max_equal_rs = Some(max_equal_rs(&graph, &cfg).map_err(Failure::domain)?);
    } else {
        let (r, s) = match (args.r, args.s) {
            (Some(r), Some(s)) => (r, s),
            _ => {
                return Err(Failure::config(anyhow::anyhow!(
                    "give --r and --s, or --max"
                )))
            }
        };
        output.report = Some(is_rs_robust(&graph, r, s, &cfg).map_err(Failure::domain)?);
    }
    output.wall_time_ms = started.elapsed().as_millis();

    let rendered = match args.format.as_str() {
        "json" => serde_json::to_string_pretty(&output).map_err(Failure::config)?,
        _ => report_csv(&output),
    };
    println!("{rendered}");
    if let Some(path) = args.out {
        fs::write(&path, rendered).map_err(Failure::config)?;
    }
    Ok(0)
}

fn create_out_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(Failure::config)
}

fn write_output<F>(
    dir: &Path,
    name: &str,
    outputs: &mut Vec<String>,
    write: F,
) -> Result<(), Failure>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let path = dir.join(name);
    let mut out = BufWriter::new(File::create(&path).map_err(Failure::config)?);
    write(&mut out).map_err(Failure::config)?;
    out.flush().map_err(Failure::config)?;
    outputs.push(name.to_string());
    Ok(())
}

fn write_manifest(
    dir: &Path,
    command: &str,
    config: Option<&Path>,
    seed: u64,
    started: Instant,
    outputs: Vec<String>,
) -> Result<(), Failure> {
    let manifest = RunManifest {
        command: command.to_string(),
        config: config.map(|p| p.display().to_string()),
        master_seed: seed,
        tool_version: env!("CARGO_PKG_VERSION"),
        wall_time_ms: started.elapsed().as_millis(),
        outputs,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(Failure::config)?;
    fs::write(dir.join("manifest.json"), text).map_err(Failure::config)?;
    Ok(())
}

#[derive(serde::Serialize)]
struct VerdictSummary<'a> {
    kind: &'a str,
    seed: u64,
    verdict: &'a Verdict,
    safe_lo: &'a [f64],
    safe_hi: &'a [f64],
    always_contained: Option<bool>,
    steps: usize,
}

fn cmd_simulate(args: SimulateArgs) -> Result<u8, Failure> {
    let started = Instant::now();
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))
        .map_err(Failure::config)?;
    let mut config: ScenarioConfig = toml::from_str(&text)
        .with_context(|| format!("parsing {}", args.config.display()))
        .map_err(Failure::config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let grid: Option<OccupancyGrid> = match (&config.kind, &config.map) {
        (ScenarioKind::MapConsensus, Some(section)) => {
            let path = args
                .config
                .parent()
                .unwrap_or_else(|| Path::new("."))
                .join(&section.grid);
            let file = File::open(&path)
                .with_context(|| format!("opening grid {}", path.display()))
                .map_err(Failure::config)?;
            Some(read_grid(BufReader::new(file)).map_err(scenario_failure)?)
        }
        _ => None,
    };
    create_out_dir(&args.out_dir)?;
    let outcome = run_scenario(&config, grid).map_err(scenario_failure)?;
    let succeeded = outcome.succeeded();
    let mut outputs = Vec::new();
    match &outcome {
        ScenarioOutcome::Estimation { run, behaviors } => {
            write_output(&args.out_dir, "trajectory.csv", &mut outputs, |out| {
                write_trajectory(out, &run.run.trajectory, behaviors)
            })?;
            let summary = VerdictSummary {
                kind: "parameter-estimation",
                seed: config.seed,
                verdict: &run.run.verdict,
                safe_lo: &run.safe.lo,
                safe_hi: &run.safe.hi,
                always_contained: Some(run.always_contained()),
                steps: run.run.trajectory.len() - 1,
            };
            write_output(&args.out_dir, "verdict.json", &mut outputs, |out| {
                writeln!(out, "{}", serde_json::to_string_pretty(&summary).unwrap())
            })?;
        }
        ScenarioOutcome::Rendezvous { run, behaviors } => {
            write_output(&args.out_dir, "trajectory.csv", &mut outputs, |out| {
                write_rendezvous_trajectory(out, run, behaviors)
            })?;
            let summary = VerdictSummary {
                kind: "rendezvous",
                seed: config.seed,
                verdict: &run.verdict,
                safe_lo: &run.safe.lo,
                safe_hi: &run.safe.hi,
                always_contained: Some(run.centers_always_safe(behaviors)),
                steps: run.steps.len() - 1,
            };
            write_output(&args.out_dir, "verdict.json", &mut outputs, |out| {
                writeln!(out, "{}", serde_json::to_string_pretty(&summary).unwrap())
            })?;
        }
        ScenarioOutcome::Map { run, behaviors } => {
            write_output(&args.out_dir, "positions.csv", &mut outputs, |out| {
                write_map_positions_csv(out, &run.positions_log, behaviors)
            })?;
            for (i, agent) in run.agents.iter().enumerate() {
                let name = format!("belief_agent{i}.csv");
                write_output(&args.out_dir, &name, &mut outputs, |out| {
                    write_belief_csv(out, &agent.belief)
                })?;
            }
            write_output(&args.out_dir, "summary.json", &mut outputs, |out| {
                writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&run.summary).unwrap()
                )
            })?;
        }
    }
    write_manifest(
        &args.out_dir,
        "simulate",
        Some(&args.config),
        config.seed,
        started,
        outputs,
    )?;
    if succeeded {
        println!("scenario completed: success");
        Ok(0)
    } else {
        match &outcome {
            ScenarioOutcome::Estimation { run, .. } => {
                println!("scenario did not converge: {:?}", run.run.verdict)
            }
            ScenarioOutcome::Rendezvous { run, .. } => {
                println!("scenario did not converge: {:?}", run.verdict)
            }
            ScenarioOutcome::Map { run, .. } => println!(
                "exploration incomplete: coverage {:.1}%",
                100.0 * run.summary.coverage
            ),
        }
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn cmd_study(args: StudyArgs) -> Result<u8, Failure> {
    let started = Instant::now();
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))
        .map_err(Failure::config)?;
    let mut config: StudyConfig = toml::from_str(&text)
        .with_context(|| format!("parsing {}", args.config.display()))
        .map_err(Failure::config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::config(anyhow::anyhow!("thread pool: {e}")))?;
    }
    let checker = CheckerConfig {
        cap: args.cap,
        audit: false,
    };
    let report = run_robustness_study(
        &config.formations,
        config.k_max,
        config.samples,
        config.seed,
        &checker,
    )
    .map_err(Failure::domain)?;

    create_out_dir(&args.out_dir)?;
    let mut outputs = Vec::new();
    write_output(&args.out_dir, "aggregate.csv", &mut outputs, |out| {
        write_aggregate_csv(out, &report)
    })?;
    write_output(&args.out_dir, "samples.csv", &mut outputs, |out| {
        write_samples_csv(out, &report)
    })?;
    write_output(&args.out_dir, "study.json", &mut outputs, |out| {
        writeln!(out, "{}", serde_json::to_string_pretty(&report).unwrap())
    })?;
    write_manifest(
        &args.out_dir,
        "study",
        Some(&args.config),
        config.seed,
        started,
        outputs,
    )?;
    for k in 1..=config.k_max {
        println!(
            "K = {k}: min max-r=s {}, complete {:.0}%",
            report.min_max_rs(k).unwrap_or(0),
            report.percent_complete(k)
        );
        // Levels 1 and 2 always reach r = s = 2 and 3; higher levels
        // usually continue the ladder but are only reported, so flag
        // samples under the line instead of failing.
        if k >= 3 {
            for (formation, sample) in report.samples_below(k, k + 1) {
                println!("  below K+1 at K={k}: {formation} sample {sample}");
            }
        }
    }
    Ok(0)
}
