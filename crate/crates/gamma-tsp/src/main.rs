//! Command-line front end: cluster, solve, benchmark, generate, and
//! measure instances from TSPLIB-format files.
//!
//! Exit codes: 0 on success, 1 when a solver hit its budget but still
//! produced a feasible tour, 2 on usage or input errors. All JSON and
//! CSV outputs are deterministic for a fixed seed; wall-clock times are
//! confined to fields whose names end in `_time` or `_secs`.

// `!(x > y)` comparisons deliberately reject NaN arguments.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gamma_tsp::analysis::measure_gap;
use gamma_tsp::clustering::gamma_clustering;
use gamma_tsp::instances::{
    gen_lower_bound, gen_office, gen_planted, instance_to_graph, parse_tsplib, write_explicit,
    GridOfficeMap,
};
use gamma_tsp::solvers::SolverError;
use gamma_tsp::{
    solve_exact_ctsp, solve_exact_tsp, solve_heuristic, MetricGraph, SolveReport, SolveStatus,
};

#[derive(Parser)]
#[command(name = "gamma-tsp", version, about = "Cluster-aware TSP toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find the maximal clustering of an instance and write it as JSON.
    Cluster(ClusterArgs),
    /// Solve one instance, constrained by its clustering.
    Solve(SolveArgs),
    /// Solve a batch of instances and emit one CSV row per instance.
    Bench(BenchArgs),
    /// Generate synthetic instances in TSPLIB explicit format.
    Gen(GenArgs),
    /// Compare constrained and unconstrained optima on one instance.
    Gap(GapArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Solver {
    /// Exact constrained solve (decomposition, falling back to
    /// branch-and-bound on small instances).
    Exact,
    /// Nearest-neighbor construction repaired to feasibility plus 2-opt.
    Heuristic,
    /// Exact solve ignoring the clustering.
    Tsp,
}

#[derive(Args)]
struct CommonArgs {
    /// Cluster separation threshold; must exceed 1.
    #[arg(long, default_value_t = 1.000001)]
    gamma: f64,
    /// Wall-clock budget per solver call, in seconds.
    #[arg(long, default_value_t = 900.0)]
    budget_secs: f64,
    /// Seed for randomized components.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClusterArgs {
    /// TSPLIB instance file.
    instance: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SolveArgs {
    /// TSPLIB instance file.
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Solver::Exact)]
    solver: Solver,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// TSPLIB instance files; one CSV row each, in argument order.
    #[arg(required = true)]
    instances: Vec<PathBuf>,
    /// Worker threads; defaults to the logical core count.
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct GapArgs {
    /// TSPLIB instance file.
    instance: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    family: GenFamily,
}

#[derive(Subcommand)]
enum GenFamily {
    /// Scalable worst-case family: n+1 triples with separation alpha/beta.
    LowerBound {
        /// Number of extra triples (the instance has 3(n+1) vertices).
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Output file; a default name is derived when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random metric instance with planted clusters of the given sizes.
    Planted {
        /// Comma-separated cluster sizes, e.g. 3,3,4.
        sizes: String,
        #[arg(long, default_value_t = 2.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; the planted clustering is written alongside it
        /// with a .clusters.json suffix.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shortest-path distances between waypoints on an ASCII grid map.
    Office {
        /// Map file: `#` walls, `.` floor, `W` waypoints.
        map: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Cluster(args) => cmd_cluster(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Gap(args) => cmd_gap(args),
    }
}

fn load_graph(path: &Path) -> Result<(String, MetricGraph)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let inst = parse_tsplib(&text).with_context(|| format!("parsing {}", path.display()))?;
    let graph = instance_to_graph(&inst)?;
    Ok((inst.name, graph))
}

fn check_common(common: &CommonArgs) -> Result<Duration> {
    if !(common.gamma > 1.0) {
        bail!("--gamma must exceed 1 (got {})", common.gamma);
    }
    if !(common.budget_secs > 0.0) {
        bail!(
            "--budget-secs must be positive (got {})",
            common.budget_secs
        );
    }
    Ok(Duration::from_secs_f64(common.budget_secs))
}

fn emit(out: &Option<PathBuf>, body: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(body.as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_cluster(args: ClusterArgs) -> Result<i32> {
    check_common(&args.common)?;
    let (name, graph) = load_graph(&args.instance)?;
    let start = Instant::now();
    let tree = gamma_clustering(&graph, args.common.gamma)?;
    let elapsed = start.elapsed();
    eprintln!(
        "{name}: {} clusters in {:.3}s",
        tree.len(),
        elapsed.as_secs_f64()
    );
    let body = match args.common.format {
        Format::Json => serde_json::to_string_pretty(&tree)? + "\n",
        Format::Csv => format!(
            "name,clusters,cluster_time\n{name},{},{:.6}\n",
            tree.len(),
            elapsed.as_secs_f64()
        ),
        Format::Text => {
            let mut s = format!(
                "{name}: {} clusters at gamma {}\n",
                tree.len(),
                args.common.gamma
            );
            for (set, metrics) in tree.clusters() {
                s.push_str(&format!(
                    "  {:?} alpha {:.6} beta {:.6} gamma {:.6}\n",
                    set.members(),
                    metrics.alpha,
                    metrics.beta,
                    metrics.gamma
                ));
            }
            s
        }
    };
    emit(&args.common.out, &body)?;
    Ok(0)
}

#[derive(Serialize)]
struct SolveArtifact {
    instance: String,
    gamma: f64,
    clusters: usize,
    #[serde(flatten)]
    report: SolveReport,
}

fn cmd_solve(args: SolveArgs) -> Result<i32> {
    let budget = check_common(&args.common)?;
    let (name, graph) = load_graph(&args.instance)?;
    let tree = gamma_clustering(&graph, args.common.gamma)?;
    let report = match args.solver {
        Solver::Exact => solve_exact_ctsp(&graph, &tree, budget)?,
        Solver::Heuristic => solve_heuristic(&graph, Some(&tree), budget, args.common.seed),
        Solver::Tsp => solve_exact_tsp(&graph, budget)?,
    };
    // An exact solver that ran out of budget still holds a feasible
    // incumbent; signal that distinctly. The heuristic always reports
    // a budget-limited status, which for it is normal completion.
    let code = if args.solver != Solver::Heuristic && report.status != SolveStatus::Optimal {
        1
    } else {
        0
    };
    let artifact = SolveArtifact {
        instance: name,
        gamma: args.common.gamma,
        clusters: tree.len(),
        report,
    };
    let body = match args.common.format {
        Format::Json => serde_json::to_string_pretty(&artifact)? + "\n",
        Format::Csv => format!(
            "name,solver,cost,status,nodes,solve_time\n{},{},{},{},{},{:.6}\n",
            artifact.instance,
            artifact.report.solver_name,
            artifact.report.cost,
            status_str(artifact.report.status),
            artifact.report.nodes_expanded,
            artifact.report.elapsed.as_secs_f64()
        ),
        Format::Text => format!(
            "{}: cost {} ({}, {} clusters, {:.3}s)\ntour: {:?}\n",
            artifact.instance,
            artifact.report.cost,
            status_str(artifact.report.status),
            artifact.clusters,
            artifact.report.elapsed.as_secs_f64(),
            artifact.report.tour.order
        ),
    };
    emit(&args.common.out, &body)?;
    Ok(code)
}

fn status_str(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::FeasibleTimeout => "feasible_timeout",
        SolveStatus::Infeasible => "infeasible",
    }
}

struct BenchRow {
    name: String,
    clusters: Option<usize>,
    tsp: Option<SolveReport>,
    ctsp: Option<SolveReport>,
    cluster_time: f64,
    error: Option<String>,
}

impl BenchRow {
    fn failed(name: String, error: String) -> Self {
        BenchRow {
            name,
            clusters: None,
            tsp: None,
            ctsp: None,
            cluster_time: 0.0,
            error: Some(error),
        }
    }

    fn csv(&self) -> String {
        if let Some(err) = &self.error {
            let msg = err.replace(',', ";").replace('\n', " ");
            return format!("{},,,error: {msg},,,,,,\n", self.name);
        }
        let tsp = self.tsp.as_ref().unwrap();
        let ctsp = self.ctsp.as_ref().unwrap();
        let solve_total = self.cluster_time + ctsp.elapsed.as_secs_f64();
        format!(
            "{},{},{},{},{:.6},{},{},{:.6},{},{:.6}\n",
            self.name,
            self.clusters.unwrap(),
            tsp.cost,
            status_str(tsp.status),
            tsp.elapsed.as_secs_f64(),
            ctsp.cost,
            status_str(ctsp.status),
            ctsp.elapsed.as_secs_f64(),
            ctsp.cost / tsp.cost,
            self.cluster_time / solve_total,
        )
    }
}

/// Exact solve that degrades to the heuristic (with its budget-limited
/// status) when the instance exceeds the exact solvers' size caps.
fn solve_or_fallback(
    graph: &MetricGraph,
    tree: Option<&gamma_tsp::ClusterTree>,
    budget: Duration,
    seed: u64,
) -> Result<SolveReport, SolverError> {
    let exact = match tree {
        Some(t) => solve_exact_ctsp(graph, t, budget),
        None => solve_exact_tsp(graph, budget),
    };
    match exact {
        Ok(report) => Ok(report),
        Err(SolverError::TooLarge { .. }) => Ok(solve_heuristic(graph, tree, budget, seed)),
        Err(e) => Err(e),
    }
}

fn bench_one(path: &Path, gamma: f64, budget: Duration, seed: u64) -> BenchRow {
    let display = path.display().to_string();
    let (name, graph) = match load_graph(path) {
        Ok(pair) => pair,
        Err(e) => return BenchRow::failed(display, format!("{e:#}")),
    };
    let start = Instant::now();
    let tree = match gamma_clustering(&graph, gamma) {
        Ok(t) => t,
        Err(e) => return BenchRow::failed(name, e.to_string()),
    };
    let cluster_time = start.elapsed().as_secs_f64();
    let tsp = match solve_or_fallback(&graph, None, budget, seed) {
        Ok(r) => r,
        Err(e) => return BenchRow::failed(name, e.to_string()),
    };
    let ctsp = match solve_or_fallback(&graph, Some(&tree), budget, seed) {
        Ok(r) => r,
        Err(e) => return BenchRow::failed(name, e.to_string()),
    };
    BenchRow {
        name,
        clusters: Some(tree.len()),
        tsp: Some(tsp),
        ctsp: Some(ctsp),
        cluster_time,
        error: None,
    }
}

fn cmd_bench(args: BenchArgs) -> Result<i32> {
    let budget = check_common(&args.common)?;
    let jobs = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |p| p.get()));
    if jobs == 0 {
        bail!("--jobs must be positive");
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("building worker pool")?;
    let gamma = args.common.gamma;
    let seed = args.common.seed;
    let rows: Vec<BenchRow> = pool.install(|| {
        use rayon::prelude::*;
        args.instances
            .par_iter()
            .map(|path| bench_one(path, gamma, budget, seed))
            .collect()
    });
    let mut body = String::from(
        "name,clusters,tsp_cost,tsp_status,tsp_time,ctsp_cost,ctsp_status,ctsp_time,gap_ratio,cluster_time_ratio\n",
    );
    for row in &rows {
        body.push_str(&row.csv());
    }
    emit(&args.common.out, &body)?;
    let any_timeout = rows.iter().any(|r| {
        r.error.is_none()
            && (r.tsp.as_ref().unwrap().status != SolveStatus::Optimal
                || r.ctsp.as_ref().unwrap().status != SolveStatus::Optimal)
    });
    Ok(if any_timeout { 1 } else { 0 })
}

fn cmd_gen(args: GenArgs) -> Result<i32> {
    match args.family {
        GenFamily::LowerBound {
            n,
            alpha,
            beta,
            out,
        } => {
            let inst = gen_lower_bound(n, alpha, beta)?;
            let name = format!("lb-{n}");
            let comment = format!("worst-case family, n={n} alpha={alpha} beta={beta}");
            let path = out.unwrap_or_else(|| PathBuf::from(format!("{name}.tsp")));
            std::fs::write(&path, write_explicit(&name, &comment, &inst.graph))
                .with_context(|| format!("writing {}", path.display()))?;
            println!("{}", path.display());
        }
        GenFamily::Planted {
            sizes,
            gamma,
            seed,
            out,
        } => {
            let sizes: Vec<usize> = sizes
                .split(',')
                .map(|s| s.trim().parse().with_context(|| format!("bad size {s:?}")))
                .collect::<Result<_>>()?;
            if !(gamma > 1.0) {
                bail!("--gamma must exceed 1 (got {gamma})");
            }
            let (graph, tree) = gen_planted(&sizes, gamma, seed)?;
            let name = format!(
                "planted-{}-s{seed}",
                sizes
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join("-")
            );
            let comment = format!("planted clusters {sizes:?}, gamma={gamma}, seed={seed}");
            let path = out.unwrap_or_else(|| PathBuf::from(format!("{name}.tsp")));
            std::fs::write(&path, write_explicit(&name, &comment, &graph))
                .with_context(|| format!("writing {}", path.display()))?;
            let sidecar = path.with_extension("clusters.json");
            std::fs::write(&sidecar, serde_json::to_string_pretty(&tree)? + "\n")
                .with_context(|| format!("writing {}", sidecar.display()))?;
            println!("{}", path.display());
            println!("{}", sidecar.display());
        }
        GenFamily::Office { map, out } => {
            let text = std::fs::read_to_string(&map)
                .with_context(|| format!("reading {}", map.display()))?;
            let grid = GridOfficeMap::parse(&text)?;
            let graph = gen_office(&grid)?;
            let name = map
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "office".into());
            let comment = format!("grid shortest-path distances from {}", map.display());
            let path = out.unwrap_or_else(|| PathBuf::from(format!("{name}.tsp")));
            std::fs::write(&path, write_explicit(&name, &comment, &graph))
                .with_context(|| format!("writing {}", path.display()))?;
            println!("{}", path.display());
        }
    }
    Ok(0)
}

fn cmd_gap(args: GapArgs) -> Result<i32> {
    let budget = check_common(&args.common)?;
    let (name, graph) = load_graph(&args.instance)?;
    let report = match measure_gap(&graph, args.common.gamma, budget) {
        Ok(r) => r,
        Err(gamma_tsp::analysis::AnalysisError::TimedOut {
            c_star,
            c_prime_star,
        }) => {
            eprintln!(
                "{name}: solver budget exhausted (tsp {:?}, constrained {:?})",
                c_star, c_prime_star
            );
            return Ok(1);
        }
        Err(e) => return Err(e.into()),
    };
    let body = match args.common.format {
        Format::Json => {
            #[derive(Serialize)]
            struct GapArtifact<'a> {
                instance: &'a str,
                gamma: f64,
                #[serde(flatten)]
                report: &'a gamma_tsp::analysis::GapReport,
            }
            serde_json::to_string_pretty(&GapArtifact {
                instance: &name,
                gamma: args.common.gamma,
                report: &report,
            })? + "\n"
        }
        Format::Csv => format!(
            "name,clusters,c_star,c_prime_star,ratio,bound,within_bound\n{name},{},{},{},{},{},{}\n",
            report.cluster_count,
            report.c_star,
            report.c_prime_star,
            report.ratio,
            report.bound,
            report.within_bound
        ),
        Format::Text => format!(
            "{name}: ratio {:.6} (bound {:.6}, {} clusters, within bound: {})\n",
            report.ratio, report.bound, report.cluster_count, report.within_bound
        ),
    };
    emit(&args.common.out, &body)?;
    Ok(0)
}
