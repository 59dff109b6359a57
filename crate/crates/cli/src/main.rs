use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use flowcomp_core::experiment::{self, ExperimentConfig, Scoring, SweepAxis};
use flowcomp_core::flow::{build_network, graph_for_mode, max_flow};
use flowcomp_core::metrics::{evaluate, MetricsReport};
use flowcomp_core::workload::{self, WorkloadSpec};
use flowcomp_core::{compose, Allocation, CompositionWindow, MetricsConfig, Mode};

#[derive(Parser)]
#[command(name = "flowcomp", version, about = "Flow-based composition of crowdsourced energy services")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep and write aggregated metrics as CSV.
    Run(RunArgs),
    /// Compose a single instance loaded from CSV files.
    Compose(ComposeArgs),
    /// Generate a synthetic population as services.csv and requests.csv.
    Generate(GenerateArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML or JSON experiment config; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Axis to sweep: requests or services.
    #[arg(long)]
    sweep: Option<SweepAxis>,
    /// Comma-separated, strictly increasing sweep points.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<usize>>,
    /// Size of the population that is not swept.
    #[arg(long)]
    fixed: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of baseline,priority,flow,partial.
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<Mode>>,
    /// Satisfaction threshold in (0, 1].
    #[arg(long)]
    sf: Option<f64>,
    /// Score all modes over one shared serviceable set (`shared`) or each
    /// over its own graph (`per_mode`).
    #[arg(long)]
    scoring: Option<Scoring>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Verify feasibility and mode dominance on every instance; abort on violation.
    #[arg(long)]
    check: bool,
    /// Worker threads for repetitions (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(clap::Args)]
struct ComposeArgs {
    #[arg(long)]
    services: PathBuf,
    #[arg(long)]
    requests: PathBuf,
    #[arg(long, default_value = "flow")]
    mode: Mode,
    /// Composition window as `st,et` in minutes.
    #[arg(long, value_parser = parse_window)]
    window: CompositionWindow,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = MetricsConfig::DEFAULT_SF)]
    sf: f64,
    /// Write the composability graph as `eid,rid,weight` lines.
    #[arg(long)]
    dump_graph: Option<PathBuf>,
    /// Write the solved network as `from,to,flow,capacity` lines (flow modes only).
    #[arg(long)]
    dump_flow: Option<PathBuf>,
}

#[derive(clap::Args)]
struct GenerateArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 20)]
    providers: usize,
    #[arg(long, default_value_t = 50)]
    requests: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = parse_window)]
    window: Option<CompositionWindow>,
}

fn parse_window(s: &str) -> Result<CompositionWindow, String> {
    let (st, et) = s.split_once(',').ok_or("expected `st,et`")?;
    let st: i64 = st.trim().parse().map_err(|e| format!("bad start: {e}"))?;
    let et: i64 = et.trim().parse().map_err(|e| format!("bad end: {e}"))?;
    CompositionWindow::from_bounds(st, et).map_err(|e| e.to_string())
}

fn run_sweep(args: RunArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::for_axis(args.sweep.unwrap_or(SweepAxis::Requests)),
    };
    if let Some(axis) = args.sweep {
        config.sweep_axis = axis;
    }
    if let Some(v) = args.values {
        config.sweep_values = v;
    }
    if let Some(n) = args.fixed {
        config.fixed_count = n;
    }
    if let Some(n) = args.reps {
        config.repetitions = n;
    }
    if let Some(s) = args.seed {
        config.base_seed = s;
    }
    if let Some(m) = args.modes {
        config.modes = m;
    }
    if let Some(sf) = args.sf {
        config.metrics = MetricsConfig::new(sf)?;
    }
    if let Some(scoring) = args.scoring {
        config.scoring = scoring;
    }
    if args.check {
        config.check = true;
    }
    let out = args
        .out
        .or_else(|| config.output_path.clone())
        .unwrap_or_else(|| PathBuf::from("results.csv"));
    config.validate()?;

    let table = match args.threads {
        Some(0) => bail!("--threads must be at least 1"),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building thread pool")?
            .install(|| experiment::run_to_file(&config, &out))?,
        None => experiment::run_to_file(&config, &out)?,
    };
    println!(
        "wrote {} rows to {} (timing in {})",
        table.rows.len(),
        out.display(),
        experiment::timing_path(&out).display()
    );
    Ok(())
}

#[derive(Serialize)]
struct ComposeOutput<'a> {
    mode: Mode,
    window: CompositionWindow,
    total_allocated: f64,
    elapsed_ms: f64,
    allocations: &'a [Allocation],
    metrics: MetricsReport,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run_compose(args: ComposeArgs) -> Result<()> {
    let cfg = MetricsConfig::new(args.sf)?;
    let services = workload::load_services(&args.services)?;
    let requests = workload::load_requests(&args.requests)?;
    let result = compose(&services, &requests, args.window, args.mode)?;
    let report = evaluate(&result, &cfg)?;

    if let Some(path) = &args.dump_graph {
        write_text(path, &graph_for_mode(&services, &requests, args.window, args.mode).edge_list_text())?;
    }
    if let Some(path) = &args.dump_flow {
        if !matches!(args.mode, Mode::Flow | Mode::PartialFlow) {
            bail!("--dump-flow needs mode flow or partial");
        }
        let net = build_network(graph_for_mode(&services, &requests, args.window, args.mode));
        write_text(path, &net.flow_dump_text(&max_flow(&net).flow))?;
    }

    let out = ComposeOutput {
        mode: result.mode(),
        window: result.window(),
        total_allocated: result.total_allocated(),
        elapsed_ms: result.elapsed().as_secs_f64() * 1e3,
        allocations: result.allocations(),
        metrics: report,
    };
    let json = serde_json::to_string_pretty(&out)?;
    write_text(&args.out, &(json + "\n"))?;
    println!(
        "{}: {} allocations, {:.3} mAh total, EU {:.4}, FR {:.4}",
        result.mode(),
        result.allocations().len(),
        result.total_allocated(),
        out.metrics.eu,
        out.metrics.fr
    );
    Ok(())
}

fn run_generate(args: GenerateArgs) -> Result<()> {
    let mut spec = WorkloadSpec {
        n_providers: args.providers,
        n_requests: args.requests,
        seed: args.seed,
        ..WorkloadSpec::default()
    };
    if let Some(w) = args.window {
        spec.window = w;
    }
    let pop = workload::generate(&spec)?;
    workload::save_csv(&args.out_dir, &pop.services, &pop.requests)?;
    println!(
        "wrote {} services and {} requests to {}",
        pop.services.len(),
        pop.requests.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run_sweep(args),
        Command::Compose(args) => run_compose(args),
        Command::Generate(args) => run_generate(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
