use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rwrs_cli::output::{csv_bytes, write_atomic};
use rwrs_cli::{emit_plot_data, CliError, ExperimentConfig, ExperimentKind};
use rwrs_core::estimators::TailEstimate;
use rwrs_core::graph::{run_walk, Graph};
use rwrs_core::local_time::build_ledger;
use rwrs_core::regeneration::detect_regenerations;
use rwrs_core::scenery::SceneryDistribution;
use rwrs_core::stats::compute_summary;
use rwrs_core::Assignment;

/// Random walk in random scenery experiments.
///
/// Exit codes: 0 success, 2 invalid configuration, 3 failure while running.
#[derive(Parser)]
#[command(name = "rwrs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run(RunArgs),
    /// Sample W_n over replicas and compare its law with N(0,1).
    Clt(RunArgs),
    /// Estimate P(W_n >= y) at each configured y.
    Tail(RunArgs),
    /// Check local-time and scenery bounds against Monte Carlo.
    Bounds(RunArgs),
    /// Regeneration epochs and escape frequency on a tree.
    Regen(RunArgs),
    /// Green's function at the origin of Z^d.
    Green(RunArgs),
    /// Principal eigenvalue of the walk killed outside a ball.
    Confine(RunArgs),
    /// Exact enumeration against plain and tilted Monte Carlo.
    Oracle(RunArgs),
    /// Validate a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Simulate one walk and print its local-time summary as JSON.
    Walk(WalkArgs),
    /// Project a tail CSV onto (y, log p, rate, CI) rows for plotting.
    Plotdata {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the replica count.
    #[arg(long)]
    replicas: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the worker thread count.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct WalkArgs {
    /// `tree` or `lattice`.
    #[arg(long)]
    graph: String,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scenery law as JSON, e.g. '{"kind":"rademacher"}'.
    #[arg(long)]
    distribution: Option<String>,
}

fn load(args: &RunArgs, kind: Option<ExperimentKind>) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(k) = kind {
        if cfg.experiment != k {
            return Err(CliError::Validation(format!(
                "config describes a {:?} experiment, not {k:?}",
                cfg.experiment
            )));
        }
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(r) = args.replicas {
        cfg.replicas = r;
    }
    if let Some(o) = &args.out {
        cfg.output = o.clone();
    }
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    Ok(cfg)
}

fn run_config(args: &RunArgs, kind: Option<ExperimentKind>) -> Result<(), CliError> {
    let cfg = load(args, kind)?;
    let files = rwrs_cli::run(&cfg)?;
    for f in files {
        println!("{}", cfg.output.join(f).display());
    }
    Ok(())
}

fn walk(args: &WalkArgs) -> Result<(), CliError> {
    let graph = match args.graph.as_str() {
        "tree" => Graph::tree(args.d),
        "lattice" => Graph::lattice(args.d),
        other => return Err(CliError::Validation(format!("unknown graph '{other}'"))),
    }
    .map_err(|e| CliError::Validation(e.to_string()))?;
    if args.n == 0 {
        return Err(CliError::Validation("n must be at least 1".into()));
    }
    let trace = run_walk(graph, args.n, args.seed)?;
    let ledger = build_ledger(&trace);
    let mut report = serde_json::json!({
        "graph": graph,
        "n": args.n,
        "seed": args.seed,
        "ledger": ledger.summary(),
        "end": trace.vertex(args.n),
    });
    if graph.is_tree() {
        let rec = detect_regenerations(trace.levels())?;
        report["regeneration"] = serde_json::to_value(&rec)?;
    }
    if let Some(text) = &args.distribution {
        let dist: SceneryDistribution = serde_json::from_str(text)
            .map_err(|e| CliError::Validation(format!("bad distribution: {e}")))?;
        dist.validate()
            .map_err(|e| CliError::Validation(e.to_string()))?;
        let s = Assignment::sample(&dist, &ledger, args.seed);
        report["summary"] = serde_json::to_value(compute_summary(&ledger, &s)?)?;
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn plotdata(input: &Path, out: &Path) -> Result<(), CliError> {
    let mut rdr = csv::Reader::from_path(input).map_err(|e| CliError::Validation(e.to_string()))?;
    let est: Vec<TailEstimate> = rdr.deserialize().collect::<Result<_, _>>()?;
    write_atomic(out, &csv_bytes(&emit_plot_data(&est)?)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run_config(a, None),
        Command::Clt(a) => run_config(a, Some(ExperimentKind::Clt)),
        Command::Tail(a) => run_config(a, Some(ExperimentKind::Tail)),
        Command::Bounds(a) => run_config(a, Some(ExperimentKind::Bounds)),
        Command::Regen(a) => run_config(a, Some(ExperimentKind::Regeneration)),
        Command::Green(a) => run_config(a, Some(ExperimentKind::Green)),
        Command::Confine(a) => run_config(a, Some(ExperimentKind::Confinement)),
        Command::Oracle(a) => run_config(a, Some(ExperimentKind::OracleCrosscheck)),
        Command::Validate { config } => ExperimentConfig::load(config).and_then(|c| c.validate()),
        Command::Walk(a) => walk(a),
        Command::Plotdata { input, out } => plotdata(input, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
