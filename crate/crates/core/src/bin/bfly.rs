use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bfly::bench::{
    checkpoints, compute_truth, emit_csv, load_stream, run_experiment, write_truth_file,
    BenchError, ExperimentConfig, GroundTruth, InputSource,
};
use bfly::exact::{count_butterflies_exact, max_per_edge};
use bfly::graph::BipartiteAdjacency;
use bfly::ingest::{write_cache, SynthSpec};
use bfly::registry::{AlgorithmParams, Registry, WindowModel};

#[derive(Parser)]
#[command(
    name = "bfly",
    version,
    about = "Butterfly counting on bipartite edge streams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a stream through an algorithm and write checkpoint metrics as CSV.
    Run(RunArgs),
    /// Precompute exact ground truth for later `run --truth file:PATH`.
    Truth(TruthArgs),
    /// Preprocess an edge list into the binary stream cache.
    Cache(CacheArgs),
    /// Print exact statistics of a dataset.
    Count(InputArgs),
    /// List the registered algorithms.
    List,
}

#[derive(Args)]
struct InputArgs {
    /// Edge list (KONECT style, optionally gzipped) or binary cache.
    #[arg(long, conflicts_with = "synth", required_unless_present = "synth")]
    input: Option<PathBuf>,
    /// Synthetic stream: biclique:A,B | blocks:C,A,B,N | random:NL,NR,M
    #[arg(long)]
    synth: Option<SynthSpec>,
    /// Seed for the synthetic generator.
    #[arg(long, default_value_t = 0)]
    stream_seed: u64,
    /// Read timestamps from the fourth column of the edge list.
    #[arg(long)]
    timestamps: bool,
    /// Shuffle the stream with this seed before use.
    #[arg(long)]
    permute: Option<u64>,
}

impl InputArgs {
    fn source(&self) -> InputSource {
        match (&self.input, self.synth) {
            (Some(path), _) => InputSource::File {
                path: path.clone(),
                timestamps: self.timestamps,
            },
            (None, Some(spec)) => InputSource::Synth {
                spec,
                seed: self.stream_seed,
            },
            (None, None) => unreachable!("clap requires one input"),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    algo: String,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    reservoir: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    window: Option<u64>,
    /// Largest number of edges any queried time window may contain.
    #[arg(long)]
    nmax: Option<u64>,
    /// Fixed sampling probability.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long)]
    checkpoint_every: Option<u64>,
    /// inline | file:PATH | none
    #[arg(long, default_value = "inline")]
    truth: GroundTruth,
    #[arg(long)]
    out: PathBuf,
    /// Write zero elapsed times so the output depends only on the config.
    #[arg(long)]
    no_timing: bool,
    /// Report the largest per-edge butterfly count of the whole graph.
    #[arg(long)]
    report_hmax: bool,
}

#[derive(Args)]
struct TruthArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Count in a window over arrival indices.
    #[arg(long, conflicts_with = "time_window")]
    seq_window: Option<u64>,
    /// Count in a window over timestamps.
    #[arg(long)]
    time_window: Option<u64>,
    #[arg(long)]
    checkpoint_every: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CacheArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    out: PathBuf,
}

fn run(args: RunArgs) -> Result<(), BenchError> {
    let mut cfg = ExperimentConfig::new(args.algo, args.input.source());
    cfg.permute = args.input.permute;
    cfg.params = AlgorithmParams {
        reservoir: args.reservoir,
        gamma: args.gamma,
        window: args.window,
        max_window_edges: args.nmax,
        probability: args.p,
        seed: args.seed,
    };
    cfg.seed = args.seed;
    cfg.trials = args.trials;
    cfg.checkpoint_every = args.checkpoint_every;
    cfg.truth = args.truth;
    cfg.record_timing = !args.no_timing;
    cfg.report_max_per_edge = args.report_hmax;
    let report = run_experiment(&cfg, &Registry::with_builtins())?;
    emit_csv(&report.rows, Some(&report.summary), &args.out)?;
    let s = &report.summary;
    let fmt = |v: Option<f64>| v.map_or("NA".to_string(), |x| format!("{x:.4}"));
    eprintln!(
        "{}: {} edges x {} trials, MAPE {}%, final error {}%, {} edges/s",
        s.algorithm,
        s.stream_edges,
        s.trials,
        fmt(s.mape_pct),
        fmt(s.final_error_pct),
        s.throughput_eps
            .map_or("NA".to_string(), |x| format!("{x:.0}")),
    );
    Ok(())
}

fn truth(args: TruthArgs) -> Result<(), BenchError> {
    let stream = load_stream(&args.input.source(), args.input.permute)?;
    let (model, window) = match (args.seq_window, args.time_window) {
        (Some(w), _) => (WindowModel::Sequence, Some(w)),
        (_, Some(w)) => (WindowModel::Time, Some(w)),
        _ => (WindowModel::Infinite, None),
    };
    if args.checkpoint_every == Some(0) {
        return Err(BenchError::InvalidConfig(
            "checkpoint interval must be positive".into(),
        ));
    }
    let every = args
        .checkpoint_every
        .unwrap_or_else(|| (stream.len() as u64 / 100).max(1));
    let series = compute_truth(&stream, model, window, &checkpoints(stream.len(), every))?;
    write_truth_file(&series, &args.out)
}

fn cache(args: CacheArgs) -> Result<(), BenchError> {
    let stream = load_stream(&args.input.source(), args.input.permute)?;
    write_cache(&stream, &args.out)?;
    eprintln!("wrote {} edges to {}", stream.len(), args.out.display());
    Ok(())
}

fn count(args: InputArgs) -> Result<(), BenchError> {
    let stream = load_stream(&args.source(), args.permute)?;
    let g: BipartiteAdjacency = stream.plain_edges().collect();
    let total = count_butterflies_exact(&g);
    let edges = g.len() as f64;
    println!("edges={}", g.len());
    println!("left_vertices={}", g.left_count());
    println!("right_vertices={}", g.right_count());
    println!("duplicates_removed={}", stream.meta.duplicates_removed);
    println!("butterflies={total}");
    println!("butterfly_density={}", total.as_f64() / edges.powi(4));
    println!("max_per_edge={}", max_per_edge(&g));
    Ok(())
}

fn list() {
    let registry = Registry::with_builtins();
    for entry in registry.entries() {
        let flags = |ps: &[bfly::registry::Param]| {
            ps.iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let aliases = if entry.aliases.is_empty() {
            String::new()
        } else {
            format!(" (alias {})", entry.aliases.join(", "))
        };
        println!("{}{aliases}: {}", entry.name, entry.summary);
        if !entry.required.is_empty() {
            println!("    required: {}", flags(entry.required));
        }
        if !entry.optional.is_empty() {
            println!("    optional: {}", flags(entry.optional));
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Truth(a) => truth(a),
        Command::Cache(a) => cache(a),
        Command::Count(a) => count(a),
        Command::List => {
            list();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
