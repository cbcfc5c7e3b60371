use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use topotraffic::io::{self, EdgeListHeader};
use topotraffic::load::{compute_load_with, load_stats, EndpointConvention};
use topotraffic::netgen::{gamma_for_alpha, generate_static_model, giant_component, GenParams, Graph};
use topotraffic::plan::{parse_f64_list, parse_plan, parse_seed_list, ExperimentPlan, PlanOverrides};
use topotraffic::sim::{self, SimConfig, TrafficSpec};
use topotraffic::sweep::{self, emit_csv, fmt_f64, gamma_label};
use topotraffic::traffic::{
    calibrate_d, default_block_sizes, estimate_rate, hurst_aggregated_variance, ErramilliParams, ErramilliSource,
    DEFAULT_BURN_IN,
};

// Aliases keep clap from treating the parsed lists as repeated flags.
type F64List = Vec<f64>;
type SeedList = Vec<u64>;

#[derive(Parser)]
#[command(name = "topotraffic", version, about = "Static-model topologies, shortest-path load and LRD packet transport")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a static-model graph and write it as an edge list.
    Gen(GenArgs),
    /// Compute per-vertex shortest-path load of an edge list.
    Load(LoadArgs),
    /// Emit an On/Off bit trace, calibrate the threshold, or estimate H.
    Traffic(TrafficArgs),
    /// Run one packet-transport simulation.
    Run(RunArgs),
    /// Run the figure sweeps and write CSV datasets.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 500)]
    n: usize,
    /// Mean degree; M = floor(avg_degree * n / 2).
    #[arg(long, default_value_t = 3.0, conflicts_with = "edges")]
    avg_degree: f64,
    /// Exact edge count instead of --avg-degree.
    #[arg(long)]
    edges: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep only the giant component.
    #[arg(long)]
    giant: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LoadArgs {
    /// Edge list to analyze.
    input: PathBuf,
    /// Count pair endpoints as loaded too.
    #[arg(long)]
    inclusive: bool,
    /// Restrict to the giant component first.
    #[arg(long)]
    giant: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceFormat {
    Rle,
    Raw,
}

#[derive(Args)]
struct TrafficArgs {
    #[arg(long, default_value_t = 2.0)]
    m1: f64,
    #[arg(long, default_value_t = 2.0)]
    m2: f64,
    /// Threshold d; ignored when --lambda is given.
    #[arg(long, default_value_t = 0.5)]
    d: f64,
    /// Calibrate d to this On rate first.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    bits: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = TraceFormat::Rle)]
    format: TraceFormat,
    /// Print the aggregated-variance Hurst estimate instead of a trace.
    #[arg(long)]
    hurst: bool,
    /// Print the estimated On rate instead of a trace.
    #[arg(long)]
    rate: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Edge list to simulate on (giant component is taken); generated when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 3.0)]
    avg_degree: f64,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.16)]
    rho: f64,
    #[arg(long, default_value_t = 2.0)]
    m1: f64,
    #[arg(long, default_value_t = 2.0)]
    m2: f64,
    /// Target per-host generation rate; d is calibrated to it.
    #[arg(long, default_value_t = 0.05)]
    lambda: f64,
    /// Use this threshold directly instead of calibrating.
    #[arg(long)]
    d: Option<f64>,
    #[arg(long, default_value_t = sim::DEFAULT_WARMUP_STEPS)]
    warmup: u64,
    #[arg(long, default_value_t = sim::DEFAULT_MEASURE_STEPS)]
    steps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Metrics CSV (one header and one row).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the per-step `step,total_queued` series here.
    #[arg(long)]
    queue_series: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Figure {
    Load,
    Traffic,
    All,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    avg_degree: Option<f64>,
    #[arg(long, value_parser = parse_f64_list)]
    alphas: Option<F64List>,
    #[arg(long, value_parser = parse_f64_list)]
    lambdas: Option<F64List>,
    /// Comma-separated seeds, `a..b` ranges allowed.
    #[arg(long, value_parser = parse_seed_list)]
    seeds: Option<SeedList>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    m1: Option<f64>,
    #[arg(long)]
    m2: Option<f64>,
    #[arg(long)]
    warmup: Option<u64>,
    #[arg(long)]
    steps: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-run queue-length series.
    #[arg(long)]
    queue_series: bool,
    #[arg(long, value_enum, default_value_t = Figure::All)]
    figure: Figure,
}

/// Exit code 1: bad input; exit code 2: failure while running.
enum Failure {
    Invalid(String),
    Runtime(String),
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure::Invalid(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => io::write_file(path, text).map_err(runtime),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_graph(path: &Path) -> Result<Graph, Failure> {
    let text = io::read_file(path).map_err(invalid)?;
    io::parse_edge_list(&text).map(|(g, _)| g).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn cmd_gen(a: GenArgs) -> Result<(), Failure> {
    let params = match a.edges {
        Some(m) => GenParams::new(a.n, m, a.alpha, a.seed),
        None => GenParams::with_avg_degree(a.n, a.avg_degree, a.alpha, a.seed),
    }
    .map_err(invalid)?;
    let mut g = generate_static_model(&params).map_err(runtime)?;
    if a.giant {
        g = giant_component(&g).0;
    }
    write_output(a.out.as_deref(), &io::format_edge_list(&g, &EdgeListHeader::from_params(&params)))
}

fn cmd_load(a: LoadArgs) -> Result<(), Failure> {
    let mut g = read_graph(&a.input)?;
    if a.giant {
        g = giant_component(&g).0;
    }
    let convention = if a.inclusive { EndpointConvention::Inclusive } else { EndpointConvention::Exclusive };
    let lv = compute_load_with(&g, convention);
    let stats = load_stats(&lv).ok();
    write_output(a.out.as_deref(), &io::format_load_csv(&lv, stats.as_ref()))
}

fn cmd_traffic(a: TrafficArgs) -> Result<(), Failure> {
    let d = match a.lambda {
        Some(lambda) => {
            let d = calibrate_d(a.m1, a.m2, lambda, a.tol, a.seed).map_err(runtime)?;
            eprintln!("calibrated d = {d} for lambda = {lambda}");
            d
        }
        None => a.d,
    };
    let params = ErramilliParams::new(a.m1, a.m2, d).map_err(invalid)?;
    if a.rate {
        let rate = estimate_rate(&params, DEFAULT_BURN_IN, a.bits, a.seed);
        return write_output(a.out.as_deref(), &format!("d,rate\n{},{}\n", fmt_f64(d), fmt_f64(rate)));
    }
    let bits = ErramilliSource::new(params, a.seed).bits(a.bits);
    if a.hurst {
        let h = hurst_aggregated_variance(&bits, &default_block_sizes(bits.len())).map_err(invalid)?;
        return write_output(a.out.as_deref(), &format!("{}\n", fmt_f64(h)));
    }
    let text = match a.format {
        TraceFormat::Rle => io::format_bits_rle(&bits),
        TraceFormat::Raw => io::format_bits_raw(&bits),
    };
    write_output(a.out.as_deref(), &text)
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    let graph = match &a.input {
        Some(path) => read_graph(path)?,
        None => {
            let params = GenParams::with_avg_degree(a.n, a.avg_degree, a.alpha, a.seed).map_err(invalid)?;
            generate_static_model(&params).map_err(runtime)?
        }
    };
    let graph = giant_component(&graph).0;
    if !(a.lambda > 0.0 && a.lambda < 1.0) {
        return Err(invalid(format!("lambda = {} outside (0, 1)", a.lambda)));
    }
    let traffic = match a.d {
        Some(d) => TrafficSpec::Map(ErramilliParams::new(a.m1, a.m2, d).map_err(invalid)?),
        None => {
            ErramilliParams::new(a.m1, a.m2, 0.5).map_err(invalid)?;
            TrafficSpec::TargetRate { m1: a.m1, m2: a.m2, lambda: a.lambda, tol: 0.05 * a.lambda }
        }
    };
    let config = SimConfig {
        graph,
        host_density: a.rho,
        traffic,
        warmup_steps: a.warmup,
        measure_steps: a.steps,
        seed: a.seed,
        record_queue_series: a.queue_series.is_some(),
    };
    let metrics = sim::run(&config).map_err(|e| match e {
        sim::SimError::InvalidConfig(_) | sim::SimError::TooFewHosts { .. } => invalid(e),
        other => runtime(other),
    })?;
    if let Some(path) = &a.queue_series {
        io::write_file(path, &io::format_queue_series(&metrics.queue_length_timeseries)).map_err(runtime)?;
    }
    let alpha = if a.input.is_some() { f64::NAN } else { a.alpha };
    let mut text = String::from("alpha,gamma,lambda,seed,generated,delivered,mean_delivery_time,in_flight,max_queue\n");
    let gamma = if alpha.is_nan() { "NaN".to_string() } else { fmt_f64(gamma_for_alpha(alpha)) };
    let _ = writeln!(
        text,
        "{},{gamma},{},{},{},{},{},{},{}",
        fmt_f64(alpha),
        fmt_f64(a.lambda),
        a.seed,
        metrics.generated,
        metrics.delivered,
        fmt_f64(metrics.mean_delivery_time),
        metrics.in_flight_at_end,
        metrics.max_queue
    );
    write_output(a.out.as_deref(), &text)
}

fn cmd_sweep(a: SweepArgs) -> Result<(), Failure> {
    let config_text = match &a.config {
        Some(path) => io::read_file(path).map_err(invalid)?,
        None => String::new(),
    };
    let overrides = PlanOverrides {
        n_vertices: a.n,
        avg_degree: a.avg_degree,
        alphas: a.alphas,
        lambdas: a.lambdas,
        seeds: a.seeds,
        rho: a.rho,
        m1: a.m1,
        m2: a.m2,
        warmup: a.warmup,
        steps: a.steps,
        out: a.out,
        queue_series: a.queue_series,
    };
    let plan = parse_plan(&config_text, &overrides).map_err(invalid)?;
    let out_dir = plan.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir).map_err(|e| runtime(format!("{}: {e}", out_dir.display())))?;
    let mut failed = false;

    if a.figure != Figure::Traffic {
        let out = sweep::run_fig12_sweep(&plan);
        failed |= report_failures(&out.failures);
        write_table(&out.rows, &out_dir.join("fig12_load.csv"))?;
        write_table(&out.summary, &out_dir.join("fig12_load_mean.csv"))?;
    }
    if a.figure != Figure::Load {
        if plan.lambdas.is_empty() {
            return Err(invalid("the traffic sweep needs at least one lambda"));
        }
        failed |= run_traffic_sweep(&plan, &out_dir)?;
    }
    if failed {
        Err(Failure::Runtime("some sweep cells failed (see above)".into()))
    } else {
        Ok(())
    }
}

fn run_traffic_sweep(plan: &ExperimentPlan, out_dir: &Path) -> Result<bool, Failure> {
    let out = sweep::run_fig34_sweep(plan);
    for (lambda, d) in &out.thresholds {
        match d {
            Some(d) => eprintln!("lambda = {lambda}: d = {d}"),
            None => eprintln!("lambda = {lambda}: calibration failed"),
        }
    }
    let failed = report_failures(&out.failures);
    write_table(&out.rows, &out_dir.join("fig34_traffic.csv"))?;
    write_table(&out.summary, &out_dir.join("fig34_traffic_mean.csv"))?;
    for (alpha, lambda, seed, series) in &out.queue_series {
        let name = format!("queue_gamma{}_lambda{}_seed{seed}.csv", gamma_label(*alpha), fmt_f64(*lambda));
        io::write_file(&out_dir.join(name), &io::format_queue_series(series)).map_err(runtime)?;
    }
    Ok(failed)
}

fn write_table<R: sweep::CsvRecord>(rows: &[R], path: &Path) -> Result<(), Failure> {
    emit_csv(rows, path).map_err(runtime)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn report_failures(failures: &[sweep::SweepFailure]) -> bool {
    for f in failures {
        eprintln!("cell failed: {f}");
    }
    !failures.is_empty()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Load(a) => cmd_load(a),
        Command::Traffic(a) => cmd_traffic(a),
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
