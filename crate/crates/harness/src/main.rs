// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod experiments;
mod render;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::Params;
use error::{HarnessError, Result};
use experiments::Report;
use render::{PlotKind, PlotSpec};

/// Environment variable naming the default output directory.
const OUT_DIR_VAR: &str = "SPECTRAL_EDGE_OUT";

#[derive(Parser)]
#[command(
    name = "spectral-edge",
    version,
    about = "Spectral-edge experiments for non-Hermitian random matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo spectral radius against the exact Kostlan law.
    RadiusMc(RunArgs),
    /// Both sides of Girko's formula for one matrix.
    GirkoCheck(RunArgs),
    /// Exact radius law on a Gumbel grid.
    Kostlan(RunArgs),
    /// Rescaled one-point function at the edge.
    Kernel(RunArgs),
    /// Dyson-equation density profile, gap or cusp scan.
    MdeScan(RunArgs),
    /// Lower tail of the smallest singular value outside the disk.
    Tail(RunArgs),
    /// Tail and trace correlations at two shifts.
    DbmDecorrelation(RunArgs),
    /// Distance between matrix-driven and independently driven DBMs.
    Coupling(RunArgs),
    /// Exact mean and variance of radial linear statistics.
    Linstat(RunArgs),
    /// Plot a CSV produced by one of the experiments.
    Render(RenderArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` configuration file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(short, long)]
    n: Option<usize>,
    /// ginibre, bernoulli or disk.
    #[arg(long)]
    ensemble: Option<String>,
    /// CSV path; defaults to `<experiment>.csv` in $SPECTRAL_EDGE_OUT or the working directory.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Any other parameter, as `key=value`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Histogram,
    Cdf,
    Loglog,
}

#[derive(Args)]
struct RenderArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value = "cdf")]
    kind: KindArg,
    /// Column on the horizontal axis.
    #[arg(long)]
    x: String,
    /// Column on the vertical axis (loglog only).
    #[arg(long)]
    y: Option<String>,
    #[arg(long, default_value_t = 40)]
    bins: usize,
    /// Overlay the Kostlan radius law for this n (cdf only).
    #[arg(long)]
    kostlan_n: Option<usize>,
    /// SVG path; defaults to the input path with an `.svg` extension.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

impl RunArgs {
    fn params(&self) -> Result<Params> {
        let mut p = match &self.config {
            Some(path) => Params::load(path)?,
            None => Params::default(),
        };
        let flags = [
            ("seed", self.seed.map(|v| v.to_string())),
            ("trials", self.trials.map(|v| v.to_string())),
            ("jobs", self.jobs.map(|v| v.to_string())),
            ("n", self.n.map(|v| v.to_string())),
            ("ensemble", self.ensemble.clone()),
            ("output", self.output.as_ref().map(|v| v.display().to_string())),
        ];
        for pair in &self.set {
            p.set_pair(pair)?;
        }
        for (k, v) in flags {
            if let Some(v) = v {
                p.set(k, v);
            }
        }
        Ok(p)
    }
}

fn default_output(name: &str) -> PathBuf {
    let dir = std::env::var_os(OUT_DIR_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    dir.join(format!("{name}.csv"))
}

fn run_experiment(name: &str, args: &RunArgs, run: fn(&Params) -> Result<Report>) -> Result<ExitCode> {
    let params = args.params()?;
    let output = params.get::<PathBuf>("output")?.unwrap_or_else(|| default_output(name));
    if let Some(jobs) = params.get::<usize>("jobs")? {
        if jobs == 0 {
            return Err(HarnessError::usage("jobs must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| HarnessError::usage(format!("thread pool: {e}")))?;
    }
    let report = run(&params)?;
    report.table.write_csv(&output)?;
    println!("{name}: {} rows -> {}", report.table.rows.len(), output.display());
    for line in &report.summary {
        println!("  {line}");
    }
    for (trial, msg) in report.failures.iter().take(10) {
        eprintln!("trial {trial} failed: {msg}");
    }
    if report.degraded() {
        eprintln!(
            "{} of {} trials failed (limit {:.0}%); partial results kept",
            report.failures.len(),
            report.trials,
            100.0 * experiments::MAX_FAILURE_RATE
        );
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn run_render(args: &RenderArgs) -> Result<ExitCode> {
    let spec = PlotSpec {
        kind: match args.kind {
            KindArg::Histogram => PlotKind::Histogram,
            KindArg::Cdf => PlotKind::Cdf,
            KindArg::Loglog => PlotKind::LogLog,
        },
        x: args.x.clone(),
        y: args.y.clone(),
        bins: args.bins,
        kostlan_n: args.kostlan_n,
        output: args.output.clone().unwrap_or_else(|| args.input.with_extension("svg")),
    };
    render::render(&args.input, &spec)?;
    println!("render: {}", spec.output.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::RadiusMc(a) => run_experiment("radius-mc", a, experiments::radius_mc),
        Command::GirkoCheck(a) => run_experiment("girko-check", a, experiments::girko_check),
        Command::Kostlan(a) => run_experiment("kostlan", a, experiments::kostlan),
        Command::Kernel(a) => run_experiment("kernel", a, experiments::kernel),
        Command::MdeScan(a) => run_experiment("mde-scan", a, experiments::mde_scan),
        Command::Tail(a) => run_experiment("tail", a, experiments::tail),
        Command::DbmDecorrelation(a) => run_experiment("dbm-decorrelation", a, experiments::dbm_decorrelation),
        Command::Coupling(a) => run_experiment("coupling", a, experiments::coupling),
        Command::Linstat(a) => run_experiment("linstat", a, experiments::linstat),
        Command::Render(a) => run_render(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
