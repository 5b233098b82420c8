use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use quantile_spectra::{GaussianProcessSpec, KernelSpec, ModelSpec, QuantileGrid, ToyKind, DEFAULT_BURN_IN};

use qspec::config::parse_quantiles;
use qspec::output::{Metadata, TOOLKIT, VERSION};
use qspec::{
    analyze, oracle_records, simulate, write_outputs, write_series_csv, Bandwidth, InputSource, OmegaSelection,
    OutputFormat, RunConfig, Simulation, SimulationModel,
};

#[derive(Parser)]
#[command(name = "qspec", version, about = "Rank-based quantile cross-spectral analysis")]
struct Cli {
    /// Worker threads for the compute stages (0 uses all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate quantile spectra, coherency and confidence bands.
    Analyze(AnalyzeArgs),
    /// Simulate a QVAR, VAR(1) or toy process to CSV.
    Simulate(SimulateArgs),
    /// Closed-form quantile spectra of a Gaussian process.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct SourceArgs {
    /// Model specification: a JSON file, or inline JSON starting with '{'.
    #[arg(long, conflicts_with = "toy")]
    model: Option<String>,
    /// eps_square_now, eps_square_lag1 or independent_noise.
    #[arg(long)]
    toy: Option<ToyKind>,
    #[arg(long, default_value_t = 2048)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_BURN_IN)]
    burn_in: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// CSV file with a header row; omit to analyze a simulated series.
    #[arg(long, conflicts_with_all = ["model", "toy"])]
    input: Option<PathBuf>,
    /// Comma-separated column names (default: all).
    #[arg(long, value_delimiter = ',')]
    columns: Option<Vec<String>>,
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value = "0.05,0.25,0.5,0.75,0.95")]
    quantiles: String,
    #[arg(long, default_value = "epanechnikov")]
    kernel: KernelSpec,
    /// 'auto' (0.4 n^-1/4) or a value in (0, 1].
    #[arg(long, default_value = "auto")]
    bandwidth: Bandwidth,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// 'fourier' or a comma-separated list of frequencies in [0, pi].
    #[arg(long, default_value = "fourier")]
    omegas: OmegaSelection,
    /// Clip the real coherency band to [-1, 1].
    #[arg(long)]
    clip_coherency: bool,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    #[arg(long, default_value = "qspec-out")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Output CSV file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    /// Gaussian process: JSON file or inline JSON, e.g. {"type":"white_noise","rho":0.6}.
    #[arg(long)]
    process: String,
    /// Sample size defining the Fourier grid.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "0.05,0.25,0.5,0.75,0.95")]
    quantiles: String,
    #[arg(long, default_value = "fourier")]
    omegas: OmegaSelection,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    #[arg(long, default_value = "qspec-oracle")]
    out: PathBuf,
}

fn read_json_arg(arg: &str) -> anyhow::Result<String> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        std::fs::read_to_string(Path::new(arg)).with_context(|| format!("cannot read {arg}"))
    }
}

fn simulation(source: &SourceArgs) -> anyhow::Result<Simulation> {
    let model = match (&source.model, source.toy) {
        (Some(spec), None) => {
            let text = read_json_arg(spec)?;
            let parsed: ModelSpec = serde_json::from_str(&text).context("invalid model specification")?;
            SimulationModel::Model(parsed)
        }
        (None, Some(kind)) => SimulationModel::Toy(kind),
        _ => bail!("give exactly one of --model or --toy"),
    };
    Ok(Simulation {
        model,
        n: source.n,
        burn_in: source.burn_in,
        seed: source.seed,
    })
}

fn run_analyze(args: AnalyzeArgs) -> anyhow::Result<()> {
    let input = match args.input {
        Some(path) => InputSource::Csv {
            path,
            columns: args.columns,
        },
        None => InputSource::Simulated(simulation(&args.source)?),
    };
    let config = RunConfig {
        input,
        quantiles: parse_quantiles(&args.quantiles)?,
        kernel: args.kernel,
        bandwidth: args.bandwidth,
        alpha: args.alpha,
        omegas: args.omegas,
        clip_coherency: args.clip_coherency,
        out: args.out,
        format: args.format,
    };
    for path in analyze(&config)? {
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn run_simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let sim = simulation(&args.source)?;
    let x = simulate(&sim).context("simulation")?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    write_series_csv(&x, &args.out).with_context(|| format!("cannot write {}", args.out.display()))?;
    log::info!("wrote {}", args.out.display());
    Ok(())
}

fn run_oracle(args: OracleArgs) -> anyhow::Result<()> {
    let process: GaussianProcessSpec =
        serde_json::from_str(&read_json_arg(&args.process)?).context("invalid process specification")?;
    let levels = QuantileGrid::new(parse_quantiles(&args.quantiles)?).context("quantile grid")?;
    if args.n < 2 {
        bail!("--n must be at least 2");
    }
    let selected = args.omegas.indices(args.n)?;
    let omegas: Vec<f64> = selected
        .iter()
        .map(|&s| quantile_spectra::grid::fourier_frequency(s, args.n))
        .collect();
    let records = oracle_records(&process, &levels, &omegas).context("oracle")?;
    let d = records.iter().map(|r| r.j1).max().unwrap_or(0);
    let meta = Metadata {
        toolkit: TOOLKIT.into(),
        version: VERSION.into(),
        command: "oracle".into(),
        n: args.n,
        d,
        columns: (1..=d).map(|j| format!("x{j}")).collect(),
        quantiles: levels.levels().to_vec(),
        kernel: None,
        bandwidth: None,
        alpha: None,
        seed: None,
        fourier_indices: selected,
        normalizers: Vec::new(),
        format: args.format,
    };
    write_outputs(&records, args.format, &args.out, &meta)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match cli.command {
        Command::Analyze(args) => run_analyze(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Oracle(args) => run_oracle(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
