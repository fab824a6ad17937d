use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use impact_select::bench::{
    read_json, run_suite, select_on_dataset, with_jobs, write_json, write_table_csv,
    BenchmarkConfig, SelectionReport,
};
use impact_select::data::{load_dataset_csv, read_csv_table, write_dataset_csv, Dataset, Grid};
use impact_select::order::OrderMethod;
use impact_select::processes::{
    gen_response, sample_paths, Model2Variant, OuParams, ProcessSpec, RegressionModelSpec,
};
use impact_select::selector::SelectionConstraints;
use impact_select::{derive_seed, Error, ErrorKind, Result};

#[derive(Parser)]
#[command(name = "impact-select", version, about = "Impact-point selection for functional linear regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate trajectories and responses and write them as CSV.
    Simulate(SimulateArgs),
    /// Select impact points on a CSV dataset and write a JSON report.
    Select(SelectArgs),
    /// Apply a selection report to new trajectories.
    Predict(PredictArgs),
    /// Run replicated experiments from a JSON config.
    Benchmark(BenchmarkArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProcessKind {
    Bm,
    Gbm,
    Ibm,
    Ou,
    Fbm,
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    process: ProcessKind,
    /// Hurst index, required for fbm.
    #[arg(long)]
    hurst: Option<f64>,
    /// Number of trajectories.
    #[arg(long)]
    n: usize,
    /// Number of equispaced grid points.
    #[arg(long, default_value_t = 100)]
    grid: usize,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
    model: u8,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 0.2)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Which third point model 2 uses (0.67 or 0.6).
    #[arg(long, value_enum, default_value_t = Model2Points::Equation)]
    model2_points: Model2Points,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model2Points {
    Equation,
    Tuple,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Kmeans,
    Threshold,
}

#[derive(clap::Args)]
struct SelectArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 10)]
    max_p: usize,
    /// Minimum separation between selected times; defaults to one grid step.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_enum, default_value_t = OrderArg::Kmeans)]
    order: OrderArg,
    /// Threshold fraction for `--order threshold`.
    #[arg(long, default_value_t = 0.01)]
    rho: f64,
    /// Absolute tolerance on residual variances; defaults to 1e-10 times the
    /// largest sample variance.
    #[arg(long)]
    denom_tol: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct PredictArgs {
    /// Selection report written by `select`.
    #[arg(long)]
    model: PathBuf,
    /// Trajectories CSV; a trailing Y column is optional.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct BenchmarkArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the replication count of every experiment.
    #[arg(long)]
    reps: Option<usize>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// JSON report path; the CSV table is written next to it.
    #[arg(long)]
    out: PathBuf,
}

fn process_spec(kind: ProcessKind, hurst: Option<f64>) -> Result<ProcessSpec> {
    if hurst.is_some() && !matches!(kind, ProcessKind::Fbm) {
        return Err(Error::InvalidArgument("--hurst only applies to fbm".into()));
    }
    Ok(match kind {
        ProcessKind::Bm => ProcessSpec::Bm,
        ProcessKind::Gbm => ProcessSpec::Gbm,
        ProcessKind::Ibm => ProcessSpec::Ibm,
        ProcessKind::Ou => ProcessSpec::Ou(OuParams::default()),
        ProcessKind::Fbm => {
            let h = hurst.ok_or_else(|| Error::InvalidArgument("fbm requires --hurst".into()))?;
            ProcessSpec::fbm(h)?
        }
    })
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let spec = process_spec(args.process, args.hurst)?;
    let model = match (args.model, args.model2_points) {
        (2, Model2Points::Tuple) => RegressionModelSpec::model2(args.sigma, Model2Variant::Tuple),
        (id, _) => RegressionModelSpec::by_id(id, args.sigma)?,
    };
    model.validate()?;
    if args.n < 1 {
        return Err(Error::InvalidArgument("--n must be >= 1".into()));
    }
    let grid = Grid::equispaced(args.grid)?;
    let paths = sample_paths(&spec, &grid, args.n, derive_seed(args.seed, 0))?;
    let responses = gen_response(&model, &paths, &grid, derive_seed(args.seed, 1))?;
    write_dataset_csv(&Dataset::new(grid, paths, responses)?, &args.out)
}

fn select(args: SelectArgs) -> Result<()> {
    let data = load_dataset_csv(&args.input)?;
    let mut constraints = SelectionConstraints::for_grid(data.grid()).with_max_p(args.max_p);
    if let Some(d) = args.delta {
        constraints.delta = d;
    }
    constraints.denom_tol = args.denom_tol;
    let order = match args.order {
        OrderArg::Kmeans => OrderMethod::Kmeans,
        OrderArg::Threshold => OrderMethod::Threshold,
    };
    let report = select_on_dataset(&data, &constraints, order, args.rho)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    write_json(&report, &args.out)
}

fn predict(args: PredictArgs) -> Result<()> {
    let report: SelectionReport = read_json(&args.model)?;
    let table = read_csv_table(&args.input, false)?;
    let predicted = report.predictor().predict(&table.grid, &table.trajectories)?;
    let mut out = match &table.responses {
        Some(_) => String::from("predicted,actual\n"),
        None => String::from("predicted\n"),
    };
    for (i, p) in predicted.iter().enumerate() {
        match &table.responses {
            Some(y) => out.push_str(&format!("{p},{}\n", y[i])),
            None => out.push_str(&format!("{p}\n")),
        }
    }
    std::fs::write(&args.out, out)?;
    Ok(())
}

fn table_path(out: &Path) -> PathBuf {
    out.with_extension("csv")
}

fn benchmark(args: BenchmarkArgs) -> Result<()> {
    let table = table_path(&args.out);
    if table == args.out {
        return Err(Error::InvalidArgument("--out must not end in .csv".into()));
    }
    let config: BenchmarkConfig = read_json(&args.config)?;
    let mut suite = config.into_suite();
    if let Some(reps) = args.reps {
        for e in &mut suite.experiments {
            e.reps = reps;
        }
    }
    let report = match args.jobs {
        Some(0) => return Err(Error::InvalidArgument("--jobs must be >= 1".into())),
        Some(j) => with_jobs(j, || run_suite(&suite))??,
        None => run_suite(&suite)?,
    };
    write_json(&report, &args.out)?;
    write_table_csv(&report, &table)
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Usage => 1,
        ErrorKind::Data => 2,
        ErrorKind::Numerical => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Select(a) => select(a),
        Command::Predict(a) => predict(a),
        Command::Benchmark(a) => benchmark(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
