use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ndc_core::csvio::{self, DEFAULT_LABEL_COL};
use ndc_core::eval::{self, BenchConfig, Classifier, CvConfig};
use ndc_core::oracle::{self, BlockDistributionSpec, Fitter};
use ndc_core::simgen::{self, SimulationConfig};
use ndc_core::{fit_best, model_file, FitConfig, NdcError};

const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(name = "ndc", version, about = "Nearest disjoint centroid classification")]
struct Cli {
    /// Worker threads (default: available cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Root seed for every random stream.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a training and a test CSV drawn from a simulation preset.
    Simulate(SimulateArgs),
    /// Fit a model on a labeled CSV and save it as JSON.
    Fit(FitArgs),
    /// Append predicted classes to a CSV.
    Predict(PredictArgs),
    /// Compare classifiers on a simulation preset or by cross-validation.
    #[command(alias = "evaluate")]
    Benchmark(BenchmarkArgs),
    /// Exhaustive risk minimization, block-structure checks and the
    /// consistency experiment.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct PresetArgs {
    /// Simulation design, 1 to 4.
    #[arg(long)]
    sim: u8,
    /// Signal level: 0.3, 0.6 or 0.9.
    #[arg(long)]
    level: f64,
    /// Block width (designs 1-3): 3, 5 or 10.
    #[arg(long)]
    d: Option<usize>,
    /// Noise column count (design 4): 20, 40 or 80.
    #[arg(long)]
    r: Option<usize>,
}

impl PresetArgs {
    fn d_or_r(&self) -> Result<usize> {
        match (self.sim, self.d, self.r) {
            (4, None, Some(r)) => Ok(r),
            (4, _, _) => bail!("design 4 takes --r (and no --d)"),
            (_, Some(d), None) => Ok(d),
            _ => bail!("designs 1-3 take --d (and no --r)"),
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    preset: PresetArgs,
    /// Replicate index; each replicate is an independent draw.
    #[arg(long, default_value_t = 0)]
    rep: u64,
    #[arg(long, default_value = "train.csv")]
    out_train: PathBuf,
    #[arg(long, default_value = "test.csv")]
    out_test: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// Labeled training CSV.
    #[arg(long)]
    train: PathBuf,
    /// Class count; defaults to the largest label.
    #[arg(long)]
    k: Option<usize>,
    /// Weight on the distance to the unused-feature center; `inf` or
    /// omitted disables feature selection.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long, default_value_t = 100)]
    restarts: usize,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long, default_value = DEFAULT_LABEL_COL)]
    label_col: String,
    #[arg(long, default_value = "model.json")]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// CSV of samples; a label column, if present, is ignored.
    #[arg(long)]
    data: PathBuf,
    /// Output CSV (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = DEFAULT_LABEL_COL)]
    label_col: String,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Simulation design, 1 to 4 (with --level and --d or --r).
    #[arg(long, conflicts_with = "data")]
    sim: Option<u8>,
    #[arg(long)]
    level: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, default_value_t = 50)]
    reps: usize,
    /// Labeled CSV for a cross-validated comparison.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    folds: usize,
    #[arg(long, default_value = DEFAULT_LABEL_COL)]
    label_col: String,
    /// Comma-separated: ndc, ndcs, nc, nsc, knn.
    #[arg(long, default_value = "ndc,ndcs,nc,nsc,knn")]
    classifiers: String,
    #[arg(long, default_value_t = 100)]
    restarts: usize,
    #[arg(long, default_value_t = eval::TUNING_RESTARTS)]
    tuning_restarts: usize,
    /// Comma-separated lambda grid for NDC-S (`inf` allowed).
    #[arg(long)]
    lambda_grid: Option<String>,
    /// Report CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Labeled CSV for exhaustive empirical risk minimization.
    #[arg(long, conflicts_with_all = ["corollary", "consistency"])]
    data: Option<PathBuf>,
    #[arg(long, default_value = DEFAULT_LABEL_COL)]
    label_col: String,
    /// Check that the diagonal block partition is optimal.
    #[arg(long, conflicts_with = "consistency")]
    corollary: bool,
    /// Population-risk gap of fitted models over a grid of sample sizes.
    #[arg(long)]
    consistency: bool,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma1: f64,
    #[arg(long, default_value_t = 2.0)]
    sigma2: f64,
    #[arg(long, default_value_t = 0.0)]
    mu1: f64,
    #[arg(long, default_value_t = 0.0)]
    mu2: f64,
    /// Comma-separated sample sizes.
    #[arg(long, default_value = "50,200,2000")]
    n_grid: String,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 100)]
    restarts: usize,
    /// Fit by exhaustive search instead of restarted alternation.
    #[arg(long)]
    brute_force: bool,
    /// Output path for the consistency table (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_lambda(text: &str) -> Result<f64> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
        return Ok(f64::INFINITY);
    }
    let v: f64 = t.parse().with_context(|| format!("`{t}` is not a number or `inf`"))?;
    if !(v > 0.0) {
        bail!("lambda must be positive, got {v}");
    }
    Ok(v)
}

fn parse_list<T>(text: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    text.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse(s.trim())).collect()
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn simulate(args: &SimulateArgs, seed: u64) -> Result<()> {
    let cfg = SimulationConfig {
        seed,
        ..simgen::preset(args.preset.sim, args.preset.level, args.preset.d_or_r()?)?
    };
    let (train, test) = simgen::generate_pair(&cfg, args.rep)?;
    csvio::write_labeled(output(Some(&args.out_train))?, &train)?;
    csvio::write_labeled(output(Some(&args.out_test))?, &test)?;
    println!(
        "wrote {} and {} ({} rows, {} features each)",
        args.out_train.display(),
        args.out_test.display(),
        train.n(),
        train.p()
    );
    Ok(())
}

fn fit(args: &FitArgs, seed: u64) -> Result<()> {
    let ds = csvio::read_labeled_path(&args.train, &args.label_col, args.k)?;
    let lambda = args.lambda.as_deref().map(parse_lambda).transpose()?.unwrap_or(f64::INFINITY);
    let cfg = FitConfig {
        restarts: args.restarts,
        max_iters: args.max_iters,
        lambda,
        seed,
        ..FitConfig::default()
    };
    let res = fit_best(&ds, &cfg)?;
    model_file::save(&res.model, &args.out)?;
    println!("training error: {}", res.training_error);
    println!("selected features: {} of {}", res.model.selected_feature_count(), ds.p());
    println!(
        "chosen restart: {} ({} of {} restarts failed)",
        res.restart + 1,
        res.failed_restarts,
        cfg.restarts
    );
    Ok(())
}

fn predict(args: &PredictArgs) -> Result<()> {
    let model = model_file::load(&args.model)?;
    let table = csvio::read_features(File::open(&args.data)?, &args.label_col)?;
    if table.features.n_cols() != model.p() {
        return Err(NdcError::DimensionMismatch {
            expected: model.p(),
            got: table.features.n_cols(),
        }
        .into());
    }
    let predicted = table
        .features
        .rows()
        .map(|x| model.predict(x))
        .collect::<ndc_core::Result<Vec<_>>>()?;
    let mut out = output(args.out.as_deref())?;
    csvio::write_predictions(&mut out, &table, &predicted)?;
    out.flush()?;
    Ok(())
}

fn benchmark(args: &BenchmarkArgs, seed: u64) -> Result<()> {
    let classifiers = Classifier::parse_list(&args.classifiers)?;
    let mut cfg = BenchConfig {
        restarts: args.restarts,
        tuning_restarts: args.tuning_restarts,
        ..BenchConfig::default()
    };
    if let Some(grid) = &args.lambda_grid {
        cfg.lambda_grid = parse_list(grid, parse_lambda)?;
        if cfg.lambda_grid.is_empty() {
            bail!("empty lambda grid");
        }
    }
    let report = match (&args.data, args.sim) {
        (Some(path), None) => {
            let ds = csvio::read_labeled_path(path, &args.label_col, None)?;
            let cv = CvConfig {
                folds: args.folds,
                seed,
                ..CvConfig::default()
            };
            eval::run_cv_benchmark(&ds, &classifiers, &cv, &cfg)?
        }
        (None, Some(sim)) => {
            let level = args.level.ok_or_else(|| anyhow!("--sim needs --level"))?;
            let preset = PresetArgs {
                sim,
                level,
                d: args.d,
                r: args.r,
            };
            eval::run_simulation_benchmark(sim, level, preset.d_or_r()?, args.reps, &classifiers, seed, &cfg)?
        }
        _ => bail!("give either --sim or --data"),
    };
    print!("{}", report.to_table());
    if let Some(path) = &args.out {
        std::fs::write(path, report.to_csv()?).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn format_partition(part: &ndc_core::FeaturePartition) -> String {
    part.class_groups()
        .iter()
        .map(|g| {
            let members: Vec<String> = g.iter().map(|i| (i + 1).to_string()).collect();
            format!("{{{}}}", members.join(","))
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn run_oracle(args: &OracleArgs, seed: u64) -> Result<()> {
    if let Some(path) = &args.data {
        let ds = csvio::read_labeled_path(path, &args.label_col, None)?;
        let res = oracle::brute_force_minimizer(&ds)?;
        println!("partition: {}", format_partition(&res.partition));
        println!("W*: {}", res.risk);
        println!("assignments evaluated: {}", res.evaluated);
        return Ok(());
    }
    let spec = BlockDistributionSpec::block_design(args.k, args.d, args.mu1, args.mu2, args.sigma1, args.sigma2)?;
    if args.corollary {
        let report = oracle::corollary_check(&spec, args.d)?;
        println!("{report}");
        return Ok(());
    }
    if args.consistency {
        let n_grid = parse_list(&args.n_grid, |s| s.parse::<usize>().with_context(|| format!("bad sample size `{s}`")))?;
        let fitter = if args.brute_force {
            Fitter::BruteForce
        } else {
            Fitter::Lloyd(FitConfig {
                restarts: args.restarts,
                ..FitConfig::default()
            })
        };
        let report = oracle::consistency_experiment(&spec, &n_grid, args.reps, seed, &fitter)?;
        let mut out = output(args.out.as_deref())?;
        out.write_all(report.to_tsv().as_bytes())?;
        out.flush()?;
        for (n, gap) in report.mean_gaps() {
            eprintln!("n = {n}: mean gap {gap}");
        }
        return Ok(());
    }
    bail!("give --data, --corollary or --consistency")
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    match &cli.command {
        Command::Simulate(a) => simulate(a, cli.seed),
        Command::Fit(a) => fit(a, cli.seed),
        Command::Predict(a) => predict(a),
        Command::Benchmark(a) => benchmark(a, cli.seed),
        Command::Oracle(a) => run_oracle(a, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let algorithmic = err.downcast_ref::<NdcError>().is_some_and(NdcError::is_algorithmic);
            ExitCode::from(if algorithmic { 3 } else { 2 })
        }
    }
}
