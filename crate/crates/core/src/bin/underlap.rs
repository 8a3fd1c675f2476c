use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::json;

use underlap::data::{ingest_csv, ColumnKind, MixedDataset};
use underlap::mi::{mi_unl_curve, write_curve_csv, CurveFamily, CurveScenario, MiUnit, Prevalence};
use underlap::mixtures::{
    derive_dpm_hyperparams, derive_lddp_hyperparams, design_matrix, fit_dpm, fit_lddp, DpmConfig, LddpConfig,
    ModelKind,
};
use underlap::partitions::{representative_index, similarity_matrix};
use underlap::pipeline::{
    example_config, example_n, run_ppc, ConditionalConfig, MarginalConfig, PipelineConfig, PpcConfig, DEFAULT_M,
};
use underlap::seed::{derive_seed, derived_rng};
use underlap::simulate::{simulate, Example};
use underlap::unl::{estimate_unl_seeded, unl_exact_discrete, variance_bound};
use underlap::{DensityModel, Error, Partition, PosteriorDraws, Result};

#[derive(Parser)]
#[command(name = "underlap", version, about = "Generalized underlap coefficient diagnostics for model-based clustering")]
struct Cli {
    /// Worker threads for parallel stages (defaults to all cores).
    #[arg(long, global = true, env = "UNL_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one of the synthetic examples as CSV.
    Simulate(SimulateArgs),
    /// Fit a truncated DPM to selected columns and write NDJSON draws.
    FitDpm(FitDpmArgs),
    /// Fit a truncated LDDP regression and write NDJSON draws.
    FitLddp(FitLddpArgs),
    /// Representative partition (VI lower bound) of saved draws.
    SummarizePartition(SummarizeArgs),
    /// Estimate the UNL of a JSON array of densities.
    Unl(UnlArgs),
    /// UNL and MI_Z across a grid of separations for the three-normal family.
    MiCurve(MiCurveArgs),
    /// Response DPM, representative partition, covariate UNL report.
    PipelineMarginal(PipelineArgs),
    /// LDDP regression, representative partition, covariate UNL report.
    PipelineConditional(PipelineArgs),
    /// Posterior predictive checks for saved LDDP draws.
    Ppc(PpcArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ExampleArg {
    A,
    B,
    C1,
    C2,
    D,
}

impl From<ExampleArg> for Example {
    fn from(e: ExampleArg) -> Self {
        match e {
            ExampleArg::A => Example::A,
            ExampleArg::B => Example::B,
            ExampleArg::C1 => Example::C1,
            ExampleArg::C2 => Example::C2,
            ExampleArg::D => Example::D,
        }
    }
}

#[derive(Args)]
struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long, conflicts_with = "example")]
    data: Option<PathBuf>,
    /// Columns to read as categorical (comma separated).
    #[arg(long, value_delimiter = ',')]
    categorical: Vec<String>,
    /// Columns to read as continuous (comma separated); others are inferred.
    #[arg(long, value_delimiter = ',')]
    continuous: Vec<String>,
    /// Simulate this example instead of reading a file.
    #[arg(long, value_enum)]
    example: Option<ExampleArg>,
    /// Rows to simulate with --example.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    example: ExampleArg,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Halve the default sample size.
    #[arg(long)]
    desk_scale: bool,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the generating group of each row (1-based) to this CSV.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct ChainArgs {
    /// JSON file with sampler settings; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_iter: Option<usize>,
    #[arg(long)]
    n_burn: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    truncation: Option<usize>,
    /// 1000 + 1000 sweeps.
    #[arg(long)]
    desk_scale: bool,
}

#[derive(Args)]
struct FitDpmArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Columns to model (all when absent).
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long)]
    kmeans_k: Option<usize>,
    /// NDJSON output.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitLddpArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "y")]
    response: String,
    /// Regression covariates (all other columns when absent).
    #[arg(long, value_delimiter = ',')]
    regressors: Vec<String>,
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SummarizeArgs {
    /// NDJSON draws from fit-dpm or fit-lddp.
    #[arg(long)]
    draws: PathBuf,
    /// Partition CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Posterior similarity matrix CSV output.
    #[arg(long)]
    psm: Option<PathBuf>,
}

#[derive(Args)]
struct UnlArgs {
    /// JSON array of density models, one per group.
    #[arg(long)]
    groups: PathBuf,
    #[arg(long, default_value_t = DEFAULT_M)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also enumerate the exact value (categorical groups only).
    #[arg(long)]
    exact: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Symmetric,
    Shifted,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrevalenceArg {
    Balanced,
    Imbalanced,
}

#[derive(Args)]
struct MiCurveArgs {
    #[arg(long, value_enum, default_value = "symmetric")]
    family: FamilyArg,
    #[arg(long, value_enum, default_value = "balanced")]
    prevalence: PrevalenceArg,
    /// Separations (comma separated); defaults to 0, 0.25, ..., 6.
    #[arg(long, value_delimiter = ',')]
    d: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_M)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Append the raw mutual information in bits.
    #[arg(long)]
    bits: bool,
    /// Append the raw mutual information in nats.
    #[arg(long, conflicts_with = "bits")]
    nats: bool,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    data: DataArgs,
    /// JSON pipeline configuration; required unless --example is given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Importance-sampling draws per UNL estimate.
    #[arg(long)]
    m: Option<usize>,
    /// Halved example size, 1000 + 1000 sweeps, M = 2000.
    #[arg(long)]
    desk_scale: bool,
    /// Output directory for report.json, partition.csv and draws.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PpcArgs {
    #[command(flatten)]
    data: DataArgs,
    /// NDJSON draws from fit-lddp on the same data.
    #[arg(long)]
    draws: PathBuf,
    #[arg(long, default_value = "y")]
    response: String,
    #[arg(long, value_delimiter = ',')]
    regressors: Vec<String>,
    /// JSON file with check settings; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n_rep: Option<usize>,
    #[arg(long)]
    interval_covariate: Option<String>,
    #[arg(long, value_delimiter = ',')]
    cutoffs: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output JSON (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            log::warn!("thread pool already initialised: {e}");
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::FitDpm(a) => cmd_fit_dpm(a),
        Command::FitLddp(a) => cmd_fit_lddp(a),
        Command::SummarizePartition(a) => cmd_summarize(a),
        Command::Unl(a) => cmd_unl(a),
        Command::MiCurve(a) => cmd_mi_curve(a),
        Command::PipelineMarginal(a) => cmd_pipeline(a, false),
        Command::PipelineConditional(a) => cmd_pipeline(a, true),
        Command::Ppc(a) => cmd_ppc(a),
    }
}

fn check_input(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Argument(format!("input file '{}' does not exist", path.display())))
    }
}

fn check_output(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => {
            Err(Error::Argument(format!("output directory '{}' does not exist", dir.display())))
        }
        _ => Ok(()),
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

impl DataArgs {
    fn validate(&self) -> Result<()> {
        match (&self.data, self.example) {
            (Some(p), _) => check_input(p),
            (None, Some(_)) => Ok(()),
            (None, None) => Err(Error::Argument("give --data or --example".into())),
        }
    }

    fn load(&self, seed: u64, desk: bool) -> Result<MixedDataset> {
        if let Some(ex) = self.example {
            let ex = Example::from(ex);
            let n = self.n.unwrap_or_else(|| example_n(ex, desk));
            return Ok(simulate(ex, n, derive_seed(seed, 0))?.data);
        }
        let path = self.data.as_ref().ok_or_else(|| Error::Argument("give --data or --example".into()))?;
        let mut schema = BTreeMap::new();
        for c in &self.categorical {
            schema.insert(c.clone(), ColumnKind::Categorical);
        }
        for c in &self.continuous {
            if schema.insert(c.clone(), ColumnKind::Continuous).is_some() {
                return Err(Error::Argument(format!("column '{c}' declared both categorical and continuous")));
            }
        }
        let data = ingest_csv(path, &schema)?;
        if data.dropped_count > 0 {
            log::info!("dropped {} row(s) with missing cells", data.dropped_count);
        }
        Ok(data)
    }
}

impl ChainArgs {
    fn seed_or(&self, fallback: u64) -> u64 {
        self.seed.unwrap_or(fallback)
    }

    fn apply(&self, n_iter: &mut usize, n_burn: &mut usize, thin: &mut usize, truncation: &mut usize) {
        if self.desk_scale {
            *n_iter = 1000;
            *n_burn = 1000;
        }
        if let Some(v) = self.n_iter {
            *n_iter = v;
        }
        if let Some(v) = self.n_burn {
            *n_burn = v;
        }
        if let Some(v) = self.thin {
            *thin = v;
        }
        if let Some(v) = self.truncation {
            *truncation = v;
        }
    }
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    if let Some(p) = &a.out {
        check_output(p)?;
    }
    if let Some(p) = &a.truth {
        check_output(p)?;
    }
    let ex = Example::from(a.example);
    let n = a.n.unwrap_or_else(|| example_n(ex, a.desk_scale));
    let sim = simulate(ex, n, a.seed)?;
    let mut w = output(a.out.as_deref())?;
    sim.data.write_csv(&mut w)?;
    w.flush()?;
    if let Some(p) = &a.truth {
        Partition::from_labels(&sim.truth.iter().map(|t| t + 1).collect::<Vec<_>>()).write_csv(File::create(p)?)?;
    }
    Ok(())
}

fn cmd_fit_dpm(a: FitDpmArgs) -> Result<()> {
    a.data.validate()?;
    check_output(&a.out)?;
    let mut cfg: DpmConfig = match &a.chain.config {
        Some(p) => read_json(p)?,
        None => DpmConfig::default(),
    };
    a.chain.apply(&mut cfg.n_iter, &mut cfg.n_burn, &mut cfg.thin, &mut cfg.truncation);
    if let Some(k) = a.kmeans_k {
        cfg.kmeans_k = k;
    }
    cfg.seed = a.chain.seed_or(cfg.seed);
    cfg.validate()?;
    let data = a.data.load(cfg.seed, a.chain.desk_scale)?;
    let data = if a.columns.is_empty() {
        data
    } else {
        data.select_columns(&a.columns.iter().map(String::as_str).collect::<Vec<_>>())?
    };
    let hp = derive_dpm_hyperparams(&data, cfg.kmeans_k, cfg.tau_k, &mut derived_rng(cfg.seed, u64::MAX))?;
    for note in &hp.notes {
        log::info!("{note}");
    }
    let draws = fit_dpm(&data, &hp, &cfg)?;
    draws.write_ndjson(BufWriter::new(File::create(&a.out)?))?;
    println!("{}", serde_json::to_string(&fit_summary(&draws))?);
    Ok(())
}

fn cmd_fit_lddp(a: FitLddpArgs) -> Result<()> {
    a.data.validate()?;
    check_output(&a.out)?;
    let mut cfg: LddpConfig = match &a.chain.config {
        Some(p) => read_json(p)?,
        None => LddpConfig::default(),
    };
    a.chain.apply(&mut cfg.n_iter, &mut cfg.n_burn, &mut cfg.thin, &mut cfg.truncation);
    cfg.seed = a.chain.seed_or(cfg.seed);
    cfg.validate()?;
    let data = a.data.load(cfg.seed, a.chain.desk_scale)?;
    let y = data.continuous_column(&a.response)?;
    let regressors = regressors_or_rest(&data, &a.response, &a.regressors);
    let (x, names) = design_matrix(&data, &regressors.iter().map(String::as_str).collect::<Vec<_>>())?;
    log::info!("design columns: {}", names.join(", "));
    let hp = derive_lddp_hyperparams(&y, &x)?;
    let draws = fit_lddp(&y, &x, &hp, &cfg)?;
    draws.write_ndjson(BufWriter::new(File::create(&a.out)?))?;
    println!("{}", serde_json::to_string(&fit_summary(&draws))?);
    Ok(())
}

fn regressors_or_rest(data: &MixedDataset, response: &str, given: &[String]) -> Vec<String> {
    if given.is_empty() {
        data.column_names().into_iter().filter(|c| *c != response).map(String::from).collect()
    } else {
        given.to_vec()
    }
}

fn fit_summary(draws: &PosteriorDraws) -> serde_json::Value {
    let occ = draws.occupied_counts();
    let alphas = draws.alphas();
    let s = draws.len().max(1) as f64;
    json!({
        "model": draws.header.model,
        "n": draws.header.n,
        "retained": draws.len(),
        "mean_occupied": occ.iter().sum::<usize>() as f64 / s,
        "alpha_mean": alphas.iter().sum::<f64>() / s,
        "repairs": draws.header.repairs,
    })
}

fn read_draws(path: &Path) -> Result<PosteriorDraws> {
    PosteriorDraws::read_ndjson(BufReader::new(File::open(path)?))
}

fn cmd_summarize(a: SummarizeArgs) -> Result<()> {
    check_input(&a.draws)?;
    for p in a.out.iter().chain(a.psm.iter()) {
        check_output(p)?;
    }
    let draws = read_draws(&a.draws)?;
    let allocations = draws.allocations();
    let (idx, vi) = representative_index(&allocations)?;
    let partition = Partition::from_labels(&allocations[idx]);
    if let Some(p) = &a.out {
        partition.write_csv(File::create(p)?)?;
    }
    if let Some(p) = &a.psm {
        similarity_matrix(&draws)?.write_csv(BufWriter::new(File::create(p)?))?;
    }
    let summary = json!({
        "k": partition.k(),
        "sizes": partition.sizes(),
        "vi_bound": vi,
        "iteration": idx,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn cmd_unl(a: UnlArgs) -> Result<()> {
    check_input(&a.groups)?;
    let groups: Vec<DensityModel> = read_json(&a.groups)?;
    let est = estimate_unl_seeded(&groups, a.m, a.seed)?;
    let bound = variance_bound(est.k, est.value.clamp(1.0, est.k as f64), est.m)?;
    let exact = if a.exact { Some(unl_exact_discrete(&groups)?) } else { None };
    let out = json!({ "estimate": est, "variance_bound": bound, "exact": exact });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn cmd_mi_curve(a: MiCurveArgs) -> Result<()> {
    if let Some(p) = &a.out {
        check_output(p)?;
    }
    let scenario = CurveScenario {
        family: match a.family {
            FamilyArg::Symmetric => CurveFamily::Symmetric,
            FamilyArg::Shifted => CurveFamily::Shifted,
        },
        prevalence: match a.prevalence {
            PrevalenceArg::Balanced => Prevalence::Balanced,
            PrevalenceArg::Imbalanced => Prevalence::Imbalanced,
        },
    };
    let grid: Vec<f64> = if a.d.is_empty() { (0..=24).map(|i| i as f64 * 0.25).collect() } else { a.d };
    let rows = mi_unl_curve(scenario, &grid, a.m, a.seed)?;
    let unit = if a.bits {
        Some(MiUnit::Bits)
    } else if a.nats {
        Some(MiUnit::Nats)
    } else {
        None
    };
    let mut w = output(a.out.as_deref())?;
    write_curve_csv(&rows, unit, &mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_pipeline(a: PipelineArgs, conditional: bool) -> Result<()> {
    a.data.validate()?;
    if let Some(p) = &a.config {
        check_input(p)?;
    }
    if a.out.exists() && !a.out.is_dir() {
        return Err(Error::Argument(format!("'{}' exists and is not a directory", a.out.display())));
    }
    let seed = a.seed.unwrap_or(0);
    let mut cfg = match (&a.config, a.data.example) {
        (Some(p), _) => {
            if conditional {
                PipelineConfig::Conditional(read_json::<ConditionalConfig>(p)?)
            } else {
                PipelineConfig::Marginal(read_json::<MarginalConfig>(p)?)
            }
        }
        (None, Some(ex)) => example_config(Example::from(ex), a.desk_scale, seed),
        (None, None) => return Err(Error::Argument("give --config for --data input".into())),
    };
    match (&cfg, conditional) {
        (PipelineConfig::Marginal(_), true) => {
            return Err(Error::Argument("this example uses the marginal pipeline".into()));
        }
        (PipelineConfig::Conditional(_), false) => {
            return Err(Error::Argument("this example uses the conditional pipeline".into()));
        }
        _ => {}
    }
    if a.config.is_some() && a.desk_scale {
        cfg.desk_scale();
    }
    if let Some(s) = a.seed {
        cfg.set_seed(s);
    }
    if let Some(m) = a.m {
        cfg.set_m(m);
    }
    let data = a.data.load(cfg.seed(), a.desk_scale)?;
    let report = cfg.run(&data)?;
    report.write_outputs(&a.out)?;
    for n in &report.notices {
        eprintln!("notice: {n}");
    }
    for u in &report.unl {
        println!("{}\tmean {:.4}\tsd {:.4}\t95% [{:.4}, {:.4}]", u.subset, u.mean, u.sd, u.q025, u.q975);
    }
    Ok(())
}

fn cmd_ppc(a: PpcArgs) -> Result<()> {
    a.data.validate()?;
    check_input(&a.draws)?;
    if let Some(p) = &a.config {
        check_input(p)?;
    }
    if let Some(p) = &a.out {
        check_output(p)?;
    }
    let mut cfg: PpcConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => PpcConfig::default(),
    };
    if let Some(n) = a.n_rep {
        cfg.n_rep = n;
    }
    if a.interval_covariate.is_some() {
        cfg.interval_covariate = a.interval_covariate.clone();
    }
    if !a.cutoffs.is_empty() {
        cfg.cutoffs = Some(a.cutoffs.clone());
    }
    let draws = read_draws(&a.draws)?;
    if draws.header.model != ModelKind::Lddp {
        return Err(Error::Argument("ppc needs LDDP draws".into()));
    }
    let data = a.data.load(a.seed, false)?;
    let y = data.continuous_column(&a.response)?;
    let regressors = regressors_or_rest(&data, &a.response, &a.regressors);
    let (x, _) = design_matrix(&data, &regressors.iter().map(String::as_str).collect::<Vec<_>>())?;
    let report = run_ppc(&data, &y, &x, &draws, &cfg, &mut derived_rng(a.seed, 3))?;
    let mut w = output(a.out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
