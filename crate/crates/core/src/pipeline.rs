//! End-to-end workflows: cluster on a response, pick a representative
//! partition, fit per-cluster covariate densities and estimate UNL posteriors
//! for requested covariate subsets.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::{ColumnKind, MixedDataset};
use crate::density::DensityModel;
use crate::error::{Error, Result, StageExt};
use crate::mixtures::covariates::{CovariateFitSummary, MIN_CLUSTER_SIZE};
use crate::mixtures::predictive::{ppc_report, PpcReport};
use crate::mixtures::{
    cluster_covariate_densities, derive_dpm_hyperparams, derive_lddp_hyperparams, design_matrix, fit_dpm, fit_lddp,
    posterior_predictive, DpmConfig, LddpConfig, PosteriorDraws,
};
use crate::partitions::{representative_index, Partition};
use crate::seed::{derive_seed, derived_rng};
use crate::simulate::{covariate_names, simulate, Example, Simulated};
use crate::unl::{estimate_unl_posterior, UnlPosterior};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_M: usize = 5000;
pub const DESK_M: usize = 2000;
pub const K1_NOTICE: &str = "K=1, UNL undefined for one group";

/// A named set of covariate columns whose joint UNL is reported.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetSpec {
    pub name: String,
    pub columns: Vec<String>,
}

impl SubsetSpec {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
        }
    }
}

/// Joint subset over all covariates plus, for up to ten covariates, each one alone.
pub fn default_subsets(covariates: &[String]) -> Vec<SubsetSpec> {
    let mut out = vec![SubsetSpec {
        name: "joint".into(),
        columns: covariates.to_vec(),
    }];
    if covariates.len() > 1 && covariates.len() <= 10 {
        out.extend(covariates.iter().map(|c| SubsetSpec {
            name: c.clone(),
            columns: vec![c.clone()],
        }));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MarginalConfig {
    pub response: Vec<String>,
    pub covariates: Vec<String>,
    /// Empty means [`default_subsets`].
    pub subsets: Vec<SubsetSpec>,
    pub response_dpm: DpmConfig,
    pub covariate_dpm: DpmConfig,
    pub m: usize,
    pub seed: u64,
    /// Drop clusters below the covariate-fit minimum instead of failing.
    pub drop_small_clusters: bool,
    /// Use at most this many evenly spaced posterior rows for UNL.
    pub unl_rows: Option<usize>,
}

impl Default for MarginalConfig {
    fn default() -> Self {
        Self {
            response: Vec::new(),
            covariates: Vec::new(),
            subsets: Vec::new(),
            response_dpm: DpmConfig::default(),
            covariate_dpm: DpmConfig::default(),
            m: DEFAULT_M,
            seed: 0,
            drop_small_clusters: true,
            unl_rows: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PpcConfig {
    pub n_rep: usize,
    /// Continuous column whose intervals bin the conditional samples.
    pub interval_covariate: Option<String>,
    /// Interior interval cutoffs; quartiles when absent.
    pub cutoffs: Option<Vec<f64>>,
    /// Replicates pooled into each interval's samples.
    pub pooled: usize,
}

impl Default for PpcConfig {
    fn default() -> Self {
        Self {
            n_rep: 200,
            interval_covariate: None,
            cutoffs: None,
            pooled: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConditionalConfig {
    pub response: String,
    pub regressors: Vec<String>,
    /// Covariates whose cluster densities are compared; defaults to the regressors.
    pub covariates: Vec<String>,
    pub subsets: Vec<SubsetSpec>,
    pub lddp: LddpConfig,
    pub covariate_dpm: DpmConfig,
    pub m: usize,
    pub seed: u64,
    pub drop_small_clusters: bool,
    pub unl_rows: Option<usize>,
    pub ppc: Option<PpcConfig>,
}

impl Default for ConditionalConfig {
    fn default() -> Self {
        Self {
            response: String::new(),
            regressors: Vec::new(),
            covariates: Vec::new(),
            subsets: Vec::new(),
            lddp: LddpConfig::default(),
            covariate_dpm: DpmConfig::default(),
            m: DEFAULT_M,
            seed: 0,
            drop_small_clusters: true,
            unl_rows: None,
            ppc: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnlSummary {
    pub subset: String,
    pub columns: Vec<String>,
    pub k: usize,
    pub m: usize,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q500: f64,
    pub q975: f64,
    /// Histogram-ready UNL draws, one per posterior row.
    pub draws: Vec<f64>,
    /// `UNL (K − UNL) / M` per draw.
    pub variance_bounds: Vec<f64>,
    pub ess: Vec<f64>,
    pub weight_max: Vec<f64>,
}

impl UnlSummary {
    fn from_posterior(spec: &SubsetSpec, post: &UnlPosterior) -> Self {
        let values = post.values();
        let n = values.len() as f64;
        let mean = post.mean();
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            subset: spec.name.clone(),
            columns: spec.columns.clone(),
            k: post.draws[0].k,
            m: post.draws[0].m,
            mean,
            sd,
            q025: post.quantile(0.025),
            q500: post.quantile(0.5),
            q975: post.quantile(0.975),
            draws: values,
            variance_bounds: post.draws.iter().map(|d| d.variance_bound()).collect(),
            ess: post.draws.iter().map(|d| d.ess).collect(),
            weight_max: post.draws.iter().map(|d| d.weight_max).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub k: usize,
    pub sizes: Vec<usize>,
    pub vi_bound: f64,
    /// Retained iteration the partition was taken from (0-based).
    pub iteration: usize,
    /// Canonical 1-based labels of the rows kept for the covariate stage.
    pub labels: Vec<usize>,
    /// 0-based rows excluded because their cluster was too small.
    pub excluded_rows: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub retained: usize,
    pub repairs: usize,
    pub mean_occupied: f64,
    pub alpha_mean: f64,
    pub hyper_notes: Vec<String>,
}

impl FitSummary {
    fn of(draws: &PosteriorDraws, notes: Vec<String>) -> Self {
        let occ = draws.occupied_counts();
        let alphas = draws.alphas();
        let s = draws.len().max(1) as f64;
        Self {
            retained: draws.len(),
            repairs: draws.header.repairs,
            mean_occupied: occ.iter().sum::<usize>() as f64 / s,
            alpha_mean: alphas.iter().sum::<f64>() / s,
            hyper_notes: notes,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub schema_version: u32,
    pub pipeline: String,
    /// Unix time in seconds; the only field that varies between identical runs.
    pub generated_at: u64,
    pub seed: u64,
    pub n_rows: usize,
    pub dropped_rows: usize,
    pub fit: FitSummary,
    pub partition: PartitionSummary,
    pub notices: Vec<String>,
    pub covariate_fit: Option<CovariateFitSummary>,
    pub unl: Vec<UnlSummary>,
    pub ppc: Option<PpcReport>,
    pub config: serde_json::Value,
}

impl PipelineReport {
    pub fn unl_for(&self, subset: &str) -> Option<&UnlSummary> {
        self.unl.iter().find(|u| u.subset == subset)
    }

    pub fn partition(&self) -> Partition {
        Partition::from_labels(&self.partition.labels)
    }

    /// Writes `report.json`, `partition.csv` and `draws.csv` into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self)?;
        fs::write(dir.join("report.json"), json)?;
        self.partition().write_csv(fs::File::create(dir.join("partition.csv"))?)?;
        let mut w = csv::Writer::from_path(dir.join("draws.csv"))?;
        w.write_record(["subset", "s", "value", "ess", "weight_max", "variance_bound"])?;
        for u in &self.unl {
            for (s, v) in u.draws.iter().enumerate() {
                w.write_record([
                    u.subset.clone(),
                    (s + 1).to_string(),
                    v.to_string(),
                    u.ess[s].to_string(),
                    u.weight_max[s].to_string(),
                    u.variance_bounds[s].to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn check_disjoint(a: &[String], b: &[String], what: &str) -> Result<()> {
    if let Some(c) = a.iter().find(|c| b.contains(c)) {
        return Err(Error::arg(format!("column '{c}' is both {what} and covariate")));
    }
    Ok(())
}

fn check_subsets(subsets: &[SubsetSpec], covariates: &[String]) -> Result<()> {
    for s in subsets {
        if s.columns.is_empty() {
            return Err(Error::arg(format!("subset '{}' is empty", s.name)));
        }
        if let Some(c) = s.columns.iter().find(|c| !covariates.contains(c)) {
            return Err(Error::arg(format!("subset '{}' names '{c}', which is not a covariate", s.name)));
        }
    }
    Ok(())
}

struct Selected {
    partition: Partition,
    kept: Vec<usize>,
    summary: PartitionSummary,
    notices: Vec<String>,
}

/// Smallest cluster kept when dropping: enough rows for a full-rank
/// covariance of the continuous covariates, and never below [`MIN_CLUSTER_SIZE`].
pub fn min_kept_cluster_size(data: &MixedDataset, covariates: &[String]) -> usize {
    let p_cont = covariates
        .iter()
        .filter(|c| data.column_index(c).is_ok_and(|j| data.columns()[j].kind == ColumnKind::Continuous))
        .count();
    MIN_CLUSTER_SIZE.max(p_cont + 2)
}

fn select_partition(draws: &PosteriorDraws, drop_small: bool, min_size: usize) -> Result<Selected> {
    let allocations = draws.allocations();
    let (idx, vi) = representative_index(&allocations)?;
    let full = Partition::from_labels(&allocations[idx]);
    let mut notices = Vec::new();
    let sizes = full.sizes();
    let small: Vec<usize> = (0..sizes.len()).filter(|&c| sizes[c] < min_size).collect();
    let (partition, kept, excluded) = if drop_small && !small.is_empty() {
        let kept: Vec<usize> = (0..full.len()).filter(|&i| sizes[full.labels()[i] - 1] >= min_size).collect();
        let excluded: Vec<usize> = (0..full.len()).filter(|&i| sizes[full.labels()[i] - 1] < min_size).collect();
        let msg = format!(
            "dropped {} cluster(s) with fewer than {min_size} members ({} rows)",
            small.len(),
            excluded.len()
        );
        log::warn!("{msg}");
        notices.push(msg);
        let labels: Vec<usize> = kept.iter().map(|&i| full.labels()[i]).collect();
        (Partition::from_labels(&labels), kept, excluded)
    } else {
        (full.clone(), (0..full.len()).collect(), Vec::new())
    };
    let summary = PartitionSummary {
        k: partition.k(),
        sizes: partition.sizes(),
        vi_bound: vi,
        iteration: idx,
        labels: partition.labels().to_vec(),
        excluded_rows: excluded,
    };
    Ok(Selected {
        partition,
        kept,
        summary,
        notices,
    })
}

fn thin_rows<T: Clone>(rows: Vec<T>, limit: Option<usize>) -> Vec<T> {
    match limit {
        Some(l) if l > 0 && rows.len() > l => {
            let n = rows.len();
            (0..l).map(|i| rows[i * n / l].clone()).collect()
        }
        _ => rows,
    }
}

/// Fits covariate densities per cluster and estimates UNL posteriors for
/// every subset. Returns `None` (with the K=1 notice) for a single cluster.
fn covariate_stage(
    data: &MixedDataset,
    selected: &Selected,
    covariates: &[String],
    subsets: &[SubsetSpec],
    dpm: &DpmConfig,
    m: usize,
    seed: u64,
    unl_rows: Option<usize>,
    notices: &mut Vec<String>,
) -> Result<(Option<CovariateFitSummary>, Vec<UnlSummary>)> {
    if selected.partition.k() < 2 {
        log::warn!("{K1_NOTICE}");
        notices.push(K1_NOTICE.to_string());
        return Ok((None, Vec::new()));
    }
    let names: Vec<&str> = covariates.iter().map(String::as_str).collect();
    let cov_data = data.select_columns(&names).stage("covariates")?.select_rows(&selected.kept);
    let cfg = DpmConfig {
        seed: derive_seed(seed, 2),
        ..dpm.clone()
    };
    let fit = cluster_covariate_densities(&selected.partition, &cov_data, &cfg).stage("covariate-densities")?;
    let order = &fit.summary.variables;
    let rows = thin_rows(fit.densities, unl_rows);
    let mut out = Vec::with_capacity(subsets.len());
    for (i, spec) in subsets.iter().enumerate() {
        let keep: Vec<usize> = spec
            .columns
            .iter()
            .map(|c| order.iter().position(|v| v == c).ok_or_else(|| Error::arg(format!("unknown covariate '{c}'"))))
            .collect::<Result<_>>()?;
        let mut keep_sorted = keep.clone();
        keep_sorted.sort_unstable();
        let groups: Vec<Vec<DensityModel>> = if keep_sorted.len() == order.len() {
            rows.clone()
        } else {
            rows.iter()
                .map(|row| row.iter().map(|g| g.marginalize(&keep_sorted)).collect::<Result<Vec<_>>>())
                .collect::<Result<_>>()
                .stage("marginalize")?
        };
        let post = estimate_unl_posterior(&groups, m, derive_seed(seed, 100 + i as u64)).stage("unl")?;
        out.push(UnlSummary::from_posterior(spec, &post));
    }
    Ok((Some(fit.summary), out))
}

/// Clusters rows on the response columns with a DPM, then diagnoses the
/// representative partition's dependence on the covariates.
pub fn run_marginal_pipeline(data: &MixedDataset, cfg: &MarginalConfig) -> Result<PipelineReport> {
    if cfg.response.is_empty() || cfg.covariates.is_empty() {
        return Err(Error::arg("response and covariates must both be named"));
    }
    check_disjoint(&cfg.response, &cfg.covariates, "response")?;
    let subsets = if cfg.subsets.is_empty() { default_subsets(&cfg.covariates) } else { cfg.subsets.clone() };
    check_subsets(&subsets, &cfg.covariates)?;
    let names: Vec<&str> = cfg.response.iter().map(String::as_str).collect();
    let response = data.select_columns(&names).stage("response")?;
    let dpm = DpmConfig {
        seed: derive_seed(cfg.seed, 1),
        ..cfg.response_dpm.clone()
    };
    let hp = derive_dpm_hyperparams(&response, dpm.kmeans_k, dpm.tau_k, &mut derived_rng(cfg.seed, 0))
        .stage("hyperparameters")?;
    let draws = fit_dpm(&response, &hp, &dpm).stage("fit-dpm")?;
    let min_size = min_kept_cluster_size(data, &cfg.covariates);
    let selected = select_partition(&draws, cfg.drop_small_clusters, min_size).stage("representative-partition")?;
    let mut notices = selected.notices.clone();
    let (cov_summary, unl) = covariate_stage(
        data,
        &selected,
        &cfg.covariates,
        &subsets,
        &cfg.covariate_dpm,
        cfg.m,
        cfg.seed,
        cfg.unl_rows,
        &mut notices,
    )?;
    Ok(PipelineReport {
        schema_version: SCHEMA_VERSION,
        pipeline: "marginal".into(),
        generated_at: now(),
        seed: cfg.seed,
        n_rows: data.n_rows(),
        dropped_rows: data.dropped_count,
        fit: FitSummary::of(&draws, hp.notes),
        partition: selected.summary,
        notices,
        covariate_fit: cov_summary,
        unl,
        ppc: None,
        config: serde_json::to_value(cfg)?,
    })
}

/// Fits an LDDP of the response on the regressors, then diagnoses the
/// representative partition's dependence on the covariates.
pub fn run_conditional_pipeline(data: &MixedDataset, cfg: &ConditionalConfig) -> Result<PipelineReport> {
    if cfg.response.is_empty() || cfg.regressors.is_empty() {
        return Err(Error::arg("response and regressors must both be named"));
    }
    let covariates = if cfg.covariates.is_empty() { cfg.regressors.clone() } else { cfg.covariates.clone() };
    check_disjoint(std::slice::from_ref(&cfg.response), &covariates, "response")?;
    check_disjoint(std::slice::from_ref(&cfg.response), &cfg.regressors, "response")?;
    let subsets = if cfg.subsets.is_empty() { default_subsets(&covariates) } else { cfg.subsets.clone() };
    check_subsets(&subsets, &covariates)?;
    let y = data.continuous_column(&cfg.response).stage("response")?;
    let names: Vec<&str> = cfg.regressors.iter().map(String::as_str).collect();
    let (x, _) = design_matrix(data, &names).stage("design")?;
    let hp = derive_lddp_hyperparams(&y, &x).stage("hyperparameters")?;
    let lddp = LddpConfig {
        seed: derive_seed(cfg.seed, 1),
        ..cfg.lddp.clone()
    };
    let draws = fit_lddp(&y, &x, &hp, &lddp).stage("fit-lddp")?;
    let min_size = min_kept_cluster_size(data, &covariates);
    let selected = select_partition(&draws, cfg.drop_small_clusters, min_size).stage("representative-partition")?;
    let mut notices = selected.notices.clone();
    let (cov_summary, unl) = covariate_stage(
        data,
        &selected,
        &covariates,
        &subsets,
        &cfg.covariate_dpm,
        cfg.m,
        cfg.seed,
        cfg.unl_rows,
        &mut notices,
    )?;
    let ppc = match &cfg.ppc {
        Some(p) => Some(run_ppc(data, &y, &x, &draws, p, &mut derived_rng(cfg.seed, 3))?),
        None => None,
    };
    Ok(PipelineReport {
        schema_version: SCHEMA_VERSION,
        pipeline: "conditional".into(),
        generated_at: now(),
        seed: cfg.seed,
        n_rows: data.n_rows(),
        dropped_rows: data.dropped_count,
        fit: FitSummary::of(&draws, hp.notes),
        partition: selected.summary,
        notices,
        covariate_fit: cov_summary,
        unl,
        ppc,
        config: serde_json::to_value(cfg)?,
    })
}

/// Posterior predictive checks of an LDDP fit against the observed response
/// `y` with design `x`.
pub fn run_ppc<R: rand::Rng + ?Sized>(
    data: &MixedDataset,
    y: &[f64],
    x: &DMatrix<f64>,
    draws: &PosteriorDraws,
    cfg: &PpcConfig,
    rng: &mut R,
) -> Result<PpcReport> {
    let reps = posterior_predictive(draws, Some(x), cfg.n_rep, rng).stage("ppc")?;
    let reps: Vec<Vec<f64>> = reps.into_iter().map(|r| r.into_iter().map(|pt| pt.continuous[0]).collect()).collect();
    let cov = match &cfg.interval_covariate {
        Some(c) => Some(data.continuous_column(c).stage("ppc")?),
        None => None,
    };
    ppc_report(y, &reps, cov.as_deref().map(|c| (c, cfg.cutoffs.clone())), cfg.pooled).stage("ppc")
}

/// Either pipeline's configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pipeline", rename_all = "lowercase")]
pub enum PipelineConfig {
    Marginal(MarginalConfig),
    Conditional(ConditionalConfig),
}

impl PipelineConfig {
    pub fn run(&self, data: &MixedDataset) -> Result<PipelineReport> {
        match self {
            PipelineConfig::Marginal(c) => run_marginal_pipeline(data, c),
            PipelineConfig::Conditional(c) => run_conditional_pipeline(data, c),
        }
    }

    /// Shortens every chain to 1000 + 1000 sweeps and sets `M` to [`DESK_M`].
    pub fn desk_scale(&mut self) {
        let short = |n_iter: &mut usize, n_burn: &mut usize| {
            *n_iter = 1000;
            *n_burn = 1000;
        };
        match self {
            PipelineConfig::Marginal(c) => {
                short(&mut c.response_dpm.n_iter, &mut c.response_dpm.n_burn);
                short(&mut c.covariate_dpm.n_iter, &mut c.covariate_dpm.n_burn);
                c.m = DESK_M;
            }
            PipelineConfig::Conditional(c) => {
                short(&mut c.lddp.n_iter, &mut c.lddp.n_burn);
                short(&mut c.covariate_dpm.n_iter, &mut c.covariate_dpm.n_burn);
                c.m = DESK_M;
            }
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            PipelineConfig::Marginal(c) => c.seed,
            PipelineConfig::Conditional(c) => c.seed,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            PipelineConfig::Marginal(c) => c.seed = seed,
            PipelineConfig::Conditional(c) => c.seed = seed,
        }
    }

    pub fn set_m(&mut self, m: usize) {
        match self {
            PipelineConfig::Marginal(c) => c.m = m,
            PipelineConfig::Conditional(c) => c.m = m,
        }
    }
}

/// Sample size used for an example: the default, halved at desk scale.
pub fn example_n(example: Example, desk: bool) -> usize {
    if desk {
        example.default_n() / 2
    } else {
        example.default_n()
    }
}

/// Pipeline settings for an example: marginal (DPM) for A and B, conditional
/// (LDDP) for C1, C2 and D. Desk scale uses 1000 + 1000 sweeps and M = 2000.
pub fn example_config(example: Example, desk: bool, seed: u64) -> PipelineConfig {
    let dpm = if desk { DpmConfig::desk() } else { DpmConfig::default() };
    let lddp = if desk { LddpConfig::desk() } else { LddpConfig::default() };
    let m = if desk { DESK_M } else { DEFAULT_M };
    let covariate_dpm = dpm.clone();
    let covariates = covariate_names(example);
    let cov_refs: Vec<&str> = covariates.iter().map(String::as_str).collect();
    match example {
        Example::A | Example::B => {
            let mut subsets = vec![SubsetSpec::new(&covariates.join(","), &cov_refs)];
            if covariates.len() > 1 {
                subsets.extend(cov_refs.iter().map(|c| SubsetSpec::new(c, &[c])));
            }
            PipelineConfig::Marginal(MarginalConfig {
                response: vec!["y".into()],
                covariates: covariates.clone(),
                subsets,
                response_dpm: dpm,
                covariate_dpm,
                m,
                seed,
                ..MarginalConfig::default()
            })
        }
        Example::C1 | Example::C2 | Example::D => {
            let subsets = if example == Example::D {
                let odd: Vec<&str> = cov_refs.iter().step_by(2).copied().collect();
                let even: Vec<&str> = cov_refs.iter().skip(1).step_by(2).copied().collect();
                vec![SubsetSpec::new("odd", &odd), SubsetSpec::new("even", &even), SubsetSpec::new("x1", &["x1"])]
            } else {
                let mut v = vec![SubsetSpec::new(&covariates.join(","), &cov_refs)];
                v.extend(cov_refs.iter().map(|c| SubsetSpec::new(c, &[c])));
                v
            };
            PipelineConfig::Conditional(ConditionalConfig {
                response: "y".into(),
                regressors: covariates.clone(),
                covariates,
                subsets,
                lddp,
                covariate_dpm,
                m,
                seed,
                ..ConditionalConfig::default()
            })
        }
    }
}

/// Simulates an example with `derive_seed(seed, 0)` and runs its pipeline.
pub fn run_example(example: Example, desk: bool, seed: u64) -> Result<(Simulated, PipelineReport)> {
    let sim = simulate(example, example_n(example, desk), derive_seed(seed, 0)).stage("simulate")?;
    let report = example_config(example, desk, seed).run(&sim.data)?;
    Ok((sim, report))
}
